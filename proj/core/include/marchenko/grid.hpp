#pragma once

#include <complex>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace marchenko {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

/// Uniform periodic grid s_i = -X + i*h_x, i = 0..M-1, on which Hankel
/// profiles p(s) are sampled.
struct MasterGrid {
    double half_width = 1.0;
    int node_count = 4;

    double spacing() const noexcept { return 2.0 * half_width / node_count; }
    double node(int i) const noexcept { return -half_width + i * spacing(); }

    /// Index of the node at s, if s lies on a node to within 1e-9*h_x.
    std::optional<int> index_of(double s) const noexcept;

    /// As index_of, but throws DomainError for off-grid or out-of-range s.
    int checked_index(double s) const;

    /// Frequency (cycles per unit length) of spectral slot j, j = 0..M-1,
    /// corresponding to integer wavenumber k = j - M/2.
    double frequency(int slot) const noexcept {
        return (slot - node_count / 2) / (2.0 * half_width);
    }
};

MasterGrid make_uniform_grid(double half_width, int node_count);

/// Matrix-valued profile p(s) sampled on a master grid.
///
/// Samples are stored column-wise: column i holds the column-major
/// flattening of the rows x cols matrix p(s_i).
///
/// A profile may carry an exponential weight e^{a s}: the smooth periodic
/// part r(s) = e^{-a s} p(s) is what the spectral twin represents. This lets
/// pure exponential data e^{a s} (the classical soliton scattering data) be
/// evolved exactly on a periodic domain. Weight 0 is the plain case.
struct MatrixProfile {
    MasterGrid grid;
    int rows = 1;
    int cols = 1;
    double weight_rate = 0.0;
    double time = 0.0;
    CMatrix samples;

    MatrixProfile() = default;
    MatrixProfile(const MasterGrid& g, int n, int m, double weight = 0.0, double t = 0.0);

    int size() const noexcept { return grid.node_count; }

    Eigen::Map<const CMatrix> at_index(int i) const {
        return {samples.col(i).data(), rows, cols};
    }
    Eigen::Map<CMatrix> at_index(int i) {
        return {samples.col(i).data(), rows, cols};
    }

    bool is_zero() const { return samples.isZero(0.0); }
};

/// Fourier coefficients of the periodic part r(s) = e^{-a s} p(s):
///
///   c_k = (1/M) sum_i r(s_i) e^{+2 pi i kappa_k s_i},   kappa_k = k / (2X),
///   r(s_i) = sum_k c_k e^{-2 pi i kappa_k s_i},
///
/// i.e. the continuous transform with forward kernel e^{+2 pi i kappa s}
/// divided by the period 2X. Slot j holds wavenumber k = j - M/2.
struct SpectralProfile {
    MasterGrid grid;
    int rows = 1;
    int cols = 1;
    double weight_rate = 0.0;
    double time = 0.0;
    CMatrix coefficients;
};

SpectralProfile to_spectral(const MatrixProfile& p);
MatrixProfile from_spectral(const SpectralProfile& c);

/// Value of the profile at a master-grid node. Off-node or out-of-range s
/// signals incommensurate grids and throws DomainError.
CMatrix eval_at(const MatrixProfile& p, double s);

/// max |p| over the outer 5% of the domain divided by max |p| overall
/// (0 for the zero profile). Entry-wise modulus.
double boundary_decay_ratio(const MatrixProfile& p);

/// Spectral derivative d^order/ds^order, honouring the exponential weight.
MatrixProfile spectral_derivative(const MatrixProfile& p, int order);

/// A * exp(-(s - c)^2 / (2 sigma^2)).
struct GaussianTerm {
    CMatrix amplitude;
    double width = 1.0;
    double center = 0.0;
};

/// A * exp(a s) on the whole line; evolved exactly through the weight.
struct ExponentialTerm {
    CMatrix amplitude;
    double rate = 1.0;
};

/// A * exp(a s) for s <= 0 and zero for s > 0 (hard cutoff at the origin).
struct ExponentialStepTerm {
    CMatrix amplitude;
    double rate = 1.0;
};

/// Explicit samples at the master-grid nodes, layout as MatrixProfile::samples.
struct TabulatedTerm {
    CMatrix values;
};

using InitialTerm = std::variant<GaussianTerm, ExponentialTerm, ExponentialStepTerm, TabulatedTerm>;

/// Initial data p0 as a sum of terms. Exponential terms must share one rate,
/// which becomes the profile weight.
struct InitialDataSpec {
    std::vector<InitialTerm> terms;
};

MatrixProfile sample_profile(const InitialDataSpec& spec, const MasterGrid& grid, int rows, int cols);

} // namespace marchenko
