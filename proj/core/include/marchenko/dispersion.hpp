#pragma once

#include <span>

#include "marchenko/grid.hpp"

namespace marchenko {

/// Coefficients of d(d/ds) = mu1 d^2/ds^2 + mu2 d^3/ds^3.
struct DispersionParams {
    cplx mu1{0.0, 0.0};
    cplx mu2{0.0, 0.0};

    bool is_zero() const noexcept { return mu1 == cplx{} && mu2 == cplx{}; }
};

/// mu1 (2 pi i k)^2 + mu2 (2 pi i k)^3.
cplx symbol(const DispersionParams& params, double k);

/// d evaluated at a derivative eigenvalue z, i.e. mu1 z^2 + mu2 z^3.
cplx generator(const DispersionParams& params, cplx z);

/// Exact-in-time evolution of one initial profile under dp/dt = d(d/ds) p.
///
/// Each Fourier mode of the periodic part is multiplied by e^{t d(z)} with
/// z = a - 2 pi i kappa its derivative eigenvalue. For modes that would grow,
/// coefficients at the round-off floor are dropped first so that noise is not
/// amplified; if a retained mode would still grow past e^700 a GrowthError is
/// raised.
class Evolver {
public:
    Evolver(const MatrixProfile& p0, const DispersionParams& params);

    /// Profile at time time_stamp(p0) + t.
    MatrixProfile at(double t) const;

    const DispersionParams& params() const noexcept { return params_; }
    const MatrixProfile& initial() const noexcept { return initial_; }

    /// Relative magnitude below which growing modes are treated as noise.
    static constexpr double noise_floor = 1e-13;
    static constexpr double growth_limit = 700.0;

private:
    MatrixProfile initial_;
    DispersionParams params_;
    SpectralProfile spectrum_;
    std::vector<cplx> exponents_;
    std::vector<double> mode_scale_;
    double max_scale_ = 0.0;
};

/// evolve(p0, params, t): profile at time p0.time + t.
MatrixProfile evolve(const MatrixProfile& p0, const DispersionParams& params, double t);

/// max |dp/dt - mu1 p'' - mu2 p'''| over the interior snapshots, with dp/dt
/// from centred differences in time and exact spectral s-derivatives.
double dispersion_residual(std::span<const MatrixProfile> snapshots, double dt,
                           const DispersionParams& params);

} // namespace marchenko
