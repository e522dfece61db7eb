#pragma once

#include <vector>

#include <Eigen/LU>

#include "marchenko/grid.hpp"

namespace marchenko {

/// Composite trapezoid rule on [-L, 0] with N intervals. The spacing is an
/// integer multiple (stride) of the master-grid spacing so that every sum of
/// nodes plus a grid-aligned x lands exactly on a master node.
struct QuadratureGrid {
    double truncation = 1.0;
    int intervals = 8;
    double spacing = 0.125;
    int stride = 1;
    std::vector<double> nodes;
    std::vector<double> weights;

    int size() const noexcept { return intervals + 1; }
    /// Index of the node at 0 (the last node).
    int origin() const noexcept { return intervals; }
};

QuadratureGrid make_quadrature(double truncation, int intervals, double master_spacing);

/// Block matrix over quadrature node pairs: block (i, j) is the
/// block_rows x block_cols value of a two-argument kernel at (xi_i, xi_j).
struct DiscreteKernel {
    QuadratureGrid quad;
    int block_rows = 1;
    int block_cols = 1;
    CMatrix data;

    auto block(int i, int j) const {
        return data.block(static_cast<Eigen::Index>(i) * block_rows,
                          static_cast<Eigen::Index>(j) * block_cols, block_rows, block_cols);
    }
};

/// The Hankel kernel p(xi_i + xi_j + x), i.e. the right-hand side of the
/// Fredholm equation.
DiscreteKernel hankel_kernel(const MatrixProfile& p, double x, const QuadratureGrid& quad);

/// q(xi_i, xi_j) = sum_k w_k p~(xi_i + xi_k + x) p(xi_k + xi_j + x).
DiscreteKernel assemble_Q(const MatrixProfile& p, const MatrixProfile& p_tilde, double x,
                          const QuadratureGrid& quad);

/// Q = -P for the companion -id: q(xi_i, xi_j) = -p(xi_i + xi_j + x).
DiscreteKernel kdv_Q(const MatrixProfile& p, double x, const QuadratureGrid& quad);

/// LU factorisation of the Nystrom matrix A = I + W Q, where W scales the
/// row blocks of Q by the quadrature weights. The discrete Fredholm equation
///
///   g(y, z) + sum_k g(y, xi_k) w_k q(xi_k, z) = p(y + z + x)
///
/// reads G A = R, with the unknown multiplying from the left; every solve
/// below therefore works with A^T.
class FredholmSystem {
public:
    explicit FredholmSystem(const DiscreteKernel& q);

    /// det((I + WQ) e^{-WQ}); 0 if the factorisation broke down.
    cplx det2() const noexcept { return det2_; }

    /// Full solution G of G A = R.
    DiscreteKernel solve(const DiscreteKernel& rhs) const;

    /// Block row i of G (block_rows x size*block_cols), i.e. g(xi_i, .).
    CMatrix solve_row(const DiscreteKernel& rhs, int i) const;

    /// Block column j of G (size*block_rows x block_cols), i.e. g(., xi_j).
    CMatrix solve_column(const DiscreteKernel& rhs, int j) const;

    /// ||G A - R||_F / ||R||_F for a full solution (0 when R = 0).
    double relative_residual(const DiscreteKernel& g, const DiscreteKernel& rhs) const;

    /// As relative_residual for a single block row.
    double row_residual(const CMatrix& row, const DiscreteKernel& rhs, int i) const;

    const CMatrix& matrix() const noexcept { return a_; }

private:
    QuadratureGrid quad_;
    int block_ = 1;
    CMatrix a_;
    Eigen::PartialPivLU<CMatrix> lu_;
    cplx det2_{1.0, 0.0};
};

/// Regularised determinant of id + Q on the quadrature grid.
cplx det2(const DiscreteKernel& q);

/// Solve P = G(id + Q) for the full kernel g. Throws PatchError when
/// |det2| < patch_threshold; (x, t) are recorded in the error.
DiscreteKernel solve_G(const DiscreteKernel& q, const MatrixProfile& p, double x,
                       double patch_threshold = 1e-8, double t = 0.0);

/// max over node pairs of |K(i,j) - K(j,i)|, entry-wise; exactly 0 for a
/// kernel whose blocks depend only on xi_i + xi_j.
double hankel_asymmetry(const DiscreteKernel& k);

/// Patch monitor: det2 values over the sampled (x, t) points.
struct PatchEvent {
    double x = 0.0;
    double t = 0.0;
    cplx det2{};
    bool located = false; // found by root location between samples
};

struct PatchReport {
    std::vector<cplx> det2;
    double min_modulus = 1.0;
    double threshold = 1e-8;
    bool flagged = false;
    std::vector<PatchEvent> events;
};

} // namespace marchenko
