#include "marchenko/fredholm.hpp"

#include <cmath>
#include <sstream>

#include "marchenko/error.hpp"

namespace marchenko {

QuadratureGrid make_quadrature(double truncation, int intervals, double master_spacing) {
    if (!(truncation > 0.0)) throw ConfigError("quadrature truncation L must be positive");
    if (intervals < 8) throw ConfigError("quadrature needs at least 8 intervals");
    if (!(master_spacing > 0.0)) throw ConfigError("master spacing must be positive");

    const double h = truncation / intervals;
    const double ratio = h / master_spacing;
    const double stride = std::round(ratio);
    if (stride < 1.0 || std::abs(ratio - stride) > 1e-9 * std::max(1.0, ratio)) {
        std::ostringstream msg;
        msg << "quadrature spacing " << h << " is not an integer multiple of the master spacing "
            << master_spacing;
        throw ConfigError(msg.str());
    }

    QuadratureGrid q;
    q.truncation = truncation;
    q.intervals = intervals;
    q.spacing = h;
    q.stride = static_cast<int>(stride);
    q.nodes.resize(intervals + 1);
    q.weights.assign(intervals + 1, h);
    for (int j = 0; j <= intervals; ++j) q.nodes[j] = -truncation + j * h;
    q.nodes[intervals] = 0.0;
    q.weights.front() = q.weights.back() = 0.5 * h;
    return q;
}

namespace {

// Master index of xi_0 + xi_0 + x = x - 2L; block (i, j) sits at base + (i + j) * stride.
int hankel_base(const MatrixProfile& p, double x, const QuadratureGrid& quad) {
    const MasterGrid& g = p.grid;
    if (std::abs(quad.spacing - quad.stride * g.spacing()) > 1e-9 * quad.spacing)
        throw ConfigError("quadrature grid was built for a different master spacing");
    const int top = g.checked_index(x);
    const int base = top - 2 * quad.intervals * quad.stride;
    if (base < 0) {
        std::ostringstream msg;
        msg << "x=" << x << " needs the profile at s=" << x - 2.0 * quad.truncation
            << ", outside the master domain [" << -g.half_width << ", " << g.half_width << ")";
        throw DomainError(msg.str());
    }
    return base;
}

// Block Hankel matrix with blocks p(xi_i + xi_j + x).
CMatrix hankel_blocks(const MatrixProfile& p, double x, const QuadratureGrid& quad) {
    const int base = hankel_base(p, x, quad);
    const int n = quad.size();
    CMatrix out(static_cast<Eigen::Index>(n) * p.rows, static_cast<Eigen::Index>(n) * p.cols);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            out.block(static_cast<Eigen::Index>(i) * p.rows, static_cast<Eigen::Index>(j) * p.cols,
                      p.rows, p.cols) = p.at_index(base + (i + j) * quad.stride);
    return out;
}

Eigen::VectorXd expanded_weights(const QuadratureGrid& quad, int block) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(quad.size()) * block);
    for (int k = 0; k < quad.size(); ++k)
        w.segment(static_cast<Eigen::Index>(k) * block, block).setConstant(quad.weights[k]);
    return w;
}

} // namespace

DiscreteKernel hankel_kernel(const MatrixProfile& p, double x, const QuadratureGrid& quad) {
    return DiscreteKernel{quad, p.rows, p.cols, hankel_blocks(p, x, quad)};
}

DiscreteKernel assemble_Q(const MatrixProfile& p, const MatrixProfile& p_tilde, double x,
                          const QuadratureGrid& quad) {
    if (p_tilde.rows != p.cols || p_tilde.cols != p.rows)
        throw ConfigError("companion profile must have the transposed dimensions of p");
    const CMatrix pm = hankel_blocks(p, x, quad);
    const CMatrix ptm = hankel_blocks(p_tilde, x, quad);
    const Eigen::VectorXd w = expanded_weights(quad, p.rows);
    DiscreteKernel q{quad, p.cols, p.cols, CMatrix()};
    q.data.noalias() = ptm * w.asDiagonal() * pm;
    return q;
}

DiscreteKernel kdv_Q(const MatrixProfile& p, double x, const QuadratureGrid& quad) {
    if (p.rows != p.cols) throw ConfigError("Q = -P needs square matrix values");
    return DiscreteKernel{quad, p.rows, p.cols, -hankel_blocks(p, x, quad)};
}

FredholmSystem::FredholmSystem(const DiscreteKernel& q) : quad_(q.quad), block_(q.block_rows) {
    if (q.block_rows != q.block_cols) throw ConfigError("Q must have square blocks");
    const Eigen::VectorXd w = expanded_weights(quad_, block_);
    const Eigen::Index dim = q.data.rows();
    CMatrix wq = w.asDiagonal() * q.data;
    a_ = CMatrix::Identity(dim, dim) + wq;
    lu_.compute(a_);

    // log det(I + WQ) - tr(WQ), accumulated in the log domain.
    const CMatrix& lu = lu_.matrixLU();
    cplx logdet = 0.0;
    bool singular = false;
    for (Eigen::Index k = 0; k < dim; ++k) {
        const cplx u = lu(k, k);
        if (u == cplx{} || !std::isfinite(std::abs(u))) {
            singular = true;
            break;
        }
        logdet += std::log(u);
    }
    if (singular) {
        det2_ = 0.0;
    } else {
        const double perm_sign = lu_.permutationP().determinant();
        det2_ = perm_sign * std::exp(logdet - wq.trace());
    }
}

DiscreteKernel FredholmSystem::solve(const DiscreteKernel& rhs) const {
    DiscreteKernel g{quad_, rhs.block_rows, rhs.block_cols, CMatrix()};
    const CMatrix rt = rhs.data.transpose();
    const CMatrix gt = lu_.transpose().solve(rt);
    g.data = gt.transpose();
    return g;
}

CMatrix FredholmSystem::solve_row(const DiscreteKernel& rhs, int i) const {
    const auto rows = rhs.data.middleRows(static_cast<Eigen::Index>(i) * rhs.block_rows,
                                          rhs.block_rows);
    const CMatrix rt = rows.transpose();
    const CMatrix gt = lu_.transpose().solve(rt);
    return gt.transpose();
}

CMatrix FredholmSystem::solve_column(const DiscreteKernel& rhs, int j) const {
    const Eigen::Index dim = a_.rows();
    CMatrix e = CMatrix::Zero(dim, block_);
    e.middleRows(static_cast<Eigen::Index>(j) * block_, block_).setIdentity();
    const CMatrix ainv_cols = lu_.solve(e);
    return rhs.data * ainv_cols;
}

double FredholmSystem::relative_residual(const DiscreteKernel& g, const DiscreteKernel& rhs) const {
    const double scale = rhs.data.norm();
    if (scale == 0.0) return g.data.norm();
    return (g.data * a_ - rhs.data).norm() / scale;
}

double FredholmSystem::row_residual(const CMatrix& row, const DiscreteKernel& rhs, int i) const {
    const auto r = rhs.data.middleRows(static_cast<Eigen::Index>(i) * rhs.block_rows,
                                       rhs.block_rows);
    const double scale = r.norm();
    if (scale == 0.0) return row.norm();
    return (row * a_ - r).norm() / scale;
}

cplx det2(const DiscreteKernel& q) { return FredholmSystem(q).det2(); }

DiscreteKernel solve_G(const DiscreteKernel& q, const MatrixProfile& p, double x,
                       double patch_threshold, double t) {
    const FredholmSystem sys(q);
    const cplx d = sys.det2();
    if (std::abs(d) < patch_threshold) {
        std::ostringstream msg;
        msg << "poor representative coordinate patch at (x=" << x << ", t=" << t
            << "): |det2| = " << std::abs(d) << " < " << patch_threshold;
        throw PatchError(msg.str(), d, x, t);
    }
    return sys.solve(hankel_kernel(p, x, q.quad));
}

double hankel_asymmetry(const DiscreteKernel& k) {
    double worst = 0.0;
    const int n = k.quad.size();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            worst = std::max(worst, (k.block(i, j) - k.block(j, i)).cwiseAbs().maxCoeff());
    return worst;
}

} // namespace marchenko
