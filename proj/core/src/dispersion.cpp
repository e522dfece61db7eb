#include "marchenko/dispersion.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "marchenko/error.hpp"

namespace marchenko {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

cplx symbol(const DispersionParams& params, double k) {
    return generator(params, cplx(0.0, two_pi * k));
}

cplx generator(const DispersionParams& params, cplx z) {
    const cplx z2 = z * z;
    return params.mu1 * z2 + params.mu2 * z2 * z;
}

Evolver::Evolver(const MatrixProfile& p0, const DispersionParams& params)
    : initial_(p0), params_(params), spectrum_(to_spectral(p0)) {
    const int M = p0.grid.node_count;
    exponents_.resize(M);
    mode_scale_.resize(M);
    for (int slot = 0; slot < M; ++slot) {
        const cplx z(p0.weight_rate, -two_pi * p0.grid.frequency(slot));
        exponents_[slot] = generator(params, z);
        mode_scale_[slot] = spectrum_.coefficients.col(slot).cwiseAbs().maxCoeff();
        max_scale_ = std::max(max_scale_, mode_scale_[slot]);
    }
}

MatrixProfile Evolver::at(double t) const {
    if (t == 0.0 || params_.is_zero() || max_scale_ == 0.0) {
        MatrixProfile out = initial_;
        out.time = initial_.time + t;
        return out;
    }
    SpectralProfile c = spectrum_;
    double worst = -std::numeric_limits<double>::infinity();
    for (int slot = 0; slot < static_cast<int>(exponents_.size()); ++slot) {
        const cplx e = t * exponents_[slot];
        if (e.real() > 0.0 && mode_scale_[slot] <= noise_floor * max_scale_) {
            c.coefficients.col(slot).setZero();
            continue;
        }
        if (mode_scale_[slot] == 0.0) continue;
        worst = std::max(worst, e.real());
        if (e.real() > growth_limit) continue;
        c.coefficients.col(slot) *= std::exp(e);
    }
    if (worst > growth_limit) {
        std::ostringstream msg;
        msg << "spectral evolution to t=" << t << " amplifies a retained mode by e^" << worst
            << " (limit e^" << growth_limit << "); use band-limited data or a shorter horizon";
        throw GrowthError(msg.str(), worst);
    }
    c.time = initial_.time + t;
    return from_spectral(c);
}

MatrixProfile evolve(const MatrixProfile& p0, const DispersionParams& params, double t) {
    return Evolver(p0, params).at(t);
}

double dispersion_residual(std::span<const MatrixProfile> snapshots, double dt,
                           const DispersionParams& params) {
    if (snapshots.size() < 3) throw ConfigError("dispersion residual needs at least 3 snapshots");
    if (!(dt > 0.0)) throw ConfigError("snapshot spacing must be positive");
    double worst = 0.0;
    for (std::size_t n = 1; n + 1 < snapshots.size(); ++n) {
        const MatrixProfile& p = snapshots[n];
        CMatrix rhs = CMatrix::Zero(p.samples.rows(), p.samples.cols());
        if (params.mu1 != cplx{}) rhs += params.mu1 * spectral_derivative(p, 2).samples;
        if (params.mu2 != cplx{}) rhs += params.mu2 * spectral_derivative(p, 3).samples;
        const CMatrix dpdt = (snapshots[n + 1].samples - snapshots[n - 1].samples) / (2.0 * dt);
        worst = std::max(worst, (dpdt - rhs).cwiseAbs().maxCoeff());
    }
    return worst;
}

} // namespace marchenko
