#include "marchenko/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "marchenko/error.hpp"

namespace marchenko {

std::optional<int> MasterGrid::index_of(double s) const noexcept {
    const double h = spacing();
    const double pos = (s + half_width) / h;
    const double rounded = std::round(pos);
    if (std::abs(pos - rounded) > 1e-9) return std::nullopt;
    if (rounded < 0.0 || rounded > node_count - 1) return std::nullopt;
    return static_cast<int>(rounded);
}

int MasterGrid::checked_index(double s) const {
    if (auto i = index_of(s)) return *i;
    std::ostringstream msg;
    if (s < -half_width || s >= half_width) {
        msg << "point s=" << s << " lies outside the master domain [" << -half_width << ", "
            << half_width << ")";
    } else {
        msg << "point s=" << s << " is not a master-grid node (spacing " << spacing()
            << "); grids are incommensurate";
    }
    throw DomainError(msg.str());
}

MasterGrid make_uniform_grid(double half_width, int node_count) {
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw ConfigError("master grid half-width must be positive");
    if (node_count < 4 || node_count % 2 != 0)
        throw ConfigError("master grid node count must be an even integer >= 4");
    return MasterGrid{half_width, node_count};
}

MatrixProfile::MatrixProfile(const MasterGrid& g, int n, int m, double weight, double t)
    : grid(g), rows(n), cols(m), weight_rate(weight), time(t),
      samples(CMatrix::Zero(static_cast<Eigen::Index>(n) * m, g.node_count)) {}

namespace {

// (-1)^k for the wavenumber held in spectral slot j.
double parity(int slot, int M) { return ((slot - M / 2) % 2 == 0) ? 1.0 : -1.0; }

int fft_index(int slot, int M) { return (slot - M / 2 + M) % M; }

} // namespace

SpectralProfile to_spectral(const MatrixProfile& p) {
    const int M = p.size();
    SpectralProfile out{p.grid, p.rows, p.cols, p.weight_rate, p.time,
                        CMatrix::Zero(p.samples.rows(), M)};
    Eigen::FFT<double> fft;
    std::vector<cplx> in(M), freq(M);
    for (Eigen::Index e = 0; e < p.samples.rows(); ++e) {
        for (int i = 0; i < M; ++i) {
            cplx v = p.samples(e, i);
            if (p.weight_rate != 0.0) v *= std::exp(-p.weight_rate * p.grid.node(i));
            in[i] = v;
        }
        fft.inv(freq, in); // (1/M) sum_j r_j e^{+2 pi i jk/M}
        for (int slot = 0; slot < M; ++slot)
            out.coefficients(e, slot) = parity(slot, M) * freq[fft_index(slot, M)];
    }
    return out;
}

MatrixProfile from_spectral(const SpectralProfile& c) {
    const int M = c.grid.node_count;
    MatrixProfile out(c.grid, c.rows, c.cols, c.weight_rate, c.time);
    Eigen::FFT<double> fft;
    std::vector<cplx> freq(M), vals(M);
    for (Eigen::Index e = 0; e < c.coefficients.rows(); ++e) {
        for (int slot = 0; slot < M; ++slot)
            freq[fft_index(slot, M)] = parity(slot, M) * c.coefficients(e, slot);
        fft.fwd(vals, freq); // sum_k z_k e^{-2 pi i jk/M}
        for (int i = 0; i < M; ++i) {
            cplx v = vals[i];
            if (c.weight_rate != 0.0) v *= std::exp(c.weight_rate * c.grid.node(i));
            out.samples(e, i) = v;
        }
    }
    return out;
}

CMatrix eval_at(const MatrixProfile& p, double s) {
    return p.at_index(p.grid.checked_index(s));
}

double boundary_decay_ratio(const MatrixProfile& p) {
    double overall = 0.0;
    double outer = 0.0;
    const double edge = 0.95 * p.grid.half_width;
    for (int i = 0; i < p.size(); ++i) {
        const double v = p.samples.col(i).cwiseAbs().maxCoeff();
        overall = std::max(overall, v);
        if (std::abs(p.grid.node(i)) >= edge) outer = std::max(outer, v);
    }
    return overall == 0.0 ? 0.0 : outer / overall;
}

MatrixProfile spectral_derivative(const MatrixProfile& p, int order) {
    if (order < 0) throw ConfigError("derivative order must be non-negative");
    if (order == 0) return p;
    SpectralProfile c = to_spectral(p);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int slot = 0; slot < c.grid.node_count; ++slot) {
        const cplx z(c.weight_rate, -two_pi * c.grid.frequency(slot));
        c.coefficients.col(slot) *= std::pow(z, order);
    }
    return from_spectral(c);
}

namespace {

void check_amplitude(const CMatrix& a, int rows, int cols, const char* what) {
    if (a.rows() != rows || a.cols() != cols) {
        std::ostringstream msg;
        msg << what << " amplitude is " << a.rows() << "x" << a.cols() << " but the profile is "
            << rows << "x" << cols;
        throw ConfigError(msg.str());
    }
}

void add_sample(MatrixProfile& p, int i, const CMatrix& value) {
    p.at_index(i) += value;
}

} // namespace

MatrixProfile sample_profile(const InitialDataSpec& spec, const MasterGrid& grid, int rows, int cols) {
    if (rows < 1 || cols < 1) throw ConfigError("matrix dimensions must be positive");

    std::optional<double> weight;
    for (const auto& term : spec.terms) {
        if (const auto* e = std::get_if<ExponentialTerm>(&term)) {
            if (weight && *weight != e->rate)
                throw ConfigError("exponential terms must share a single rate");
            weight = e->rate;
        }
    }

    MatrixProfile p(grid, rows, cols, weight.value_or(0.0), 0.0);
    for (const auto& term : spec.terms) {
        std::visit(
            [&](const auto& t) {
                using T = std::decay_t<decltype(t)>;
                if constexpr (std::is_same_v<T, GaussianTerm>) {
                    check_amplitude(t.amplitude, rows, cols, "gaussian");
                    if (!(t.width > 0.0)) throw ConfigError("gaussian width must be positive");
                    for (int i = 0; i < grid.node_count; ++i) {
                        const double u = (grid.node(i) - t.center) / t.width;
                        add_sample(p, i, t.amplitude * std::exp(-0.5 * u * u));
                    }
                } else if constexpr (std::is_same_v<T, ExponentialTerm>) {
                    check_amplitude(t.amplitude, rows, cols, "exponential");
                    if (!(t.rate > 0.0)) throw ConfigError("exponential rate must be positive");
                    for (int i = 0; i < grid.node_count; ++i)
                        add_sample(p, i, t.amplitude * std::exp(t.rate * grid.node(i)));
                } else if constexpr (std::is_same_v<T, ExponentialStepTerm>) {
                    check_amplitude(t.amplitude, rows, cols, "exponential_step");
                    if (!(t.rate > 0.0)) throw ConfigError("exponential_step rate must be positive");
                    for (int i = 0; i < grid.node_count; ++i) {
                        const double s = grid.node(i);
                        if (s <= 0.0) add_sample(p, i, t.amplitude * std::exp(t.rate * s));
                    }
                } else {
                    if (t.values.rows() != static_cast<Eigen::Index>(rows) * cols ||
                        t.values.cols() != grid.node_count)
                        throw ConfigError("tabulated values do not match the grid and dimensions");
                    p.samples += t.values;
                }
            },
            term);
    }
    if (!p.samples.allFinite()) throw ConfigError("initial data produced non-finite samples");
    return p;
}

} // namespace marchenko
