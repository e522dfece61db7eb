#include "marchenko/solution.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/tools/toms748_solve.hpp>

#include "marchenko/error.hpp"

namespace marchenko {

namespace {

struct TimeSlice {
    MatrixProfile p;
    MatrixProfile p_tilde; // empty (0 columns) for neg_identity
};

class Pipeline {
public:
    explicit Pipeline(const Scenario& s)
        : scenario_(s),
          grid_(s.master()),
          quad_(s.quadrature()),
          evolver_(sample_profile(s.initial, grid_, s.rows, s.cols), s.equation.params) {}

    TimeSlice slice(double t) const {
        TimeSlice ts;
        ts.p = evolver_.at(t);
        const CompanionKind kind = scenario_.equation.companion;
        if (kind != CompanionKind::neg_identity)
            ts.p_tilde = companion_profile(reverses_time(kind) ? evolver_.at(-t) : ts.p, kind);
        return ts;
    }

    DiscreteKernel q(const TimeSlice& ts, double x) const {
        if (scenario_.equation.companion == CompanionKind::neg_identity) return kdv_Q(ts.p, x, quad_);
        return assemble_Q(ts.p, ts.p_tilde, x, quad_);
    }

    cplx det2_at(double x, double t) const { return det2(q(slice(t), x)); }

    const QuadratureGrid& quad() const noexcept { return quad_; }

private:
    const Scenario& scenario_;
    MasterGrid grid_;
    QuadratureGrid quad_;
    Evolver evolver_;
};

struct SampleOut {
    cplx det2{};
    bool valid = false;
    double residual = 0.0;
};

// Runs body(i) for i in [0, count) on up to `threads` workers.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

bool real_valued(cplx z) { return std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z)); }

} // namespace

SolutionResult evaluate_solution(const Scenario& scenario, int threads) {
    validate(scenario);
    const Pipeline pipe(scenario);
    const QuadratureGrid& quad = pipe.quad();
    const int origin = quad.origin();
    const int n = scenario.rows;
    const int m = scenario.cols;
    const std::size_t nx = scenario.x.size();
    const std::size_t nt = scenario.t.size();
    const bool with_companion =
        scenario.needs_companion_field() && scenario.equation.companion != CompanionKind::neg_identity;

    SolutionResult out;
    out.warnings = scenario_warnings(scenario);
    if (scenario.needs_companion_field() && !with_companion)
        out.warnings.push_back("companion field is not defined for neg_identity; not computed");

    SolutionField& f = out.field;
    f.x = scenario.x;
    f.t = scenario.t;
    f.rows = n;
    f.cols = m;
    f.center.assign(nx * nt, CMatrix::Zero(n, m));
    f.valid.assign(nx * nt, 0);
    if (scenario.outputs.slices) {
        f.slice_nodes = quad.nodes;
        f.slice_y0.assign(nx * nt, CMatrix());
        f.slice_0z.assign(nx * nt, CMatrix());
    }
    if (with_companion) f.companion_center.assign(nx * nt, CMatrix::Zero(m, n));

    std::vector<TimeSlice> slices(nt);
    parallel_for(nt, threads, [&](std::size_t it) { slices[it] = pipe.slice(scenario.t[it]); });

    std::vector<SampleOut> samples(nx * nt);
    const double threshold = scenario.tolerances.patch_threshold;
    parallel_for(nx * nt, threads, [&](std::size_t idx) {
        const std::size_t ix = idx % nx;
        const std::size_t it = idx / nx;
        const double x = scenario.x[ix];
        const TimeSlice& ts = slices[it];
        const DiscreteKernel rhs = hankel_kernel(ts.p, x, quad);
        const FredholmSystem sys(pipe.q(ts, x));
        SampleOut& so = samples[idx];
        so.det2 = sys.det2();
        if (!(std::abs(so.det2) >= threshold)) return;
        const CMatrix row = sys.solve_row(rhs, origin);
        so.residual = sys.row_residual(row, rhs, origin);
        f.center[idx] = row.middleCols(static_cast<Eigen::Index>(origin) * m, m);
        if (scenario.outputs.slices) {
            f.slice_0z[idx] = row;
            f.slice_y0[idx] = sys.solve_column(rhs, origin);
        }
        if (with_companion) {
            const DiscreteKernel rhs_t = hankel_kernel(ts.p_tilde, x, quad);
            const FredholmSystem sys_t(assemble_Q(ts.p_tilde, ts.p, x, quad));
            if (std::abs(sys_t.det2()) >= threshold) {
                const CMatrix row_t = sys_t.solve_row(rhs_t, origin);
                so.residual = std::max(so.residual, sys_t.row_residual(row_t, rhs_t, origin));
                f.companion_center[idx] = row_t.middleCols(static_cast<Eigen::Index>(origin) * n, n);
            } else {
                return; // companion patch failure invalidates the sample too
            }
        }
        so.valid = true;
    });

    PatchReport& patch = out.patch;
    patch.threshold = threshold;
    patch.det2.resize(nx * nt);
    patch.min_modulus = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < samples.size(); ++idx) {
        const SampleOut& so = samples[idx];
        patch.det2[idx] = so.det2;
        patch.min_modulus = std::min(patch.min_modulus, std::abs(so.det2));
        f.valid[idx] = so.valid ? 1 : 0;
        if (!so.valid) {
            ++out.skipped;
            patch.events.push_back({scenario.x[idx % nx], scenario.t[idx / nx], so.det2, false});
        }
        out.solver_residual = std::max(out.solver_residual, so.residual);
    }
    if (out.solver_residual > scenario.tolerances.solver) {
        std::ostringstream os;
        os << "Nystrom backward error " << out.solver_residual << " exceeds solver tolerance "
           << scenario.tolerances.solver;
        out.warnings.push_back(os.str());
    }

    // Sign changes of a real det2 between t samples at fixed x.
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t it = 0; it + 1 < nt; ++it) {
            const cplx a = patch.det2[it * nx + ix];
            const cplx b = patch.det2[(it + 1) * nx + ix];
            if (!real_valued(a) || !real_valued(b)) continue;
            if (!samples[it * nx + ix].valid || !samples[(it + 1) * nx + ix].valid) continue;
            if (!(a.real() * b.real() < 0.0)) continue;
            const double x = scenario.x[ix];
            auto fn = [&](double t) { return pipe.det2_at(x, t).real(); };
            std::uintmax_t iters = 64;
            const auto [lo, hi] = boost::math::tools::toms748_solve(
                fn, scenario.t[it], scenario.t[it + 1], a.real(), b.real(),
                boost::math::tools::eps_tolerance<double>(52), iters);
            const double t_root = 0.5 * (lo + hi);
            const TimeSlice ts = pipe.slice(t_root);
            try {
                solve_G(pipe.q(ts, x), ts.p, x, threshold, t_root);
                std::ostringstream os;
                os << "det2 changes sign between t = " << scenario.t[it] << " and "
                   << scenario.t[it + 1] << " at x = " << x << " but stays above threshold";
                out.warnings.push_back(os.str());
            } catch (const PatchError& e) {
                patch.events.push_back({e.x(), e.t(), e.det2(), true});
                patch.min_modulus = std::min(patch.min_modulus, std::abs(e.det2()));
            }
        }
    }
    patch.flagged = !patch.events.empty();
    return out;
}

std::optional<cplx> rank_one_reference(const Scenario& s, double x, double t) {
    if (s.rows != 1 || s.cols != 1 || s.initial.terms.size() != 1) return std::nullopt;
    const auto* e = std::get_if<ExponentialTerm>(&s.initial.terms.front());
    if (!e) return std::nullopt;
    const CompanionKind kind = s.equation.companion;
    if (reverses_space(kind)) return std::nullopt;
    const double a = e->rate;
    const cplx amp = e->amplitude(0, 0);
    const cplx d = generator(s.equation.params, cplx{a, 0.0});
    const cplx at = amp * std::exp(d * t);
    const cplx ex = std::exp(cplx{a * x, 0.0});
    if (kind == CompanionKind::neg_identity) return at * ex / (1.0 - at * ex / (2.0 * a));
    const cplx src = reverses_time(kind) ? amp * std::exp(-d * t) : at;
    const cplx b = companion_sign(kind) * (conjugates(kind) ? std::conj(src) : src);
    return at * ex / (1.0 + at * b * ex * ex / (4.0 * a * a));
}

} // namespace marchenko
