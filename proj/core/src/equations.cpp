#include "marchenko/equations.hpp"

#include <array>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "marchenko/error.hpp"

namespace marchenko {

namespace {

constexpr std::array<std::pair<EquationKind, std::string_view>, 10> kEquationNames{{
    {EquationKind::kernel_nls, "kernel_nls"},
    {EquationKind::local_nls, "local_nls"},
    {EquationKind::rev_spacetime_nls, "rev_spacetime_nls"},
    {EquationKind::rev_time_nls, "rev_time_nls"},
    {EquationKind::coupled_diffusion, "coupled_diffusion"},
    {EquationKind::kernel_mkdv, "kernel_mkdv"},
    {EquationKind::local_mkdv, "local_mkdv"},
    {EquationKind::rev_spacetime_mkdv, "rev_spacetime_mkdv"},
    {EquationKind::kdv_primitive, "kdv_primitive"},
    {EquationKind::combined_degree3, "combined_degree3"},
}};

// Index of -v in a sorted grid, or -1.
int mirror_index(const std::vector<double>& grid, std::size_t i) {
    const double target = -grid[i];
    double spacing = 1.0;
    if (grid.size() > 1) spacing = std::abs(grid[1] - grid[0]);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (std::abs(grid[k] - target) <= 1e-9 * spacing) return static_cast<int>(k);
    }
    return -1;
}

std::vector<int> mirror_map(const std::vector<double>& grid) {
    std::vector<int> map(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) map[i] = mirror_index(grid, i);
    return map;
}

double uniform_step(const std::vector<double>& grid, const char* name) {
    if (grid.size() < 3) throw ConfigError(std::string("residual needs at least 3 ") + name + " samples");
    const double step = grid[1] - grid[0];
    if (!(step > 0.0)) throw ConfigError(std::string(name) + " grid must be increasing");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (std::abs(grid[i] - grid[i - 1] - step) > 1e-9 * step)
            throw ConfigError(std::string(name) + " grid must be uniform");
    }
    return step;
}

bool third_order(const EquationSpec& spec) {
    return spec.kind == EquationKind::kdv_primitive || spec.params.mu2 != cplx{};
}

// Finite-difference stencils on the (x, t) sample grid for any accessor
// value(ix, it) -> CMatrix.
template <class Value>
struct Stencil {
    const Value& value;
    double dx;
    double dt;

    CMatrix d_t(std::size_t ix, std::size_t it) const {
        return (value(ix, it + 1) - value(ix, it - 1)) / (2.0 * dt);
    }
    CMatrix d_x(std::size_t ix, std::size_t it) const {
        return (value(ix + 1, it) - value(ix - 1, it)) / (2.0 * dx);
    }
    CMatrix d_xx(std::size_t ix, std::size_t it) const {
        return (value(ix + 1, it) - 2.0 * value(ix, it) + value(ix - 1, it)) / (dx * dx);
    }
    CMatrix d_xxx(std::size_t ix, std::size_t it) const {
        return (value(ix + 2, it) - 2.0 * value(ix + 1, it) + 2.0 * value(ix - 1, it) -
                value(ix - 2, it)) /
               (2.0 * dx * dx * dx);
    }
};

template <class Value>
Stencil<Value> make_stencil(const Value& v, double dx, double dt) {
    return Stencil<Value>{v, dx, dt};
}

struct Sweep {
    double dx = 0.0;
    double dt = 0.0;
    int half_width = 1;
    std::vector<int> mirror_x;
    std::vector<int> mirror_t;
};

Sweep make_sweep(const SolutionField& field, int half_width) {
    Sweep s;
    s.dx = uniform_step(field.x, "x");
    s.dt = uniform_step(field.t, "t");
    s.half_width = half_width;
    if (field.x.size() < static_cast<std::size_t>(2 * half_width + 1))
        throw ConfigError("x grid too small for the residual stencil");
    s.mirror_x = mirror_map(field.x);
    s.mirror_t = mirror_map(field.t);
    return s;
}

bool stencil_valid(const SolutionField& field, const Sweep& s, std::size_t ix, std::size_t it) {
    const auto hw = static_cast<std::size_t>(s.half_width);
    if (ix < hw || ix + hw >= field.x.size()) return false;
    if (it < 1 || it + 1 >= field.t.size()) return false;
    for (std::size_t k = ix - hw; k <= ix + hw; ++k)
        if (!field.is_valid(k, it)) return false;
    return field.is_valid(ix, it - 1) && field.is_valid(ix, it + 1);
}

void finish(ResidualReport& report, double dx, double dt) {
    double sum = 0.0;
    for (const auto& p : report.points) {
        report.max_norm = std::max(report.max_norm, p.norm);
        sum += p.norm * p.norm;
    }
    report.l2_norm = std::sqrt(sum * dx * dt);
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Factor g~(0,0) in the closure, from a symmetry of g. Returns false if the
// reflected sample is unavailable.
bool partner_from_symmetry(CompanionKind kind, const SolutionField& field, const Sweep& s,
                           std::size_t ix, std::size_t it, CMatrix& out) {
    std::size_t jx = ix;
    std::size_t jt = it;
    if (reverses_space(kind)) {
        if (s.mirror_x[ix] < 0) throw ConfigError("x grid is not closed under x -> -x");
        jx = static_cast<std::size_t>(s.mirror_x[ix]);
    }
    if (reverses_time(kind)) {
        if (s.mirror_t[it] < 0) throw ConfigError("t grid is not closed under t -> -t");
        jt = static_cast<std::size_t>(s.mirror_t[it]);
    }
    if (!field.is_valid(jx, jt)) return false;
    const CMatrix& g = field.at(jx, jt);
    out = conjugates(kind) ? CMatrix(g.adjoint()) : CMatrix(g.transpose());
    out *= companion_sign(kind);
    return true;
}

// dg/dt - mu1 g_xx - mu2 g_xxx - 2 mu1 g g~ g - 3 mu2 (g g~ g_x + g_x g~ g)
// at a centre point, or the primitive KdV form when kdv is set.
template <class Value>
CMatrix closure_residual(const Stencil<Value>& st, const DispersionParams& prm, bool kdv,
                         std::size_t ix, std::size_t it, const CMatrix& partner) {
    const CMatrix g = st.value(ix, it);
    if (kdv) {
        const CMatrix gx = st.d_x(ix, it);
        return st.d_t(ix, it) + st.d_xxx(ix, it) - 3.0 * gx * gx;
    }
    CMatrix r = st.d_t(ix, it);
    if (prm.mu1 != cplx{}) r -= prm.mu1 * (st.d_xx(ix, it) + 2.0 * g * partner * g);
    if (prm.mu2 != cplx{}) {
        const CMatrix gx = st.d_x(ix, it);
        r -= prm.mu2 * (st.d_xxx(ix, it) + 3.0 * (g * partner * gx + gx * partner * g));
    }
    return r;
}

ResidualReport local_sweep(const EquationSpec& spec, const SolutionField& field,
                           bool use_companion_field) {
    ResidualReport report;
    if (field.center.empty()) return report;
    const bool kdv = spec.kind == EquationKind::kdv_primitive;
    if (kdv && field.rows != field.cols) throw ConfigError("kdv_primitive needs a square field");
    if (use_companion_field && !field.has_companion())
        throw ConfigError("closure residual needs the companion field");
    const Sweep s = make_sweep(field, third_order(spec) ? 2 : 1);
    auto value = [&](std::size_t ix, std::size_t it) -> const CMatrix& { return field.at(ix, it); };
    const auto st = make_stencil(value, s.dx, s.dt);
    CMatrix partner;
    for (std::size_t it = 0; it < field.t.size(); ++it) {
        for (std::size_t ix = 0; ix < field.x.size(); ++ix) {
            if (!stencil_valid(field, s, ix, it)) continue;
            if (use_companion_field) {
                partner = field.companion_center[field.index(ix, it)];
            } else if (!kdv && !partner_from_symmetry(spec.companion, field, s, ix, it, partner)) {
                continue;
            }
            const CMatrix r = closure_residual(st, spec.params, kdv, ix, it, partner);
            report.points.push_back({field.x[ix], field.t[it], max_abs(r)});
        }
    }
    finish(report, s.dx, s.dt);
    return report;
}

} // namespace

std::string_view to_string(EquationKind kind) noexcept {
    for (const auto& [k, name] : kEquationNames)
        if (k == kind) return name;
    return "unknown";
}

std::optional<EquationKind> parse_equation_kind(std::string_view name) noexcept {
    for (const auto& [k, n] : kEquationNames)
        if (n == name) return k;
    return std::nullopt;
}

ResidualReport residual_local(const EquationSpec& spec, const SolutionField& field) {
    return local_sweep(spec, field, false);
}

ResidualReport residual_closure(const EquationSpec& spec, const SolutionField& field) {
    return local_sweep(spec, field, true);
}

ResidualReport residual_kernel(const EquationSpec& spec, const SolutionField& field) {
    ResidualReport report;
    if (field.center.empty()) return report;
    if (!field.has_slices()) throw ConfigError("kernel residual needs the slices g(y,0), g(0,z)");
    const bool kdv = spec.kind == EquationKind::kdv_primitive;
    const Sweep s = make_sweep(field, third_order(spec) ? 2 : 1);
    const int n = field.rows;
    const int m = field.cols;
    const auto nodes = static_cast<int>(field.slice_nodes.size());
    const DispersionParams& prm = spec.params;

    auto center = [&](std::size_t ix, std::size_t it) -> const CMatrix& { return field.at(ix, it); };
    const auto sc = make_stencil(center, s.dx, s.dt);
    CMatrix partner;
    for (std::size_t it = 0; it < field.t.size(); ++it) {
        for (std::size_t ix = 0; ix < field.x.size(); ++ix) {
            if (!stencil_valid(field, s, ix, it)) continue;
            if (!kdv && !partner_from_symmetry(spec.companion, field, s, ix, it, partner)) continue;
            const CMatrix& g00 = field.at(ix, it);
            const CMatrix g00x = sc.d_x(ix, it);
            double worst = 0.0;
            for (int k = 0; k < nodes; ++k) {
                auto y0 = [&](std::size_t jx, std::size_t jt) -> CMatrix {
                    return field.slice_y0[field.index(jx, jt)].middleRows(
                        static_cast<Eigen::Index>(k) * n, n);
                };
                auto z0 = [&](std::size_t jx, std::size_t jt) -> CMatrix {
                    return field.slice_0z[field.index(jx, jt)].middleCols(
                        static_cast<Eigen::Index>(k) * m, m);
                };
                const auto sy = make_stencil(y0, s.dx, s.dt);
                const auto sz = make_stencil(z0, s.dx, s.dt);
                const CMatrix gy = y0(ix, it);
                const CMatrix gz = z0(ix, it);
                CMatrix ry;
                CMatrix rz;
                if (kdv) {
                    ry = sy.d_t(ix, it) + sy.d_xxx(ix, it) - 3.0 * sy.d_x(ix, it) * g00x;
                    rz = sz.d_t(ix, it) + sz.d_xxx(ix, it) - 3.0 * g00x * sz.d_x(ix, it);
                } else {
                    ry = sy.d_t(ix, it);
                    rz = sz.d_t(ix, it);
                    if (prm.mu1 != cplx{}) {
                        ry -= prm.mu1 * (sy.d_xx(ix, it) + 2.0 * gy * partner * g00);
                        rz -= prm.mu1 * (sz.d_xx(ix, it) + 2.0 * g00 * partner * gz);
                    }
                    if (prm.mu2 != cplx{}) {
                        ry -= prm.mu2 * (sy.d_xxx(ix, it) +
                                         3.0 * (gy * partner * g00x + sy.d_x(ix, it) * partner * g00));
                        rz -= prm.mu2 * (sz.d_xxx(ix, it) +
                                         3.0 * (g00 * partner * sz.d_x(ix, it) + g00x * partner * gz));
                    }
                }
                worst = std::max({worst, max_abs(ry), max_abs(rz)});
            }
            report.points.push_back({field.x[ix], field.t[it], worst});
        }
    }
    finish(report, s.dx, s.dt);
    return report;
}

ResidualReport residual_coupled(const SolutionField& field, const DispersionParams& params) {
    ResidualReport report;
    if (field.center.empty()) return report;
    if (!field.has_companion()) throw ConfigError("coupled residual needs the companion field");
    const Sweep s = make_sweep(field, 1);
    auto g = [&](std::size_t ix, std::size_t it) -> const CMatrix& { return field.at(ix, it); };
    auto gt = [&](std::size_t ix, std::size_t it) -> const CMatrix& {
        return field.companion_center[field.index(ix, it)];
    };
    const auto sg = make_stencil(g, s.dx, s.dt);
    const auto st = make_stencil(gt, s.dx, s.dt);
    const cplx mu = params.mu1;
    for (std::size_t it = 0; it < field.t.size(); ++it) {
        for (std::size_t ix = 0; ix < field.x.size(); ++ix) {
            if (!stencil_valid(field, s, ix, it)) continue;
            const CMatrix& a = g(ix, it);
            const CMatrix& b = gt(ix, it);
            const CMatrix r1 = sg.d_t(ix, it) - mu * (sg.d_xx(ix, it) + 2.0 * a * b * a);
            const CMatrix r2 = st.d_t(ix, it) + mu * (st.d_xx(ix, it) + 2.0 * b * a * b);
            report.points.push_back({field.x[ix], field.t[it], std::max(max_abs(r1), max_abs(r2))});
        }
    }
    finish(report, s.dx, s.dt);
    return report;
}

MiuraReport miura_check(const MatrixProfile& p0, const QuadratureGrid& quad,
                        std::span<const double> x, std::span<const double> t) {
    if (p0.rows != p0.cols) throw ConfigError("Miura check needs square data");
    double asym = 0.0;
    for (int i = 0; i < p0.size(); ++i) {
        const auto s = p0.at_index(i);
        asym = std::max(asym, (s - s.transpose()).cwiseAbs().maxCoeff());
    }
    const double scale = p0.samples.size() ? p0.samples.cwiseAbs().maxCoeff() : 0.0;
    if (asym > 1e-14 * std::max(scale, 1.0)) throw ConfigError("Miura check needs symmetric data");

    const DispersionParams kdv_params{0.0, -1.0};
    const Evolver evolver(p0, kdv_params);
    MiuraReport out;
    for (SolutionField* f : {&out.mkdv, &out.kdv}) {
        f->x.assign(x.begin(), x.end());
        f->t.assign(t.begin(), t.end());
        f->rows = p0.rows;
        f->cols = p0.cols;
        f->center.resize(x.size() * t.size());
        f->valid.assign(x.size() * t.size(), 1);
    }
    const int origin = quad.origin();
    for (std::size_t it = 0; it < t.size(); ++it) {
        const MatrixProfile p = evolver.at(t[it]);
        const MatrixProfile pt = companion_profile(p, CompanionKind::neg_transpose);
        for (std::size_t ix = 0; ix < x.size(); ++ix) {
            const DiscreteKernel rhs = hankel_kernel(p, x[ix], quad);
            const FredholmSystem mkdv(assemble_Q(p, pt, x[ix], quad));
            const FredholmSystem kdv(kdv_Q(p, x[ix], quad));
            const std::size_t idx = out.mkdv.index(ix, it);
            out.mkdv.center[idx] = mkdv.solve_row(rhs, origin).middleCols(
                static_cast<Eigen::Index>(origin) * p.cols, p.cols);
            out.kdv.center[idx] = kdv.solve_row(rhs, origin).middleCols(
                static_cast<Eigen::Index>(origin) * p.cols, p.cols);
        }
    }

    const double dx = uniform_step(out.mkdv.x, "x");
    auto vm = [&](std::size_t ix, std::size_t it) -> const CMatrix& { return out.mkdv.at(ix, it); };
    auto vk = [&](std::size_t ix, std::size_t it) -> const CMatrix& { return out.kdv.at(ix, it); };
    const auto sm = make_stencil(vm, dx, 1.0);
    const auto sk = make_stencil(vk, dx, 1.0);
    for (std::size_t it = 0; it < t.size(); ++it) {
        for (std::size_t ix = 1; ix + 1 < x.size(); ++ix) {
            const CMatrix& v = vm(ix, it);
            const CMatrix e = sk.d_x(ix, it) - sm.d_x(ix, it) - v * v;
            out.error.points.push_back({x[ix], t[it], max_abs(e)});
        }
    }
    const double dt = t.size() > 1 ? std::abs(t[1] - t[0]) : 1.0;
    finish(out.error, dx, dt);
    return out;
}

ProductRuleReport product_rule_check(const KernelFunction& f, const HankelFunction& h,
                                     const HankelFunction& h_prime, const KernelFunction& f_prime,
                                     double x, const QuadratureGrid& quad, double dx) {
    const int nq = quad.size();
    const auto& xi = quad.nodes;

    // Block matrix of a two-argument kernel over node pairs.
    auto kernel_blocks = [&](const std::function<CMatrix(int, int)>& value) {
        const CMatrix first = value(0, 0);
        const auto br = first.rows();
        const auto bc = first.cols();
        CMatrix out(nq * br, nq * bc);
        for (int i = 0; i < nq; ++i)
            for (int j = 0; j < nq; ++j) out.block(i * br, j * bc, br, bc) = value(i, j);
        return out;
    };
    // Right multiplication by the weights: scale block column k by w_k.
    auto weigh_cols = [&](CMatrix m, Eigen::Index block) {
        for (int k = 0; k < nq; ++k) m.middleCols(k * block, block) *= quad.weights[k];
        return m;
    };

    const CMatrix fm = kernel_blocks([&](int i, int j) { return f(xi[i], xi[j]); });
    const CMatrix fpm = kernel_blocks([&](int i, int j) { return f_prime(xi[i], xi[j]); });
    auto hh = [&](double at) {
        const CMatrix hm = kernel_blocks([&](int i, int j) { return h(xi[i] + xi[j] + at); });
        const CMatrix hpm = kernel_blocks([&](int i, int j) { return h_prime(xi[i] + xi[j] + at); });
        const Eigen::Index hb = hm.cols() / nq;
        return CMatrix(weigh_cols(hm, hb) * hpm);
    };
    const CMatrix dhh = (hh(x + dx) - hh(x - dx)) / (2.0 * dx);

    const Eigen::Index fb = fm.cols() / nq;
    const Eigen::Index db = dhh.cols() / nq;
    ProductRuleReport out;
    out.lhs = weigh_cols(weigh_cols(fm, fb) * dhh, db) * fpm;

    const CMatrix hm = kernel_blocks([&](int i, int j) { return h(xi[i] + xi[j] + x); });
    const CMatrix hpm = kernel_blocks([&](int i, int j) { return h_prime(xi[i] + xi[j] + x); });
    const Eigen::Index hb = hm.cols() / nq;
    const Eigen::Index hpb = hpm.cols() / nq;
    const CMatrix fh = weigh_cols(fm, fb) * hm;    // [FH](xi_i, xi_j)
    const CMatrix hf = weigh_cols(hpm, hpb) * fpm; // [H'F'](xi_i, xi_j)
    const int o = quad.origin();
    const CMatrix fh_col = fh.middleCols(o * hb, hb);                   // [FH](., 0)
    const Eigen::Index hf_rows = hf.rows() / nq;
    const CMatrix hf_row = hf.middleRows(o * hf_rows, hf_rows);         // [H'F'](0, .)
    out.rhs = fh_col * hf_row;
    out.error = max_abs(out.lhs - out.rhs);
    return out;
}

namespace {

CMatrix weighted_operator(const DiscreteKernel& q) {
    CMatrix f = q.data;
    for (int k = 0; k < q.quad.size(); ++k)
        f.middleRows(static_cast<Eigen::Index>(k) * q.block_rows, q.block_rows) *= q.quad.weights[k];
    return f;
}

CMatrix resolvent(const CMatrix& f) {
    const CMatrix a = CMatrix::Identity(f.rows(), f.cols()) + f;
    Eigen::PartialPivLU<CMatrix> lu(a);
    if (lu.rcond() < 1e-14) throw Error("id + Q is singular");
    return lu.inverse();
}

} // namespace

UIdentityReport u_identity_check(const DiscreteKernel& q) {
    if (q.block_rows != q.block_cols) throw ConfigError("U-identities need square blocks");
    const CMatrix f = weighted_operator(q);
    const CMatrix u = resolvent(f);
    const CMatrix id = CMatrix::Identity(f.rows(), f.cols());
    UIdentityReport r;
    r.left_error = max_abs((id - u) - u * f);
    r.right_error = max_abs((id - u) - f * u);
    return r;
}

UIdentityReport u_identity_check(const std::function<DiscreteKernel(double)>& q_of_x, double x,
                                 double dx) {
    UIdentityReport r = u_identity_check(q_of_x(x));
    const CMatrix f = weighted_operator(q_of_x(x));
    const CMatrix fp = weighted_operator(q_of_x(x + dx));
    const CMatrix fm = weighted_operator(q_of_x(x - dx));
    const CMatrix u = resolvent(f);
    const CMatrix ux = (resolvent(fp) - resolvent(fm)) / (2.0 * dx);
    const CMatrix fx = (fp - fm) / (2.0 * dx);
    r.derivative_error = max_abs(ux + u * fx * u);
    return r;
}

} // namespace marchenko
