#include "marchenko/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "marchenko/error.hpp"

namespace marchenko {

namespace {

using json = nlohmann::ordered_json;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string entry_name(int i, int j) { return "g" + std::to_string(i + 1) + std::to_string(j + 1); }

void write_matrix(std::ostream& os, const CMatrix& g) {
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            os << '\t' << num(g(i, j).real()) << '\t' << num(g(i, j).imag());
}

void matrix_header(std::ostream& os, int rows, int cols, const std::string& prefix = "") {
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const std::string e = prefix + entry_name(i, j);
            os << "\tre_" << e << "\tim_" << e;
        }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

bool is_kernel_kind(EquationKind k) {
    return k == EquationKind::kernel_nls || k == EquationKind::kernel_mkdv;
}

} // namespace

std::string_view version() noexcept { return MARCHENKO_VERSION; }

std::vector<NamedResidual> residual_suite(const Scenario& s, const SolutionResult& r) {
    std::vector<NamedResidual> out;
    auto attempt = [&](const std::string& name, auto&& compute) {
        NamedResidual nr;
        nr.name = name;
        try {
            nr.report = compute();
            nr.evaluated = !nr.report.points.empty();
            if (!nr.evaluated) nr.note = "no sample carries the stencil";
        } catch (const ConfigError& e) {
            nr.note = e.what();
        }
        out.push_back(std::move(nr));
    };
    const EquationSpec& spec = s.equation;
    const SolutionField& f = r.field;
    if (spec.kind == EquationKind::coupled_diffusion) {
        attempt("coupled", [&] { return residual_coupled(f, spec.params); });
        return out;
    }
    if (is_kernel_kind(spec.kind) && f.has_slices())
        attempt("kernel", [&] { return residual_kernel(spec, f); });
    attempt("local", [&] { return residual_local(spec, f); });
    if (f.has_companion() && spec.kind != EquationKind::kdv_primitive)
        attempt("closure", [&] { return residual_closure(spec, f); });
    return out;
}

RunSummary run(const Scenario& s, const std::filesystem::path& out_dir, int threads) {
    const auto start = std::chrono::steady_clock::now();
    RunSummary summary;
    summary.result = evaluate_solution(s, threads);
    const auto solved = std::chrono::steady_clock::now();
    summary.residuals = residual_suite(s, summary.result);
    const auto checked = std::chrono::steady_clock::now();

    const SolutionResult& r = summary.result;
    const SolutionField& f = r.field;
    std::filesystem::create_directories(out_dir);
    const std::size_t nx = f.x.size();

    {
        const auto path = out_dir / "center.tsv";
        auto os = open_out(path);
        os << "x\tt\tvalid";
        matrix_header(os, f.rows, f.cols);
        os << '\n';
        for (std::size_t it = 0; it < f.t.size(); ++it)
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const std::size_t idx = f.index(ix, it);
                os << num(f.x[ix]) << '\t' << num(f.t[it]) << '\t' << int(f.valid[idx]);
                write_matrix(os, f.center[idx]);
                os << '\n';
            }
        summary.files.push_back(path);
    }
    {
        const auto path = out_dir / "det2.tsv";
        auto os = open_out(path);
        os << "x\tt\tre_det2\tim_det2\tabs_det2\n";
        for (std::size_t it = 0; it < f.t.size(); ++it)
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const cplx d = r.patch.det2[f.index(ix, it)];
                os << num(f.x[ix]) << '\t' << num(f.t[it]) << '\t' << num(d.real()) << '\t'
                   << num(d.imag()) << '\t' << num(std::abs(d)) << '\n';
            }
        summary.files.push_back(path);
    }
    {
        const auto path = out_dir / "residuals.tsv";
        auto os = open_out(path);
        os << "equation\tresidual\tmax\tl2\tpoints\n";
        for (const auto& nr : summary.residuals) {
            os << to_string(s.equation.kind) << '\t' << nr.name << '\t';
            if (nr.evaluated)
                os << num(nr.report.max_norm) << '\t' << num(nr.report.l2_norm) << '\t'
                   << nr.report.points.size() << '\n';
            else
                os << "nan\tnan\t0\n";
        }
        summary.files.push_back(path);
    }
    if (f.has_slices()) {
        const auto path = out_dir / "slices.tsv";
        auto os = open_out(path);
        os << "x\tt\tslice\tnode";
        matrix_header(os, f.rows, f.cols);
        os << '\n';
        const auto nodes = static_cast<Eigen::Index>(f.slice_nodes.size());
        for (std::size_t it = 0; it < f.t.size(); ++it)
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const std::size_t idx = f.index(ix, it);
                if (!f.valid[idx]) continue;
                for (Eigen::Index k = 0; k < nodes; ++k) {
                    os << num(f.x[ix]) << '\t' << num(f.t[it]) << "\ty0\t" << num(f.slice_nodes[k]);
                    write_matrix(os, f.slice_y0[idx].middleRows(k * f.rows, f.rows));
                    os << '\n';
                }
                for (Eigen::Index k = 0; k < nodes; ++k) {
                    os << num(f.x[ix]) << '\t' << num(f.t[it]) << "\t0z\t" << num(f.slice_nodes[k]);
                    write_matrix(os, f.slice_0z[idx].middleCols(k * f.cols, f.cols));
                    os << '\n';
                }
            }
        summary.files.push_back(path);
    }
    if (f.has_companion()) {
        const auto path = out_dir / "companion.tsv";
        auto os = open_out(path);
        os << "x\tt\tvalid";
        matrix_header(os, f.cols, f.rows);
        os << '\n';
        for (std::size_t it = 0; it < f.t.size(); ++it)
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const std::size_t idx = f.index(ix, it);
                os << num(f.x[ix]) << '\t' << num(f.t[it]) << '\t' << int(f.valid[idx]);
                write_matrix(os, f.companion_center[idx]);
                os << '\n';
            }
        summary.files.push_back(path);
    }

    summary.exit_code = r.patch.flagged ? exit_patch : exit_clean;

    json m;
    m["tool"] = "marchenko";
    m["version"] = std::string(version());
    m["scenario"] = {
        {"name", s.name},
        {"equation", std::string(to_string(s.equation.kind))},
        {"companion", std::string(to_string(s.equation.companion))},
        {"mu1", complex_json(s.equation.params.mu1)},
        {"mu2", complex_json(s.equation.params.mu2)},
        {"dims", json::array({s.rows, s.cols})},
        {"master", {{"half_width", s.half_width}, {"nodes", s.node_count}}},
        {"quadrature", {{"truncation", s.truncation}, {"intervals", s.intervals}}},
        {"samples", {{"x", s.x}, {"t", s.t}}},
        {"source", s.source},
    };
    m["tolerances"] = {
        {"decay", s.tolerances.decay},
        {"patch_threshold", s.tolerances.patch_threshold},
        {"solver", s.tolerances.solver},
        {"residual", s.tolerances.residual},
        {"max_dense", s.tolerances.max_dense},
    };
    m["threads"] = threads;
    json events = json::array();
    for (const auto& e : r.patch.events)
        events.push_back({{"x", e.x}, {"t", e.t}, {"det2", complex_json(e.det2)}, {"located", e.located}});
    m["patch"] = {
        {"min_abs_det2", r.patch.min_modulus},
        {"flagged", r.patch.flagged},
        {"skipped_samples", r.skipped},
        {"events", events},
    };
    m["solver_backward_error"] = r.solver_residual;
    json res = json::object();
    for (const auto& nr : summary.residuals) {
        if (nr.evaluated)
            res[nr.name] = {{"max", nr.report.max_norm}, {"l2", nr.report.l2_norm},
                            {"points", nr.report.points.size()}};
        else
            res[nr.name] = {{"skipped", nr.note}};
    }
    m["residuals"] = res;
    m["warnings"] = r.warnings;
    using ms = std::chrono::duration<double, std::milli>;
    m["timings_ms"] = {{"solve", ms(solved - start).count()}, {"residuals", ms(checked - solved).count()}};
    json files = json::array();
    for (const auto& p : summary.files) files.push_back(p.filename().string());
    m["files"] = files;
    m["exit_code"] = summary.exit_code;
    {
        const auto path = out_dir / "manifest.json";
        auto os = open_out(path);
        os << m.dump(2) << '\n';
        summary.files.push_back(path);
    }
    return summary;
}

Scenario refine(const Scenario& s, int level) {
    if (level < 0) throw ConfigError("refinement level must be non-negative");
    Scenario out = s;
    const int factor = 1 << level;
    out.intervals = s.intervals * factor;
    auto refine_samples = [&](const std::vector<double>& v) {
        if (v.size() < 2) return v;
        return uniform_samples(v.front(), v.back(), static_cast<int>(v.size() - 1) * factor + 1);
    };
    out.x = refine_samples(s.x);
    out.t = refine_samples(s.t);
    auto commensurate = [&](int nodes) {
        const double hx = 2.0 * out.half_width / nodes;
        auto multiple = [&](double v) {
            const double k = v / hx;
            return std::abs(k - std::round(k)) <= 1e-9 && std::round(k) >= 1.0;
        };
        bool ok = multiple(out.truncation / out.intervals);
        if (out.x.size() > 1) ok = ok && multiple(out.x[1] - out.x[0]);
        return ok;
    };
    int nodes = s.node_count;
    while (!commensurate(nodes)) {
        if (nodes > (1 << 22)) throw ConfigError("cannot refine the master grid commensurately");
        nodes *= 2;
    }
    out.node_count = nodes;
    return out;
}

StudyReport convergence_study(const Scenario& s, int levels, int threads) {
    if (levels < 3) throw ConfigError("a convergence study needs at least 3 levels");
    StudyReport report;
    const bool reference = rank_one_reference(s, s.x.front(), s.t.front()).has_value();
    report.metric = reference ? "reference" : "";

    Scenario base = s;
    if (is_kernel_kind(s.equation.kind)) base.outputs.slices = true;
    if (s.equation.kind == EquationKind::coupled_diffusion) base.outputs.companion = true;

    // Probe points: level-0 samples (reference) or level-0 residual points.
    std::vector<std::pair<double, double>> probes;
    for (int level = 0; level < levels; ++level) {
        const Scenario sl = refine(base, level);
        validate(sl);
        const SolutionResult r = evaluate_solution(sl, threads);
        report.skipped += r.skipped;
        StudyLevel row;
        row.level = level;
        row.intervals = sl.intervals;
        row.node_count = sl.node_count;
        row.dx = sl.x.size() > 1 ? sl.x[1] - sl.x[0] : 0.0;
        row.dt = sl.t.size() > 1 ? sl.t[1] - sl.t[0] : 0.0;

        if (reference) {
            const int factor = 1 << level;
            for (std::size_t it = 0; it < s.t.size(); ++it)
                for (std::size_t ix = 0; ix < s.x.size(); ++ix) {
                    const std::size_t jx = s.x.size() > 1 ? ix * factor : 0;
                    const std::size_t jt = s.t.size() > 1 ? it * factor : 0;
                    if (!r.field.is_valid(jx, jt)) continue;
                    const cplx ref = *rank_one_reference(sl, sl.x[jx], sl.t[jt]);
                    row.metric = std::max(row.metric, std::abs(r.field.at(jx, jt)(0, 0) - ref));
                }
        } else {
            const auto suite = residual_suite(sl, r);
            const NamedResidual* primary = nullptr;
            for (const auto& nr : suite)
                if (nr.evaluated) {
                    primary = &nr;
                    break;
                }
            if (!primary) throw ConfigError("no residual can be evaluated on the level-" +
                                            std::to_string(level) + " grid");
            report.metric = primary->name;
            if (level == 0)
                for (const auto& p : primary->report.points) probes.emplace_back(p.x, p.t);
            const double tol = 1e-9 * std::max(row.dx, row.dt);
            for (const auto& p : primary->report.points)
                for (const auto& [px, pt] : probes)
                    if (std::abs(p.x - px) <= tol && std::abs(p.t - pt) <= tol)
                        row.metric = std::max(row.metric, p.norm);
        }
        report.levels.push_back(row);
    }
    for (std::size_t l = 1; l < report.levels.size(); ++l) {
        const double prev = report.levels[l - 1].metric;
        const double cur = report.levels[l].metric;
        report.ratios.push_back(cur > 0.0 ? prev / cur : std::numeric_limits<double>::infinity());
    }
    // Least-squares slope of -log2(metric) against level.
    double sl = 0, sm = 0, sll = 0, slm = 0;
    int count = 0;
    for (const auto& row : report.levels) {
        if (!(row.metric > 0.0)) continue;
        const double y = -std::log2(row.metric);
        sl += row.level;
        sm += y;
        sll += double(row.level) * row.level;
        slm += row.level * y;
        ++count;
    }
    const double denom = count * sll - sl * sl;
    report.fitted_order = (count >= 2 && denom != 0.0) ? (count * slm - sl * sm) / denom : 0.0;
    return report;
}

void print_study(std::ostream& os, const StudyReport& r) {
    os << "metric: " << r.metric << '\n';
    os << "level\tintervals\tnodes\tdx\tdt\tmetric\tratio\n";
    for (std::size_t l = 0; l < r.levels.size(); ++l) {
        const auto& row = r.levels[l];
        os << row.level << '\t' << row.intervals << '\t' << row.node_count << '\t' << num(row.dx) << '\t'
           << num(row.dt) << '\t' << num(row.metric) << '\t' << (l ? num(r.ratios[l - 1]) : "-") << '\n';
    }
    os << "fitted order: " << num(r.fitted_order) << '\n';
    if (r.skipped) os << "patch-skipped samples: " << r.skipped << '\n';
}

VerifyReport verify(const Scenario& s, int threads) {
    VerifyReport report;
    auto add = [&](std::string name, double value, double tol, bool informational = false) {
        report.checks.push_back({std::move(name), value, tol, informational || value <= tol, informational});
    };

    const MasterGrid grid = s.master();
    const QuadratureGrid quad = s.quadrature();
    const MatrixProfile p0 = sample_profile(s.initial, grid, s.rows, s.cols);
    {
        const MatrixProfile back = from_spectral(to_spectral(p0));
        const double scale = std::max(p0.samples.cwiseAbs().maxCoeff(), 1e-300);
        add("spectral_round_trip", (back.samples - p0.samples).cwiseAbs().maxCoeff() / scale, 1e-12);
    }

    Scenario run_s = s;
    if (is_kernel_kind(s.equation.kind)) run_s.outputs.slices = true;
    const SolutionResult r = evaluate_solution(run_s, threads);
    const SolutionField& f = r.field;

    {
        const Evolver ev(p0, s.equation.params);
        const MatrixProfile p = ev.at(s.t.front());
        double asym = 0.0;
        double u_err = 0.0;
        for (double x : s.x) {
            asym = std::max(asym, hankel_asymmetry(hankel_kernel(p, x, quad)));
            DiscreteKernel q;
            if (s.equation.companion == CompanionKind::neg_identity) {
                q = kdv_Q(p, x, quad);
            } else {
                const CompanionKind k = s.equation.companion;
                const MatrixProfile pt = companion_profile(reverses_time(k) ? ev.at(-s.t.front()) : p, k);
                q = assemble_Q(p, pt, x, quad);
            }
            if (std::abs(det2(q)) < s.tolerances.patch_threshold) continue;
            const UIdentityReport u = u_identity_check(q);
            u_err = std::max({u_err, u.left_error, u.right_error});
        }
        add("hankel_symmetry", asym, 0.0);
        add("u_identity_ii", u_err, s.tolerances.solver);
    }
    add("nystrom_backward_error", r.solver_residual, s.tolerances.solver);

    if (f.has_slices()) {
        const int o = quad.origin();
        double worst = 0.0;
        for (std::size_t idx = 0; idx < f.center.size(); ++idx) {
            if (!f.valid[idx]) continue;
            const CMatrix a = f.slice_y0[idx].middleRows(static_cast<Eigen::Index>(o) * f.rows, f.rows);
            const CMatrix b = f.slice_0z[idx].middleCols(static_cast<Eigen::Index>(o) * f.cols, f.cols);
            worst = std::max({worst, (a - f.center[idx]).cwiseAbs().maxCoeff(),
                              (b - f.center[idx]).cwiseAbs().maxCoeff()});
        }
        add("slice_consistency", worst, s.tolerances.solver);
    }

    for (const auto& nr : residual_suite(run_s, r)) {
        if (nr.evaluated) add("residual_" + nr.name, nr.report.max_norm, s.tolerances.residual);
    }

    if (rank_one_reference(s, s.x.front(), s.t.front())) {
        double err = 0.0;
        for (std::size_t it = 0; it < f.t.size(); ++it)
            for (std::size_t ix = 0; ix < f.x.size(); ++ix)
                if (f.is_valid(ix, it))
                    err = std::max(err, std::abs(f.at(ix, it)(0, 0) - *rank_one_reference(s, f.x[ix], f.t[it])));
        add("rank_one_reference", err, 0.0, true);
    }
    add("min_abs_det2", r.patch.min_modulus, s.tolerances.patch_threshold, true);

    bool ok = true;
    for (const auto& c : report.checks) ok = ok && c.pass;
    report.exit_code = !ok ? exit_failure : (r.patch.flagged ? exit_patch : exit_clean);
    return report;
}

void print_verify(std::ostream& os, const VerifyReport& r) {
    for (const auto& c : r.checks) {
        os << (c.informational ? "INFO" : (c.pass ? "PASS" : "FAIL")) << '\t' << c.name << '\t' << num(c.value);
        if (!c.informational) os << "\t<= " << num(c.tolerance);
        os << '\n';
    }
}

} // namespace marchenko
