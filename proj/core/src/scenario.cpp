#include "marchenko/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "marchenko/error.hpp"

namespace marchenko {

namespace {

struct KindRule {
    EquationKind kind;
    std::optional<cplx> mu1;
    std::optional<cplx> mu2;
    std::vector<CompanionKind> companions;
};

const std::vector<KindRule>& kind_table() {
    using C = CompanionKind;
    const cplx minus_i{0.0, -1.0};
    static const std::vector<KindRule> table{
        {EquationKind::kernel_nls, minus_i, cplx{}, {C::adjoint, C::neg_adjoint}},
        {EquationKind::local_nls, minus_i, cplx{}, {C::adjoint, C::neg_adjoint}},
        {EquationKind::rev_spacetime_nls, minus_i, cplx{}, {C::transpose_rev_spacetime}},
        {EquationKind::rev_time_nls, minus_i, cplx{}, {C::transpose_rev_time}},
        {EquationKind::coupled_diffusion, cplx{1.0}, cplx{}, {C::transpose_rev_time}},
        {EquationKind::kernel_mkdv, cplx{}, cplx{-1.0}, {C::neg_transpose, C::neg_adjoint}},
        {EquationKind::local_mkdv, cplx{}, cplx{-1.0}, {C::neg_transpose, C::neg_adjoint}},
        {EquationKind::rev_spacetime_mkdv, cplx{}, cplx{-1.0},
         {C::neg_transpose_rev_spacetime, C::neg_adjoint_rev_spacetime}},
        {EquationKind::kdv_primitive, cplx{}, cplx{-1.0}, {C::neg_identity}},
        {EquationKind::combined_degree3, std::nullopt, std::nullopt, {C::neg_adjoint}},
    };
    return table;
}

const KindRule& rule_for(EquationKind kind) {
    for (const auto& r : kind_table())
        if (r.kind == kind) return r;
    throw ConfigError("no parameter rule for equation kind");
}

std::string describe(cplx z) {
    std::ostringstream os;
    os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
    return os.str();
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& msg) {
    if (node.IsDefined() && node.Mark().line >= 0)
        throw ConfigError("line " + std::to_string(node.Mark().line + 1) + ": " + msg);
    throw ConfigError(msg);
}

double read_real(const YAML::Node& node, const std::string& what) {
    try {
        return node.as<double>();
    } catch (const YAML::Exception&) {
        fail(node, what + " must be a number");
    }
}

int read_int(const YAML::Node& node, const std::string& what) {
    try {
        return node.as<int>();
    } catch (const YAML::Exception&) {
        fail(node, what + " must be an integer");
    }
}

// A number, or a map {re, im}.
cplx read_complex(const YAML::Node& node, const std::string& what) {
    if (node.IsMap()) {
        const double re = node["re"] ? read_real(node["re"], what + ".re") : 0.0;
        const double im = node["im"] ? read_real(node["im"], what + ".im") : 0.0;
        return {re, im};
    }
    return {read_real(node, what), 0.0};
}

// A scalar (1x1) or a list of rows.
Eigen::MatrixXd read_real_matrix(const YAML::Node& node, const std::string& what) {
    if (node.IsScalar()) {
        Eigen::MatrixXd m(1, 1);
        m(0, 0) = read_real(node, what);
        return m;
    }
    if (!node.IsSequence() || node.size() == 0) fail(node, what + " must be a number or a list of rows");
    if (!node[0].IsSequence()) {
        // a single row
        Eigen::MatrixXd m(1, node.size());
        for (std::size_t j = 0; j < node.size(); ++j) m(0, j) = read_real(node[j], what);
        return m;
    }
    const auto rows = node.size();
    const auto cols = node[0].size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!node[i].IsSequence() || node[i].size() != cols) fail(node[i], what + " has ragged rows");
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = read_real(node[i][j], what);
    }
    return m;
}

CMatrix read_matrix(const YAML::Node& term, const std::string& key, const std::string& what) {
    if (!term[key]) fail(term, what + ": missing '" + key + "'");
    const Eigen::MatrixXd re = read_real_matrix(term[key], what + "." + key);
    CMatrix out = re.cast<cplx>();
    const std::string imag_key = key + "_imag";
    if (term[imag_key]) {
        const Eigen::MatrixXd im = read_real_matrix(term[imag_key], what + "." + imag_key);
        if (im.rows() != re.rows() || im.cols() != re.cols())
            fail(term[imag_key], what + ": " + imag_key + " shape differs from " + key);
        out.imag() = im;
    }
    return out;
}

InitialTerm read_term(const YAML::Node& term, std::size_t index) {
    const std::string what = "initial[" + std::to_string(index) + "]";
    if (!term.IsMap() || !term["type"]) fail(term, what + " needs a 'type'");
    const auto type = term["type"].as<std::string>();
    if (type == "gaussian") {
        GaussianTerm g;
        g.amplitude = read_matrix(term, "amplitude", what);
        g.width = term["width"] ? read_real(term["width"], what + ".width") : 1.0;
        g.center = term["center"] ? read_real(term["center"], what + ".center") : 0.0;
        return g;
    }
    if (type == "exponential" || type == "exponential_step") {
        const CMatrix a = read_matrix(term, "amplitude", what);
        const double rate = term["rate"] ? read_real(term["rate"], what + ".rate") : 1.0;
        if (type == "exponential") return ExponentialTerm{a, rate};
        return ExponentialStepTerm{a, rate};
    }
    if (type == "tabulated") {
        // values: one entry per master node; each a number or a matrix.
        const YAML::Node values = term["values"];
        if (!values || !values.IsSequence()) fail(term, what + ": tabulated needs a 'values' list");
        const YAML::Node imag = term["values_imag"];
        TabulatedTerm tab;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const Eigen::MatrixXd re = read_real_matrix(values[i], what + ".values");
            if (i == 0) tab.values.resize(re.size(), static_cast<Eigen::Index>(values.size()));
            if (re.size() != tab.values.rows()) fail(values[i], what + ": inconsistent sample shape");
            CMatrix col = re.cast<cplx>();
            if (imag) col.imag() = read_real_matrix(imag[i], what + ".values_imag");
            tab.values.col(static_cast<Eigen::Index>(i)) =
                Eigen::Map<const Eigen::VectorXcd>(col.data(), col.size());
        }
        return tab;
    }
    fail(term["type"], what + ": unknown initial-data type '" + type + "'");
}

std::vector<double> read_samples(const YAML::Node& node, const std::string& what) {
    if (node.IsSequence()) {
        std::vector<double> v;
        for (const auto& e : node) v.push_back(read_real(e, what));
        return v;
    }
    if (node.IsMap()) {
        if (!node["from"] || !node["to"] || !node["count"])
            fail(node, what + " needs from, to and count");
        return uniform_samples(read_real(node["from"], what + ".from"),
                               read_real(node["to"], what + ".to"),
                               read_int(node["count"], what + ".count"));
    }
    return {read_real(node, what)};
}

bool read_bool(const YAML::Node& node, const std::string& what) {
    try {
        return node.as<bool>();
    } catch (const YAML::Exception&) {
        fail(node, what + " must be true or false");
    }
}

bool same(cplx a, cplx b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(b)); }

void check_on_master(const MasterGrid& grid, const std::vector<double>& values, const char* what) {
    for (double v : values) {
        const double steps = v / grid.spacing();
        if (std::abs(steps - std::round(steps)) > 1e-9)
            throw ConfigError(std::string(what) + " sample " + std::to_string(v) +
                              " is not a multiple of the master spacing " +
                              std::to_string(grid.spacing()));
    }
}

} // namespace

std::vector<double> uniform_samples(double from, double to, int count) {
    if (count < 1) throw ConfigError("sample count must be positive");
    if (count == 1) return {from};
    if (!(to > from)) throw ConfigError("sample range must satisfy from < to");
    std::vector<double> v(static_cast<std::size_t>(count));
    const double step = (to - from) / (count - 1);
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = from + i * step;
    v.back() = to;
    return v;
}

QuadratureGrid Scenario::quadrature() const {
    return make_quadrature(truncation, intervals, master().spacing());
}

bool Scenario::needs_companion_field() const {
    return outputs.companion || equation.kind == EquationKind::coupled_diffusion;
}

Scenario parse_scenario_text(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("malformed scenario: ") + e.what());
    }
    if (!root.IsMap()) throw ConfigError("scenario must be a mapping");

    Scenario s;
    s.source = text;
    s.name = root["name"] ? root["name"].as<std::string>() : "scenario";

    if (!root["equation"]) throw ConfigError("missing 'equation'");
    const auto kind_name = root["equation"].as<std::string>();
    const auto kind = parse_equation_kind(kind_name);
    if (!kind) fail(root["equation"], "unknown equation kind '" + kind_name + "'");
    s.equation.kind = *kind;
    const KindRule& rule = rule_for(*kind);

    if (root["companion"]) {
        const auto name = root["companion"].as<std::string>();
        const auto c = parse_companion_kind(name);
        if (!c) fail(root["companion"], "unknown companion kind '" + name + "'");
        s.equation.companion = *c;
    } else {
        s.equation.companion = rule.companions.front();
    }

    s.equation.params.mu1 = root["mu1"] ? read_complex(root["mu1"], "mu1") : rule.mu1.value_or(cplx{});
    s.equation.params.mu2 = root["mu2"] ? read_complex(root["mu2"], "mu2") : rule.mu2.value_or(cplx{});

    if (const auto dims = root["dims"]) {
        if (!dims.IsSequence() || dims.size() != 2) fail(dims, "dims must be [rows, cols]");
        s.rows = read_int(dims[0], "dims[0]");
        s.cols = read_int(dims[1], "dims[1]");
    }

    const YAML::Node initial = root["initial"];
    if (!initial) throw ConfigError("missing 'initial' data section");
    if (initial.IsSequence()) {
        for (std::size_t i = 0; i < initial.size(); ++i) s.initial.terms.push_back(read_term(initial[i], i));
    } else {
        s.initial.terms.push_back(read_term(initial, 0));
    }
    if (s.initial.terms.empty()) fail(initial, "'initial' has no terms");

    if (const auto m = root["master"]) {
        if (m["half_width"]) s.half_width = read_real(m["half_width"], "master.half_width");
        if (m["nodes"]) s.node_count = read_int(m["nodes"], "master.nodes");
    }
    if (const auto q = root["quadrature"]) {
        if (q["truncation"]) s.truncation = read_real(q["truncation"], "quadrature.truncation");
        if (q["intervals"]) s.intervals = read_int(q["intervals"], "quadrature.intervals");
    }
    if (const auto smp = root["samples"]) {
        if (smp["x"]) s.x = read_samples(smp["x"], "samples.x");
        if (smp["t"]) s.t = read_samples(smp["t"], "samples.t");
    }
    if (s.x.empty()) s.x = {0.0};
    if (s.t.empty()) s.t = {0.0};

    if (const auto out = root["outputs"]) {
        if (out["slices"]) s.outputs.slices = read_bool(out["slices"], "outputs.slices");
        if (out["companion"]) s.outputs.companion = read_bool(out["companion"], "outputs.companion");
    }
    if (const auto tol = root["tolerances"]) {
        if (tol["decay"]) s.tolerances.decay = read_real(tol["decay"], "tolerances.decay");
        if (tol["patch_threshold"])
            s.tolerances.patch_threshold = read_real(tol["patch_threshold"], "tolerances.patch_threshold");
        if (tol["solver"]) s.tolerances.solver = read_real(tol["solver"], "tolerances.solver");
        if (tol["residual"]) s.tolerances.residual = read_real(tol["residual"], "tolerances.residual");
        if (tol["max_dense"]) s.tolerances.max_dense = read_int(tol["max_dense"], "tolerances.max_dense");
    }
    apply_env_overrides(s.tolerances);
    validate(s);
    return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

void validate(const Scenario& s) {
    const KindRule& rule = rule_for(s.equation.kind);
    const auto kind = to_string(s.equation.kind);
    const auto& prm = s.equation.params;

    if (std::find(rule.companions.begin(), rule.companions.end(), s.equation.companion) ==
        rule.companions.end())
        throw ConfigError(std::string(kind) + " does not admit companion " +
                          std::string(to_string(s.equation.companion)));
    if (rule.mu1 && !same(prm.mu1, *rule.mu1))
        throw ConfigError(std::string(kind) + " requires mu1 = " + describe(*rule.mu1) + ", got " +
                          describe(prm.mu1));
    if (rule.mu2 && !same(prm.mu2, *rule.mu2))
        throw ConfigError(std::string(kind) + " requires mu2 = " + describe(*rule.mu2) + ", got " +
                          describe(prm.mu2));
    if (s.equation.kind == EquationKind::combined_degree3) {
        // P~ = -P^dagger evolves with (-mu1, mu2) only for mu1 imaginary, mu2 real.
        if (std::abs(prm.mu1.real()) > 1e-14 || std::abs(prm.mu2.imag()) > 1e-14)
            throw ConfigError("combined_degree3 needs mu1 purely imaginary and mu2 real");
        if (prm.is_zero()) throw ConfigError("combined_degree3 needs mu1 or mu2 nonzero");
    }

    if (s.rows < 1 || s.cols < 1) throw ConfigError("dims must be positive");
    if (s.equation.companion == CompanionKind::neg_identity && s.rows != s.cols)
        throw ConfigError(std::string(kind) + " needs square matrices (n = m)");

    const MasterGrid grid = s.master();
    const QuadratureGrid quad = s.quadrature();
    const int width = std::max(s.rows, s.cols);
    if (static_cast<long>(quad.size()) * width > s.tolerances.max_dense)
        throw ConfigError("dense system of size " + std::to_string(quad.size() * width) +
                          " exceeds the limit " + std::to_string(s.tolerances.max_dense));

    check_on_master(grid, s.x, "x");
    for (double x : s.x) {
        if (x - 2.0 * s.truncation <= -s.half_width || x >= s.half_width)
            throw ConfigError("x = " + std::to_string(x) + " needs x - 2L > -X and x < X");
    }
    for (std::size_t i = 1; i < s.x.size(); ++i)
        if (!(s.x[i] > s.x[i - 1])) throw ConfigError("x samples must be increasing");
    for (std::size_t i = 1; i < s.t.size(); ++i)
        if (!(s.t[i] > s.t[i - 1])) throw ConfigError("t samples must be increasing");

    // Samples the dimensions check in sample_profile would otherwise find late.
    (void)sample_profile(s.initial, grid, s.rows, s.cols);

    const auto& tol = s.tolerances;
    if (!(tol.decay > 0) || !(tol.patch_threshold > 0) || !(tol.solver > 0) || !(tol.residual > 0))
        throw ConfigError("tolerances must be positive");
}

std::vector<std::string> scenario_warnings(const Scenario& s) {
    std::vector<std::string> out;
    const MasterGrid grid = s.master();
    // Exponential terms are carried exactly by the weight; the rest must decay.
    InitialDataSpec rest;
    for (const auto& term : s.initial.terms)
        if (!std::holds_alternative<ExponentialTerm>(term)) rest.terms.push_back(term);
    if (!rest.terms.empty()) {
        const MatrixProfile p = sample_profile(rest, grid, s.rows, s.cols);
        const double ratio = boundary_decay_ratio(p);
        if (ratio > s.tolerances.decay) {
            std::ostringstream os;
            os << "initial data decays only to " << ratio << " of its maximum near +-X (decay_tol "
               << s.tolerances.decay << ")";
            out.push_back(os.str());
        }
    }
    const MatrixProfile p = sample_profile(s.initial, grid, s.rows, s.cols);
    const double peak = p.samples.size() ? p.samples.cwiseAbs().maxCoeff() : 0.0;
    if (peak > 0.0) {
        // |p| at the far end of the quadrature window, relative to the window maximum.
        double worst = 0.0;
        for (double x : s.x) {
            const int lo = grid.checked_index(x - 2.0 * s.truncation);
            const int hi = grid.checked_index(x);
            double window = 0.0;
            for (int i = lo; i <= hi; ++i) window = std::max(window, p.samples.col(i).cwiseAbs().maxCoeff());
            if (window > 0.0) worst = std::max(worst, p.samples.col(lo).cwiseAbs().maxCoeff() / window);
        }
        if (worst > s.tolerances.decay) {
            std::ostringstream os;
            os << "|p| at x - 2L is " << worst << " of the window maximum; truncation L = "
               << s.truncation << " may be short";
            out.push_back(os.str());
        }
    }
    return out;
}

void apply_env_overrides(Tolerances& tol) {
    auto real_env = [](const char* name, double& target) {
        if (const char* v = std::getenv(name)) {
            char* end = nullptr;
            const double d = std::strtod(v, &end);
            if (end == v || *end != '\0' || !(d > 0))
                throw ConfigError(std::string(name) + " must be a positive number");
            target = d;
        }
    };
    real_env("MARCHENKO_DECAY_TOL", tol.decay);
    real_env("MARCHENKO_PATCH_THRESHOLD", tol.patch_threshold);
    real_env("MARCHENKO_SOLVER_TOL", tol.solver);
    real_env("MARCHENKO_RESIDUAL_TOL", tol.residual);
    if (const char* v = std::getenv("MARCHENKO_MAX_DENSE")) {
        char* end = nullptr;
        const long n = std::strtol(v, &end, 10);
        if (end == v || *end != '\0' || n <= 0) throw ConfigError("MARCHENKO_MAX_DENSE must be a positive integer");
        tol.max_dense = static_cast<int>(n);
    }
}

} // namespace marchenko
