#include "doctest.h"

#include <cstdlib>
#include <string>

#include "marchenko/error.hpp"
#include "marchenko/scenario.hpp"

using namespace marchenko;

namespace {

const std::string base = R"(
name: demo
equation: local_nls
companion: adjoint
dims: [1, 1]
initial:
  type: gaussian
  amplitude: 0.5
  width: 1.0
  center: -2
master: {half_width: 16, nodes: 256}
quadrature: {truncation: 6, intervals: 48}
samples:
  x: {from: -0.5, to: 0.5, count: 9}
  t: {from: 0, to: 0.2, count: 3}
)";

std::string with(const std::string& from, const std::string& to) {
    std::string s = base;
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    s.replace(pos, from.size(), to);
    return s;
}

Scenario parse_valid(const std::string& text) {
    auto s = parse_scenario_text(text);
    validate(s);
    return s;
}

} // namespace

TEST_CASE("a valid scenario parses with defaults filled in") {
    const auto s = parse_valid(base);
    CHECK(s.name == "demo");
    CHECK(s.equation.kind == EquationKind::local_nls);
    CHECK(s.equation.params.mu1 == cplx{0.0, -1.0});
    CHECK(s.equation.params.mu2 == cplx{});
    CHECK(s.x.size() == 9);
    CHECK(s.x.back() == 0.5);
    CHECK(s.t.size() == 3);
    CHECK(s.initial.terms.size() == 1);
    CHECK(s.tolerances.patch_threshold == 1e-8);
    CHECK_FALSE(s.needs_companion_field());
    CHECK(s.quadrature().stride == 1);
}

TEST_CASE("complex and matrix values") {
    const auto s = parse_valid(R"(
equation: combined_degree3
companion: neg_adjoint
mu1: {re: 0, im: -0.5}
mu2: -0.7
dims: [2, 2]
initial:
  - type: gaussian
    amplitude: [[0.1, 0.2], [0.0, 0.3]]
    amplitude_imag: [[0.0, 0.1], [0.2, 0.0]]
    width: 1.0
    center: -2
  - type: gaussian
    amplitude: [[0.05, 0], [0, 0.05]]
    width: 0.5
    center: -3
master: {half_width: 16, nodes: 256}
quadrature: {truncation: 6, intervals: 48}
samples:
  x: [-0.125, 0, 0.125]
  t: [0, 0.1, 0.2]
outputs: {slices: true, companion: true}
)");
    CHECK(s.equation.params.mu1 == cplx{0.0, -0.5});
    CHECK(s.rows == 2);
    CHECK(s.initial.terms.size() == 2);
    const auto& g = std::get<GaussianTerm>(s.initial.terms[0]);
    CHECK(g.amplitude(1, 0) == cplx{0.0, 0.2});
    CHECK(s.outputs.slices);
    CHECK(s.needs_companion_field());
}

TEST_CASE("rejected scenarios") {
    CHECK_THROWS_AS(parse_valid(with("local_nls", "nls")), ConfigError);
    CHECK_THROWS_AS(parse_valid(with("companion: adjoint", "companion: neg_transpose")), ConfigError);
    CHECK_THROWS_AS(parse_valid(with("dims: [1, 1]", "dims: [1, 1]\nmu1: 1")), ConfigError);
    CHECK_THROWS_AS(parse_valid(with("type: gaussian", "type: wavelet")), ConfigError);
    CHECK_THROWS_AS(parse_valid(with("intervals: 48", "intervals: 40")), ConfigError);
    CHECK_THROWS_AS(parse_valid(with("from: -0.5, to: 0.5, count: 9", "from: -0.5, to: 0.5, count: 10")),
                    ConfigError);
    CHECK_THROWS_AS(parse_valid(with("truncation: 6", "truncation: 9")), ConfigError);
    CHECK_THROWS_AS(parse_valid(with("x: {from: -0.5, to: 0.5, count: 9}", "x: [0.5, 0]")), ConfigError);
    CHECK_THROWS_AS(parse_valid(with("{half_width: 16, nodes: 256}", "{half_width: 16, nodes: 256}\ntolerances: {max_dense: 10}")),
                    ConfigError);
    CHECK_THROWS_AS(parse_scenario_text("equation: [unclosed"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_text("name: nothing"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("/nonexistent/scenario.yaml"), ConfigError);
}

TEST_CASE("combined system restricts the dispersion coefficients") {
    const std::string text = R"(
equation: combined_degree3
companion: neg_adjoint
mu1: MU1
mu2: -0.7
initial: {type: gaussian, amplitude: 0.2, width: 1, center: -2}
master: {half_width: 16, nodes: 256}
quadrature: {truncation: 6, intervals: 48}
samples: {x: [0], t: [0]}
)";
    auto sub = [&](const std::string& mu1) {
        std::string s = text;
        s.replace(s.find("MU1"), 3, mu1);
        return s;
    };
    CHECK_NOTHROW(parse_valid(sub("{im: 0.5}")));
    CHECK_THROWS_AS(parse_valid(sub("0.5")), ConfigError);
}

TEST_CASE("KdV needs a square system") {
    const std::string text = R"(
equation: kdv_primitive
dims: [1, 2]
initial: {type: gaussian, amplitude: [[0.2, 0.1]], width: 1, center: -2}
master: {half_width: 16, nodes: 256}
quadrature: {truncation: 6, intervals: 48}
samples: {x: [0], t: [0]}
)";
    CHECK_THROWS_AS(parse_valid(text), ConfigError);
}

TEST_CASE("decay warnings") {
    CHECK(scenario_warnings(parse_valid(base)).empty());
    CHECK_FALSE(scenario_warnings(parse_valid(with("width: 1.0", "width: 4.0"))).empty());
}

TEST_CASE("uniform samples") {
    const auto v = uniform_samples(-1.0, 1.0, 5);
    REQUIRE(v.size() == 5);
    CHECK(v[1] == doctest::Approx(-0.5));
    CHECK(v.back() == 1.0);
    CHECK(uniform_samples(0.3, 0.3, 1).size() == 1);
    CHECK_THROWS_AS(uniform_samples(1.0, 0.0, 3), ConfigError);
    CHECK_THROWS_AS(uniform_samples(0.0, 1.0, 0), ConfigError);
}

TEST_CASE("environment overrides") {
    ::setenv("MARCHENKO_PATCH_THRESHOLD", "1e-6", 1);
    ::setenv("MARCHENKO_MAX_DENSE", "8192", 1);
    Tolerances tol;
    apply_env_overrides(tol);
    CHECK(tol.patch_threshold == 1e-6);
    CHECK(tol.max_dense == 8192);
    ::setenv("MARCHENKO_SOLVER_TOL", "abc", 1);
    CHECK_THROWS_AS(apply_env_overrides(tol), ConfigError);
    ::unsetenv("MARCHENKO_PATCH_THRESHOLD");
    ::unsetenv("MARCHENKO_MAX_DENSE");
    ::unsetenv("MARCHENKO_SOLVER_TOL");
}
