#include "doctest.h"

#include <cmath>
#include <numbers>

#include "marchenko/error.hpp"
#include "marchenko/grid.hpp"
#include "oracles.hpp"

using namespace marchenko;

namespace {

MatrixProfile gaussian_profile(const MasterGrid& g, double sigma, double c = 0.0) {
    InitialDataSpec spec;
    spec.terms.push_back(GaussianTerm{CMatrix::Constant(1, 1, 1.0), sigma, c});
    return sample_profile(spec, g, 1, 1);
}

} // namespace

TEST_CASE("master grid nodes and lookup") {
    const auto g = make_uniform_grid(4.0, 16);
    CHECK(g.spacing() == doctest::Approx(0.5));
    CHECK(g.node(0) == doctest::Approx(-4.0));
    CHECK(g.node(15) == doctest::Approx(3.5));
    CHECK(g.index_of(1.5).value() == 11);
    CHECK_FALSE(g.index_of(1.25).has_value());
    CHECK_FALSE(g.index_of(4.0).has_value());
    CHECK_THROWS_AS(g.checked_index(0.3), DomainError);
    CHECK(g.frequency(8) == doctest::Approx(0.0));
    CHECK(g.frequency(9) == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("invalid grids are rejected") {
    CHECK_THROWS_AS(make_uniform_grid(-1.0, 16), ConfigError);
    CHECK_THROWS_AS(make_uniform_grid(1.0, 0), ConfigError);
}

TEST_CASE("gaussian sampling matches the formula") {
    const auto g = make_uniform_grid(10.0, 200);
    const auto p = gaussian_profile(g, 1.3, 0.5);
    for (int i = 0; i < g.node_count; i += 17)
        CHECK(p.at_index(i)(0, 0).real() == doctest::Approx(oracle::gaussian(g.node(i), 1.3, 0.5)));
    CHECK(eval_at(p, 0.5)(0, 0).real() == doctest::Approx(1.0));
    CHECK_THROWS_AS(eval_at(p, 0.55), DomainError);
}

TEST_CASE("spectral round trip and Parseval") {
    const auto g = make_uniform_grid(8.0, 128);
    InitialDataSpec spec;
    CMatrix a(2, 1);
    a << cplx{1.0, 0.5}, cplx{-0.3, 0.0};
    spec.terms.push_back(GaussianTerm{a, 0.9, -1.0});
    spec.terms.push_back(GaussianTerm{CMatrix::Constant(2, 1, 0.2), 0.4, 2.0});
    const auto p = sample_profile(spec, g, 2, 1);

    const auto c = to_spectral(p);
    const auto back = from_spectral(c);
    CHECK((back.samples - p.samples).cwiseAbs().maxCoeff() < 1e-14);

    const double energy_s = p.samples.squaredNorm() / g.node_count;
    const double energy_k = c.coefficients.squaredNorm();
    CHECK(energy_k == doctest::Approx(energy_s).epsilon(1e-13));
}

TEST_CASE("weighted profiles round trip") {
    const auto g = make_uniform_grid(6.0, 96);
    InitialDataSpec spec;
    spec.terms.push_back(ExponentialTerm{CMatrix::Constant(1, 1, 2.0), 0.75});
    const auto p = sample_profile(spec, g, 1, 1);
    CHECK(p.weight_rate == doctest::Approx(0.75));
    CHECK(p.at_index(40)(0, 0).real() == doctest::Approx(2.0 * std::exp(0.75 * g.node(40))));
    const auto back = from_spectral(to_spectral(p));
    CHECK(((back.samples - p.samples).cwiseAbs().maxCoeff() / p.samples.cwiseAbs().maxCoeff()) < 1e-14);
}

TEST_CASE("mixed exponential rates are rejected") {
    const auto g = make_uniform_grid(6.0, 96);
    InitialDataSpec spec;
    spec.terms.push_back(ExponentialTerm{CMatrix::Constant(1, 1, 1.0), 1.0});
    spec.terms.push_back(ExponentialTerm{CMatrix::Constant(1, 1, 1.0), 2.0});
    CHECK_THROWS_AS(sample_profile(spec, g, 1, 1), ConfigError);
}

TEST_CASE("spectral derivatives of a gaussian") {
    const auto g = make_uniform_grid(12.0, 256);
    const auto p = gaussian_profile(g, 1.0, 0.5);
    const auto d1 = spectral_derivative(p, 1);
    const auto d2 = spectral_derivative(p, 2);
    double e1 = 0.0, e2 = 0.0;
    for (int i = 0; i < g.node_count; ++i) {
        const double s = g.node(i);
        e1 = std::max(e1, std::abs(d1.at_index(i)(0, 0) - oracle::gaussian_d1(s, 1.0, 0.5)));
        e2 = std::max(e2, std::abs(d2.at_index(i)(0, 0) - oracle::gaussian_d2(s, 1.0, 0.5)));
    }
    CHECK(e1 < 1e-12);
    CHECK(e2 < 1e-11);
}

TEST_CASE("derivative of exponential data honours the weight") {
    const auto g = make_uniform_grid(5.0, 80);
    InitialDataSpec spec;
    spec.terms.push_back(ExponentialTerm{CMatrix::Constant(1, 1, 1.0), 1.0});
    const auto p = sample_profile(spec, g, 1, 1);
    const auto d3 = spectral_derivative(p, 3);
    CHECK(((d3.samples - p.samples).cwiseAbs().maxCoeff() / p.samples.cwiseAbs().maxCoeff()) < 1e-12);
}

TEST_CASE("boundary decay ratio") {
    const auto g = make_uniform_grid(10.0, 200);
    CHECK(boundary_decay_ratio(gaussian_profile(g, 1.0)) < 1e-10);
    CHECK(boundary_decay_ratio(gaussian_profile(g, 4.0)) > 1e-3);
    CHECK(boundary_decay_ratio(MatrixProfile(g, 1, 1)) == 0.0);
}
