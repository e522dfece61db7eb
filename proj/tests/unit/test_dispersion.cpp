#include "doctest.h"

#include <cmath>
#include <vector>

#include "marchenko/dispersion.hpp"
#include "marchenko/error.hpp"
#include "oracles.hpp"

using namespace marchenko;

TEST_CASE("symbol against the hand-written form") {
    const std::vector<DispersionParams> cases{
        {cplx{1.0, 0.0}, cplx{}},
        {cplx{0.0, -1.0}, cplx{}},
        {cplx{}, cplx{-1.0, 0.0}},
        {cplx{0.0, 0.4}, cplx{-0.7, 0.0}},
        {cplx{0.3, -0.2}, cplx{0.1, 0.5}},
    };
    for (const auto& prm : cases)
        for (double k : {-2.5, -0.25, 0.0, 0.125, 1.0, 3.0})
            CHECK(std::abs(symbol(prm, k) - oracle::symbol(prm.mu1, prm.mu2, k)) <
                  1e-12 * (1.0 + std::abs(oracle::symbol(prm.mu1, prm.mu2, k))));
}

TEST_CASE("generator at a real eigenvalue") {
    const DispersionParams prm{cplx{2.0}, cplx{-1.0}};
    CHECK(std::abs(generator(prm, cplx{1.0}) - cplx{1.0}) < 1e-15);
    CHECK(std::abs(generator(prm, cplx{2.0}) - cplx{0.0}) < 1e-15);
}

TEST_CASE("heat flow of a gaussian") {
    const auto g = make_uniform_grid(20.0, 512);
    InitialDataSpec spec;
    spec.terms.push_back(GaussianTerm{CMatrix::Constant(1, 1, 1.0), 1.0, 0.0});
    const auto p0 = sample_profile(spec, g, 1, 1);
    const DispersionParams heat{cplx{1.0}, cplx{}};
    for (double t : {0.1, 0.5, 2.0}) {
        const auto p = evolve(p0, heat, t);
        double err = 0.0;
        for (int i = 0; i < g.node_count; ++i)
            err = std::max(err, std::abs(p.at_index(i)(0, 0) - oracle::heat_gaussian(g.node(i), t, 1.0)));
        CHECK(err < 1e-13);
        CHECK(p.time == doctest::Approx(t));
    }
}

TEST_CASE("exponential data evolves by the generator") {
    const auto g = make_uniform_grid(6.0, 96);
    InitialDataSpec spec;
    spec.terms.push_back(ExponentialTerm{CMatrix::Constant(1, 1, 1.0), 1.0});
    const auto p0 = sample_profile(spec, g, 1, 1);
    const DispersionParams airy{cplx{}, cplx{-1.0}};
    const auto p = evolve(p0, airy, 0.7);
    const double rel = (p.samples - p0.samples * std::exp(-0.7)).cwiseAbs().maxCoeff() /
                       p0.samples.cwiseAbs().maxCoeff();
    CHECK(rel < 1e-13);
}

TEST_CASE("Schroedinger flow conserves the l2 norm") {
    const auto g = make_uniform_grid(16.0, 256);
    InitialDataSpec spec;
    spec.terms.push_back(GaussianTerm{CMatrix::Constant(1, 1, cplx{0.5, 0.5}), 1.2, 1.0});
    const auto p0 = sample_profile(spec, g, 1, 1);
    const auto p = evolve(p0, DispersionParams{cplx{0.0, -1.0}, cplx{}}, 1.5);
    CHECK(p.samples.norm() == doctest::Approx(p0.samples.norm()).epsilon(1e-12));
}

TEST_CASE("evolution composes") {
    const auto g = make_uniform_grid(16.0, 256);
    InitialDataSpec spec;
    spec.terms.push_back(GaussianTerm{CMatrix::Constant(1, 1, 1.0), 1.0, 0.0});
    const auto p0 = sample_profile(spec, g, 1, 1);
    const DispersionParams prm{cplx{0.0, 0.3}, cplx{-0.5}};
    const auto direct = evolve(p0, prm, 0.8);
    const auto stepped = evolve(evolve(p0, prm, 0.3), prm, 0.5);
    CHECK((direct.samples - stepped.samples).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("backward heat flow drops noise instead of amplifying it") {
    const auto g = make_uniform_grid(20.0, 512);
    InitialDataSpec spec;
    spec.terms.push_back(GaussianTerm{CMatrix::Constant(1, 1, 1.0), 1.0, 0.0});
    const auto p0 = sample_profile(spec, g, 1, 1);
    const DispersionParams heat{cplx{1.0}, cplx{}};
    const auto back = evolve(p0, heat, -0.2);
    double err = 0.0;
    for (int i = 0; i < g.node_count; ++i)
        err = std::max(err, std::abs(back.at_index(i)(0, 0) - oracle::heat_gaussian(g.node(i), -0.2, 1.0)));
    // modes dropped at the 1e-13 floor would have grown by e^{0.2 k^2}
    CHECK(err < 1e-8);
}

TEST_CASE("growth beyond the guard is an error") {
    const auto g = make_uniform_grid(4.0, 64);
    MatrixProfile p(g, 1, 1);
    for (int i = 0; i < g.node_count; ++i) p.at_index(i)(0, 0) = (i % 2 == 0) ? 1.0 : -1.0;
    CHECK_THROWS_AS(evolve(p, DispersionParams{cplx{-1.0}, cplx{}}, 10.0), GrowthError);
}

TEST_CASE("time-difference residual of the exact flow") {
    const auto g = make_uniform_grid(16.0, 256);
    InitialDataSpec spec;
    spec.terms.push_back(GaussianTerm{CMatrix::Constant(1, 1, 1.0), 1.0, 0.0});
    const auto p0 = sample_profile(spec, g, 1, 1);
    const DispersionParams prm{cplx{0.0, -1.0}, cplx{}};
    std::vector<double> err;
    std::vector<double> steps{0.02, 0.01, 0.005};
    for (double dt : steps) {
        std::vector<MatrixProfile> snaps;
        for (int j = 0; j < 5; ++j) snaps.push_back(evolve(p0, prm, j * dt));
        err.push_back(dispersion_residual(snaps, dt, prm));
    }
    CHECK(oracle::fitted_order(steps, err) == doctest::Approx(2.0).epsilon(0.1));
}
