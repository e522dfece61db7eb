#include "doctest.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "marchenko/companion.hpp"
#include "marchenko/error.hpp"
#include "marchenko/fredholm.hpp"
#include "oracles.hpp"

using namespace marchenko;

namespace {

MatrixProfile exp_profile(const MasterGrid& g, cplx amp = 1.0, double rate = 1.0) {
    InitialDataSpec spec;
    spec.terms.push_back(ExponentialTerm{CMatrix::Constant(1, 1, amp), rate});
    return sample_profile(spec, g, 1, 1);
}

MatrixProfile matrix_profile(const MasterGrid& g) {
    InitialDataSpec spec;
    CMatrix a(2, 2);
    a << 0.4, cplx{0.1, 0.2}, cplx{-0.2, 0.05}, 0.3;
    spec.terms.push_back(GaussianTerm{a, 1.0, -2.0});
    return sample_profile(spec, g, 2, 2);
}

} // namespace

TEST_CASE("quadrature nodes and weights") {
    const auto q = make_quadrature(2.0, 8, 0.125);
    CHECK(q.size() == 9);
    CHECK(q.stride == 2);
    CHECK(q.nodes.front() == doctest::Approx(-2.0));
    CHECK(q.nodes[q.origin()] == 0.0);
    CHECK(q.weights.front() == doctest::Approx(0.125));
    CHECK(q.weights[3] == doctest::Approx(0.25));
    double sum = 0.0;
    for (double w : q.weights) sum += w;
    CHECK(sum == doctest::Approx(2.0));
    CHECK_THROWS_AS(make_quadrature(2.0, 8, 0.1), ConfigError);
    CHECK_THROWS_AS(make_quadrature(2.0, 4, 0.125), ConfigError);
}

TEST_CASE("hankel kernel is symmetric in its node pair") {
    const auto g = make_uniform_grid(16.0, 256);
    const auto quad = make_quadrature(4.0, 32, g.spacing());
    const auto p = matrix_profile(g);
    const auto k = hankel_kernel(p, 0.5, quad);
    CHECK(hankel_asymmetry(k) == 0.0);
    CHECK(k.block(3, 10).isApprox(eval_at(p, quad.nodes[3] + quad.nodes[10] + 0.5)));
    CHECK_THROWS_AS(hankel_kernel(p, 0.01, quad), DomainError);
}

TEST_CASE("assemble_Q against an explicit sum") {
    const auto g = make_uniform_grid(16.0, 256);
    const auto quad = make_quadrature(4.0, 32, g.spacing());
    const auto p = matrix_profile(g);
    const auto pt = companion_profile(p, CompanionKind::neg_adjoint);
    const double x = 0.25;
    const auto q = assemble_Q(p, pt, x, quad);
    for (int i : {0, 7, 32})
        for (int j : {0, 19, 32}) {
            CMatrix sum = CMatrix::Zero(2, 2);
            for (int k = 0; k < quad.size(); ++k)
                sum += quad.weights[k] * eval_at(pt, quad.nodes[i] + quad.nodes[k] + x) *
                       eval_at(p, quad.nodes[k] + quad.nodes[j] + x);
            CHECK((q.block(i, j) - sum).norm() < 1e-14);
        }
    const auto kq = kdv_Q(p, x, quad);
    CHECK(kq.block(4, 9).isApprox(-eval_at(p, quad.nodes[4] + quad.nodes[9] + x)));
}

TEST_CASE("scalar exponential data: exact discrete solution") {
    const auto g = make_uniform_grid(32.0, 2048);
    const double L = 15.0;
    for (int n : {120, 240}) {
        const auto quad = make_quadrature(L, n, g.spacing());
        const auto p = exp_profile(g);
        const auto pt = companion_profile(p, CompanionKind::adjoint);
        for (double x : {-1.0, 0.0, 0.5}) {
            const auto q = assemble_Q(p, pt, x, quad);
            const auto G = solve_G(q, p, x);
            const cplx g00 = G.block(quad.origin(), quad.origin())(0, 0);
            CHECK(std::abs(g00 - oracle::discrete_rank_one(x, L, n)) < 1e-13);
        }
    }
}

TEST_CASE("det2 from eigenvalues") {
    const auto g = make_uniform_grid(16.0, 256);
    const auto quad = make_quadrature(4.0, 32, g.spacing());
    const auto p = matrix_profile(g);
    const auto q = assemble_Q(p, companion_profile(p, CompanionKind::adjoint), 0.5, quad);

    Eigen::VectorXd w(q.data.rows());
    for (int k = 0; k < quad.size(); ++k) w.segment(2 * k, 2).setConstant(quad.weights[k]);
    const CMatrix wq = w.asDiagonal() * q.data;
    Eigen::ComplexEigenSolver<CMatrix> es(wq);
    cplx expected = 1.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const cplx l = es.eigenvalues()(i);
        expected *= (1.0 + l) * std::exp(-l);
    }
    CHECK(std::abs(det2(q) - expected) < 1e-12);
}

TEST_CASE("det2 of the zero kernel is one") {
    const auto g = make_uniform_grid(8.0, 64);
    const auto quad = make_quadrature(2.0, 8, g.spacing());
    DiscreteKernel q{quad, 1, 1, CMatrix::Zero(9, 9)};
    CHECK(std::abs(det2(q) - 1.0) < 1e-15);
}

TEST_CASE("full, row and column solves agree") {
    const auto g = make_uniform_grid(16.0, 256);
    const auto quad = make_quadrature(4.0, 32, g.spacing());
    const auto p = matrix_profile(g);
    const double x = 0.5;
    const auto q = assemble_Q(p, companion_profile(p, CompanionKind::neg_adjoint), x, quad);
    const auto rhs = hankel_kernel(p, x, quad);
    const FredholmSystem sys(q);
    const auto G = sys.solve(rhs);
    CHECK(sys.relative_residual(G, rhs) < 1e-14);

    const CMatrix row = sys.solve_row(rhs, quad.origin());
    CHECK((row - G.data.middleRows(2 * quad.origin(), 2)).norm() < 1e-14);
    CHECK(sys.row_residual(row, rhs, quad.origin()) < 1e-14);
    const CMatrix col = sys.solve_column(rhs, 5);
    CHECK((col - G.data.middleCols(10, 2)).norm() < 1e-14);
}

TEST_CASE("small det2 raises PatchError with its location") {
    const auto g = make_uniform_grid(32.0, 2048);
    const auto quad = make_quadrature(15.0, 240, g.spacing());
    const auto p = exp_profile(g);
    // Q = -P: det2 = (1 - S e^x) e^{S e^x}, vanishing near e^x = 2.
    const double x = std::log(2.0);
    const double xs = std::round(x / g.spacing()) * g.spacing();
    const auto q = kdv_Q(p, xs, quad);
    try {
        solve_G(q, p, xs, 0.1, 0.75);
        FAIL("expected PatchError");
    } catch (const PatchError& e) {
        CHECK(std::abs(e.det2()) < 0.1);
        CHECK(e.x() == doctest::Approx(xs));
        CHECK(e.t() == doctest::Approx(0.75));
    }
    CHECK_NOTHROW(solve_G(kdv_Q(p, -2.0, quad), p, -2.0, 0.1));
}
