#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "marchenko/companion.hpp"
#include "marchenko/fredholm.hpp"

namespace marchenko {

enum class EquationKind {
    kernel_nls,
    local_nls,
    rev_spacetime_nls,
    rev_time_nls,
    coupled_diffusion,
    kernel_mkdv,
    local_mkdv,
    rev_spacetime_mkdv,
    kdv_primitive,
    combined_degree3,
};

std::string_view to_string(EquationKind kind) noexcept;
std::optional<EquationKind> parse_equation_kind(std::string_view name) noexcept;

/// An equation kind together with the linear data that generates it. The
/// companion selects the sign / real-complex variant (e.g. local_nls with
/// adjoint is the focusing form, with neg_adjoint the defocusing one).
struct EquationSpec {
    EquationKind kind = EquationKind::local_nls;
    CompanionKind companion = CompanionKind::adjoint;
    DispersionParams params{};
};

/// g(0,0;x,t) and optional kernel slices over a tensor (x, t) grid.
/// Sample (ix, it) is stored at it * x.size() + ix.
struct SolutionField {
    std::vector<double> x;
    std::vector<double> t;
    int rows = 1;
    int cols = 1;

    std::vector<CMatrix> center;
    std::vector<char> valid;

    /// Quadrature nodes of the slices; empty when slices were not requested.
    std::vector<double> slice_nodes;
    /// g(xi_i, 0) stacked over i: (nodes*rows) x cols per sample.
    std::vector<CMatrix> slice_y0;
    /// g(0, xi_j) side by side over j: rows x (nodes*cols) per sample.
    std::vector<CMatrix> slice_0z;

    /// g~(0,0;x,t) (cols x rows) from the companion equation P~ = G~(id+Q~).
    std::vector<CMatrix> companion_center;

    std::size_t index(std::size_t ix, std::size_t it) const noexcept { return it * x.size() + ix; }
    const CMatrix& at(std::size_t ix, std::size_t it) const { return center[index(ix, it)]; }
    bool has_slices() const noexcept { return !slice_y0.empty(); }
    bool has_companion() const noexcept { return !companion_center.empty(); }
    bool is_valid(std::size_t ix, std::size_t it) const {
        return valid.empty() || valid[index(ix, it)] != 0;
    }
};

struct ResidualPoint {
    double x = 0.0;
    double t = 0.0;
    double norm = 0.0;
};

struct ResidualReport {
    std::vector<ResidualPoint> points;
    double max_norm = 0.0;
    /// sqrt(sum |r|^2 dx dt) over the evaluated points.
    double l2_norm = 0.0;
};

/// Pointwise residual of the local PDE for g(0,0;x,t), written in evolution
/// form dg/dt - d(d/dx) g - N(g). Centred second-order differences in x and
/// t, five-point third x-derivative; points whose stencil leaves the grid are
/// excluded. Nonlocal kinds read their reflected factor from the field and
/// need a grid closed under the reflection.
ResidualReport residual_local(const EquationSpec& spec, const SolutionField& field);

/// Residual of the matrix kernel equation along the slices (y, 0) and (0, z).
ResidualReport residual_kernel(const EquationSpec& spec, const SolutionField& field);

/// Residual of the closure dg/dt - d g = 2 mu1 g g~ g + 3 mu2 (g g~ g_x + g_x g~ g)
/// with g~(0,0) taken from the computed companion field rather than from a
/// symmetry of g. Holds for every Hankel companion.
ResidualReport residual_closure(const EquationSpec& spec, const SolutionField& field);

/// Both equations of the diffusion/anti-diffusion system, using the computed
/// companion field for g~. Reports the larger of the two residuals per point.
ResidualReport residual_coupled(const SolutionField& field, const DispersionParams& params);

/// Miura map between the mKdV solution (P~ = -P^T) and the primitive KdV
/// solution (P~ = -id) for symmetric square data evolving under p_t + p_sss = 0.
struct MiuraReport {
    ResidualReport error;
    SolutionField mkdv;
    SolutionField kdv;
};

MiuraReport miura_check(const MatrixProfile& p0, const QuadratureGrid& quad,
                        std::span<const double> x, std::span<const double> t);

/// Two-argument kernel f(y, z) and Hankel profile h(s) as plain functions.
using KernelFunction = std::function<CMatrix(double y, double z)>;
using HankelFunction = std::function<CMatrix(double s)>;

struct ProductRuleReport {
    CMatrix lhs; // [F d/dx(H H') F'](xi_i, xi_j), block matrix over node pairs
    CMatrix rhs; // [F H](xi_i, 0) [H' F'](0, xi_j)
    double error = 0.0;
};

/// Both sides of the kernel product rule on the quadrature grid; d/dx of
/// H H' by centred differences with step dx.
ProductRuleReport product_rule_check(const KernelFunction& f, const HankelFunction& h,
                                     const HankelFunction& h_prime, const KernelFunction& f_prime,
                                     double x, const QuadratureGrid& quad, double dx);

struct UIdentityReport {
    double left_error = 0.0;  // ||(I - U) - U F||_max
    double right_error = 0.0; // ||(I - U) - F U||_max
    double derivative_error = -1.0; // ||U_x + U F_x U||_max, negative when not evaluated
};

/// Identities for U = (I + F)^{-1}, F = W Q the discrete operator.
UIdentityReport u_identity_check(const DiscreteKernel& q);

/// As above, adding the derivative identity by centred x-differences of the
/// kernels produced by q_of_x.
UIdentityReport u_identity_check(const std::function<DiscreteKernel(double)>& q_of_x, double x,
                                 double dx);

} // namespace marchenko
