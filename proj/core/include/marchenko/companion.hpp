#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "marchenko/dispersion.hpp"

namespace marchenko {

/// Choice of the companion operator P~ built from P.
enum class CompanionKind {
    adjoint,                     // P~ = P^dagger
    neg_adjoint,                 // P~ = -P^dagger
    transpose_rev_spacetime,     // p~(s;t) = p^T(-s;-t)
    transpose_rev_time,          // p~(s;t) = p^T(s;-t)
    neg_transpose,               // P~ = -P^T
    neg_transpose_rev_spacetime, // p~(s;t) = -p^T(-s;-t)
    neg_adjoint_rev_spacetime,   // p~(s;t) = -p^dagger(-s;-t)
    neg_identity,                // P~ = -id (not Hankel; Q = -P)
};

std::string_view to_string(CompanionKind kind) noexcept;
std::optional<CompanionKind> parse_companion_kind(std::string_view name) noexcept;

bool reverses_time(CompanionKind kind) noexcept;
bool reverses_space(CompanionKind kind) noexcept;
bool conjugates(CompanionKind kind) noexcept;
double companion_sign(CompanionKind kind) noexcept;

/// Companion profile p~ from p. For time-reversing kinds the caller passes p
/// evolved to -t; the result is stamped with time -p.time. Space reversal maps
/// node s_i to -s_i; the extreme node -X takes its value by periodic wrap.
MatrixProfile companion_profile(const MatrixProfile& p, CompanionKind kind);

/// (mu~1, mu~2) = (-mu1, mu2).
DispersionParams companion_parameters(CompanionKind kind, const DispersionParams& params);

/// Finite-difference residual of dp~/dt = mu~1 p~'' + mu~2 p~''' where p~ is
/// built from the evolved p at each of the (uniformly spaced) times.
double companion_consistency_residual(const MatrixProfile& p0, CompanionKind kind,
                                      const DispersionParams& params,
                                      std::span<const double> times);

} // namespace marchenko
