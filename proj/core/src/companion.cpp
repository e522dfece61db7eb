#include "marchenko/companion.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "marchenko/error.hpp"

namespace marchenko {

namespace {

constexpr std::array<std::pair<CompanionKind, std::string_view>, 8> kNames{{
    {CompanionKind::adjoint, "adjoint"},
    {CompanionKind::neg_adjoint, "neg_adjoint"},
    {CompanionKind::transpose_rev_spacetime, "transpose_rev_spacetime"},
    {CompanionKind::transpose_rev_time, "transpose_rev_time"},
    {CompanionKind::neg_transpose, "neg_transpose"},
    {CompanionKind::neg_transpose_rev_spacetime, "neg_transpose_rev_spacetime"},
    {CompanionKind::neg_adjoint_rev_spacetime, "neg_adjoint_rev_spacetime"},
    {CompanionKind::neg_identity, "neg_identity"},
}};

} // namespace

std::string_view to_string(CompanionKind kind) noexcept {
    for (const auto& [k, name] : kNames)
        if (k == kind) return name;
    return "unknown";
}

std::optional<CompanionKind> parse_companion_kind(std::string_view name) noexcept {
    for (const auto& [k, n] : kNames)
        if (n == name) return k;
    return std::nullopt;
}

bool reverses_time(CompanionKind kind) noexcept {
    switch (kind) {
    case CompanionKind::transpose_rev_spacetime:
    case CompanionKind::transpose_rev_time:
    case CompanionKind::neg_transpose_rev_spacetime:
    case CompanionKind::neg_adjoint_rev_spacetime:
        return true;
    default:
        return false;
    }
}

bool reverses_space(CompanionKind kind) noexcept {
    switch (kind) {
    case CompanionKind::transpose_rev_spacetime:
    case CompanionKind::neg_transpose_rev_spacetime:
    case CompanionKind::neg_adjoint_rev_spacetime:
        return true;
    default:
        return false;
    }
}

bool conjugates(CompanionKind kind) noexcept {
    return kind == CompanionKind::adjoint || kind == CompanionKind::neg_adjoint ||
           kind == CompanionKind::neg_adjoint_rev_spacetime;
}

double companion_sign(CompanionKind kind) noexcept {
    switch (kind) {
    case CompanionKind::adjoint:
    case CompanionKind::transpose_rev_spacetime:
    case CompanionKind::transpose_rev_time:
        return 1.0;
    default:
        return -1.0;
    }
}

MatrixProfile companion_profile(const MatrixProfile& p, CompanionKind kind) {
    if (kind == CompanionKind::neg_identity)
        throw ConfigError("neg_identity has no companion profile; use kdv_Q");

    const int M = p.size();
    const bool reflect = reverses_space(kind);
    const bool conj = conjugates(kind);
    const double sign = companion_sign(kind);

    MatrixProfile out(p.grid, p.cols, p.rows, reflect ? -p.weight_rate : p.weight_rate,
                      reverses_time(kind) ? -p.time : p.time);
    for (int i = 0; i < M; ++i) {
        const int src = reflect ? (M - i) % M : i;
        const auto block = p.at_index(src);
        if (conj)
            out.at_index(i) = sign * block.adjoint();
        else
            out.at_index(i) = sign * block.transpose();
    }
    return out;
}

DispersionParams companion_parameters(CompanionKind, const DispersionParams& params) {
    return DispersionParams{-params.mu1, params.mu2};
}

double companion_consistency_residual(const MatrixProfile& p0, CompanionKind kind,
                                      const DispersionParams& params,
                                      std::span<const double> times) {
    if (times.size() < 3) throw ConfigError("consistency residual needs at least 3 times");
    const double dt = times[1] - times[0];
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs((times[i] - times[i - 1]) - dt) > 1e-12 * std::max(1.0, std::abs(dt)))
            throw ConfigError("consistency residual needs uniformly spaced times");

    const Evolver evolver(p0, params);
    std::vector<MatrixProfile> companions;
    companions.reserve(times.size());
    for (double t : times)
        companions.push_back(companion_profile(evolver.at(reverses_time(kind) ? -t : t), kind));
    return dispersion_residual(companions, dt, companion_parameters(kind, params));
}

} // namespace marchenko
