#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "marchenko/equations.hpp"

namespace marchenko {

struct Tolerances {
    double decay = 1e-10;
    double patch_threshold = 1e-8;
    double solver = 1e-10;
    double residual = 1e-3; // pass mark for `verify`
    int max_dense = 4096;   // bound on (N+1) * max(n, m)
};

struct OutputRequest {
    bool slices = false;
    bool companion = false;
};

struct Scenario {
    std::string name;
    EquationSpec equation;
    int rows = 1;
    int cols = 1;
    InitialDataSpec initial;
    double half_width = 32.0;
    int node_count = 2048;
    double truncation = 15.0;
    int intervals = 240;
    std::vector<double> x;
    std::vector<double> t;
    OutputRequest outputs;
    Tolerances tolerances;
    /// Scenario text as read, echoed into the run manifest.
    std::string source;

    MasterGrid master() const { return make_uniform_grid(half_width, node_count); }
    QuadratureGrid quadrature() const;
    bool needs_companion_field() const;
};

Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text);

/// Checks the kind/parameter/companion table, dimensions and grid
/// commensurability. Throws ConfigError with the first violation.
void validate(const Scenario& s);

/// Non-fatal diagnostics: data decay at the domain edge and at -L.
std::vector<std::string> scenario_warnings(const Scenario& s);

/// MARCHENKO_DECAY_TOL, MARCHENKO_PATCH_THRESHOLD, MARCHENKO_SOLVER_TOL,
/// MARCHENKO_RESIDUAL_TOL, MARCHENKO_MAX_DENSE.
void apply_env_overrides(Tolerances& tol);

/// Uniform samples from..to inclusive, snapped to multiples of step.
std::vector<double> uniform_samples(double from, double to, int count);

} // namespace marchenko
