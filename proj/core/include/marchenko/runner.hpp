#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "marchenko/solution.hpp"

namespace marchenko {

inline constexpr int exit_clean = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_patch = 2;

std::string_view version() noexcept;

/// The residual that certifies the scenario's equation: the kernel form for
/// kernel kinds (when slices are present), the coupled pair for the
/// diffusion system, the local PDE otherwise. Empty report when the sample
/// grid cannot carry the stencil.
struct NamedResidual {
    std::string name;
    ResidualReport report;
    bool evaluated = false;
    std::string note;
};

std::vector<NamedResidual> residual_suite(const Scenario& s, const SolutionResult& r);

struct RunSummary {
    int exit_code = exit_clean;
    std::vector<std::filesystem::path> files;
    SolutionResult result;
    std::vector<NamedResidual> residuals;
};

/// solve: writes center.tsv, det2.tsv, residuals.tsv, slices.tsv /
/// companion.tsv when requested, and manifest.json into out_dir.
RunSummary run(const Scenario& s, const std::filesystem::path& out_dir, int threads = 1);

struct StudyLevel {
    int level = 0;
    int intervals = 0;
    int node_count = 0;
    double dx = 0.0;
    double dt = 0.0;
    double metric = 0.0;
};

struct StudyReport {
    std::string metric; // "reference" or the residual name
    std::vector<StudyLevel> levels;
    std::vector<double> ratios;
    double fitted_order = 0.0;
    int skipped = 0;
};

/// Scenario at refinement level l: quadrature spacing, x and t steps halved
/// l times over the same extents; the master grid is refined when needed to
/// keep every spacing a multiple of h_x.
Scenario refine(const Scenario& s, int level);

/// Requires levels >= 3. The metric is the error against the rank-one closed
/// form when one exists, else the certifying residual, both taken at the
/// level-0 points that carry the stencil.
StudyReport convergence_study(const Scenario& s, int levels, int threads = 1);

void print_study(std::ostream& os, const StudyReport& r);

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    bool informational = false;
};

struct VerifyReport {
    std::vector<Check> checks;
    int exit_code = exit_clean;
};

/// Identity and residual checks on the scenario, no output files.
VerifyReport verify(const Scenario& s, int threads = 1);

void print_verify(std::ostream& os, const VerifyReport& r);

} // namespace marchenko
