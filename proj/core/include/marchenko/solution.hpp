#pragma once

#include <string>
#include <vector>

#include "marchenko/scenario.hpp"

namespace marchenko {

struct SolutionResult {
    SolutionField field;
    PatchReport patch;
    /// Largest relative backward error of the Nystrom solves.
    double solver_residual = 0.0;
    /// Samples skipped because |det2| fell below the patch threshold.
    int skipped = 0;
    std::vector<std::string> warnings;
};

/// Runs the pipeline at every (x, t) sample of the scenario: evolve p, build
/// p~, assemble Q, solve for g and record g(0,0), det2 and the requested
/// slices. Samples are independent and are spread over `threads` workers;
/// the result does not depend on the thread count.
///
/// A sample with |det2| below the patch threshold is skipped (valid = 0) and
/// reported. When the regularised determinant is real along a line of fixed
/// x and changes sign between neighbouring t samples, the zero is located in
/// t and recorded as an event with located = true.
SolutionResult evaluate_solution(const Scenario& scenario, int threads = 1);

/// Closed form of g(0,0;x,t) for scalar data A e^{a s} with a companion that
/// does not reverse space; empty when the scenario is outside that family.
std::optional<cplx> rank_one_reference(const Scenario& scenario, double x, double t);

} // namespace marchenko
