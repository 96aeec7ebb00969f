#pragma once

#include <limits>
#include <string>
#include <vector>

#include "vqopt/problem.hpp"
#include "vqopt/reference.hpp"
#include "vqopt/solver.hpp"

namespace vqopt {

/// Both sides of the per-iteration drift-plus-penalty inequality
///
///   Delta(t) + F(x(t)) <= F(x*) + alpha(t) [||x*-x(t-1)||^2 - ||x*-x(t)||^2]
///     + (1/2) [||G(x(t))||^2 - ||G(x(t-1))||^2]
///     + [ (beta^2 + L_f + w^T L_g)/2 - alpha(t) ] ||x(t)-x(t-1)||^2
///
/// evaluated from a StepInfo; linear_form drops the last term (valid
/// for linear g with constant alpha above the admissible floor).
struct DppCheck {
    bool holds = false;
    double slack = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

DppCheck dpp_bound_check(const ProblemSpec& spec, const StepInfo& info, double f_star,
                         std::span<const double> x_star, bool linear_form = false);

/// Counter for one named invariant.
struct InvariantStat {
    std::string name;
    long trials = 0;
    long violations = 0;
    double worst_slack = std::numeric_limits<double>::infinity();

    void observe(bool holds, double slack) {
        trials += 1;
        if (!holds) violations += 1;
        if (slack < worst_slack) worst_slack = slack;
    }
};

struct VerifyReport {
    std::vector<InvariantStat> checks;

    InvariantStat& stat(const std::string& name);
    bool all_pass() const;
    std::string to_json() const;
};

/// Attaches every applicable runtime invariant (queue facts, drift bound,
/// drift-plus-penalty, alpha monotonicity and cap, queue-norm bound, the
/// objective/violation rate bounds, running-average consistency, and the
/// projected-gradient equivalence on smooth problems) to one run of the
/// given algorithm and reports trial/violation counts. Tolerance 1e-9.
VerifyReport run_verify(const ProblemSpec& spec, const ReferenceSolution& ref,
                        const SolveOptions& opts);

}  // namespace vqopt
