#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vqopt/exec.hpp"
#include "vqopt/problem.hpp"

namespace vqopt {

/// Independent reference solution (x*, lambda*, F*) used by acceptance tests
/// and bound diagnostics.
struct ReferenceSolution {
    enum class Method { Analytic, Grid, LongRun };

    std::vector<double> x_star;
    std::vector<double> lambda_star;
    double f_star = 0.0;
    Method method = Method::Analytic;
    double tolerance = 0.0;
    double residual = 0.0;      // stationarity residual of the multiplier fit
    bool low_confidence = false;

    double lambda_norm() const;
};

const char* to_string(ReferenceSolution::Method m);
std::optional<ReferenceSolution::Method> method_from_string(const std::string& s);

/// Exhaustive scan of the box grid at the given resolution (n <= 3, finite
/// box). Feasibility filter admits slack resolution * beta; ties resolve to
/// the lexicographically smallest grid index, so parallel scans are
/// deterministic. Throws (naming the most nearly feasible point) when no
/// grid point is feasible.
ReferenceSolution grid_solve(const ProblemSpec& spec, double resolution,
                             const Exec& ex = Exec::serial());

struct DualEstimate {
    std::vector<double> lambda;
    double residual = 0.0;
    bool low_confidence = false;  // residual above 1e-3
};

/// Least-squares multiplier fit at x_star: lambda >= 0 supported on the
/// active constraints minimizing the projected stationarity residual of the
/// Lagrangian (box normal cones and l1 kink intervals respected).
DualEstimate dual_estimate(const ProblemSpec& spec, std::span<const double> x_star,
                           double active_tol = 1e-6);

/// Long-horizon baseline: runs the adaptive-alpha solver for the full budget
/// (>= 1e5 iterations) and returns xbar(T) with a bound-derived tolerance.
/// Never used to validate the same algorithm's bound constants.
ReferenceSolution long_run_reference(const ProblemSpec& spec, long iterations, int threads = 1);

/// Default Algorithm 1 multiplier cap 10 (||lambda*|| + 1).
std::vector<double> default_lambda_max(const ProblemSpec& spec, const ReferenceSolution& ref);

// Small JSON cache keyed by instance-descriptor hash so CI reuses
// expensive references.
std::optional<ReferenceSolution> cache_load(const std::string& dir, const std::string& key);
void cache_store(const std::string& dir, const std::string& key, const ReferenceSolution& ref);

}  // namespace vqopt
