#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vqopt/alpha.hpp"
#include "vqopt/exec.hpp"
#include "vqopt/problem.hpp"
#include "vqopt/queue.hpp"

namespace vqopt {

enum class Algorithm { NewConstant, NewAdaptive, YuNeely, PdSubgradient };

enum class RunStatus { Running, MaxIters, TargetGapMet, NanAbort };

const char* to_string(Algorithm a);
const char* to_string(RunStatus s);
std::optional<Algorithm> algorithm_from_string(const std::string& s);

/// Inner solver of the Yu-Neely baseline: accelerated proximal gradient on
/// the set-constrained strongly convex subproblem, run until the objective
/// decrease falls below eps or the budget is exhausted.
struct InnerSolverConfig {
    double eps = 1e-9;
    long budget = 5000;
};

struct SolveOptions {
    Algorithm algorithm = Algorithm::NewConstant;
    long max_iters = 1000;
    long stride = 1;
    bool diagnostics = false;  // assert queue invariants every iteration
    bool timing = false;       // record per-iteration wall time (otherwise 0)
    int threads = 1;

    /// Constant-mode alpha; 0 selects the default (beta^2 + L_f)/2 * (1+1e-3).
    double alpha = 0.0;
    InnerSolverConfig inner;

    /// Algorithm 1 parameters. lambda_max must be supplied (scalar broadcast
    /// happens at the CLI layer); the step size c must be positive.
    double pd_step = 0.0;
    std::vector<double> pd_lambda_max;

    /// Starting point x(-1); empty means the projection of 0 onto the box.
    std::vector<double> x_start;

    /// Optional early stop: both conditions (when set) must hold at a
    /// stride boundary. The gap proxy is F(xbar(t)) - F(xbar(t/2)).
    std::optional<double> target_gap;
    std::optional<double> target_violation;
};

/// Trace row: the state entering iteration t. F_x is F(x(t-1)), F_xbar and
/// the violation refer to xbar(t), queue_norm is ||Q(t)||, alpha_t the step
/// parameter for iteration t, drift is Delta(t-1). wall_time_ns is the
/// duration of the previous iteration when timing is enabled, else 0.
struct IterationRecord {
    long t = 0;
    double f_x = 0.0;
    double f_xbar = 0.0;
    double max_violation_xbar = 0.0;
    double queue_norm = 0.0;
    double alpha_t = 0.0;
    double drift = 0.0;
    std::int64_t wall_time_ns = 0;
};

/// Everything a per-iteration observer may inspect about iteration t.
struct StepInfo {
    long t = 0;
    const ProblemSpec* spec = nullptr;
    std::span<const double> x_prev;       // x(t-1)
    std::span<const double> x_now;        // x(t)
    std::span<const double> x_bar_next;   // xbar(t+1)
    std::span<const double> g_prev;       // G(x(t-1))
    std::span<const double> g_now;        // G(x(t))
    std::span<const double> multipliers;  // Q(t) + G(x(t-1))
    const QueueState* queue_before = nullptr;  // Q(t)
    const QueueState* queue_after = nullptr;   // Q(t+1)
    double alpha_t = 0.0;
    double drift = 0.0;  // Delta(t)
    std::span<const double> lambda;  // Algorithm 1 multipliers after the step
};

using StepObserver = std::function<void(const StepInfo&)>;

/// Full mutable state of one solver run plus its trace.
struct SolverRun {
    // State entering iteration t.
    std::vector<double> x;      // x(t-1)
    std::vector<double> x_bar;  // xbar(t); equals the start until the first step
    long averaged = 0;          // number of iterates in x_bar
    QueueState queue;           // Q(t)
    std::vector<double> g_x;    // G(x(t-1))
    AlphaRule alpha;
    std::vector<double> lambda;  // Algorithm 1 only
    long t = 0;

    // Scratch from the most recent step (observer support).
    std::vector<double> x_prev_snapshot;
    std::vector<double> g_prev_snapshot;
    std::vector<double> multipliers;
    QueueState queue_before;

    std::vector<IterationRecord> trace;
    RunStatus status = RunStatus::Running;
    std::vector<std::string> warnings;
    long last_inner_iters = 0;

    // Workspace.
    std::vector<double> grad_f, grads_g, g_new, ws_a, ws_b, ws_c, ws_d;
};

/// Initializes a run: projects the start into the box, evaluates G(x(-1)),
/// initializes queues (Algorithm 3/2) or multipliers (Algorithm 1) and
/// alpha(0).
SolverRun make_run(const ProblemSpec& spec, const SolveOptions& opts);

/// One iteration of the parallel primal-dual update: advance alpha (adaptive
/// mode), form the multipliers w = Q(t) + G(x(t-1)), solve every coordinate
/// subproblem, then update queue and running average.
void new_alg_step(const ProblemSpec& spec, SolverRun& run, const SolveOptions& opts);

/// One iteration of the Yu-Neely baseline: the full subproblem
/// argmin_X { F(x) + w^T G(x) + alpha ||x - x(t-1)||^2 } is solved by the
/// inner accelerated proximal-gradient loop, then the same queue/average
/// updates.
void yu_neely_step(const ProblemSpec& spec, SolverRun& run, const SolveOptions& opts);

/// One iteration of the primal-dual (Arrow-Hurwicz-Uzawa) subgradient
/// baseline with multiplier clipping to [0, lambda_max].
void pd_subgradient_step(const ProblemSpec& spec, SolverRun& run, const SolveOptions& opts);

/// Driver: runs the configured algorithm for max_iters iterations (or until
/// the optional targets are met), recording a trace row for every t with
/// t % stride == 0 plus the final state. Deterministic for fixed inputs.
SolverRun run(const ProblemSpec& spec, const SolveOptions& opts,
              const StepObserver& observer = {});

}  // namespace vqopt
