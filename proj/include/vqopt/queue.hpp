#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace vqopt {

/// Virtual queue vector and its Lyapunov accounting. Along a solver run the
/// queue obeys, on inequality rows,
///   Q_k(t) >= 0,
///   Q_k(t) + G_k(x(t-1)) >= 0,
///   Q_k(t) >= sum_{tau < t} G_k(x(tau)),
///   ||Q(t)|| >= ||G(x(t-1))||  for t >= 1,
/// all of which the diagnostics mode asserts each iteration.
struct QueueState {
    std::vector<double> q;
    long t = 0;
    double lyapunov = 0.0;              // L(t) = 0.5 ||Q(t)||^2
    double last_drift = 0.0;            // L(t) - L(t-1)
    std::vector<double> cumulative_g;   // running sum of G(x(tau)), diagnostics only

    double norm() const;
};

/// Q_k(0) = max{0, -G_k(x(-1))}.
QueueState init_queue(std::span<const double> g_init);

/// Inequality rows: Q_k(t+1) = max{-G_k(x(t)), Q_k(t) + G_k(x(t))}.
/// Equality-masked rows use the signed additive rule Q_k(t+1) = Q_k(t) + G_k(x(t))
/// and are exempt from the nonnegativity invariants.
QueueState update_queue(QueueState state, std::span<const double> g_now,
                        std::span<const std::uint8_t> equality_mask = {});

struct BoundCheck {
    bool holds;
    double slack;
};

/// Drift bound: Delta(t) <= Q(t)^T G(x(t)) + ||G(x(t))||^2, where Delta is
/// the drift produced by applying the queue update to state_before.
BoundCheck drift_bound_check(const QueueState& state_before, std::span<const double> g_now,
                             std::span<const std::uint8_t> equality_mask = {});

}  // namespace vqopt
