#include "vqopt/queue.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vqopt {

namespace {

double half_norm_sq(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return 0.5 * s;
}

}  // namespace

double QueueState::norm() const {
    double s = 0.0;
    for (double x : q) s += x * x;
    return std::sqrt(s);
}

QueueState init_queue(std::span<const double> g_init) {
    QueueState st;
    st.q.resize(g_init.size());
    for (std::size_t k = 0; k < g_init.size(); ++k) st.q[k] = std::max(0.0, -g_init[k]);
    st.t = 0;
    st.lyapunov = half_norm_sq(st.q);
    st.last_drift = 0.0;
    st.cumulative_g.assign(g_init.size(), 0.0);
    return st;
}

QueueState update_queue(QueueState state, std::span<const double> g_now,
                        std::span<const std::uint8_t> equality_mask) {
    if (g_now.size() != state.q.size())
        throw std::invalid_argument("update_queue: dimension mismatch");
    if (!equality_mask.empty() && equality_mask.size() != state.q.size())
        throw std::invalid_argument("update_queue: mask dimension mismatch");
    for (std::size_t k = 0; k < state.q.size(); ++k) {
        const bool eq = !equality_mask.empty() && equality_mask[k] != 0;
        state.q[k] = eq ? state.q[k] + g_now[k]
                        : std::max(-g_now[k], state.q[k] + g_now[k]);
        state.cumulative_g[k] += g_now[k];
    }
    const double l_new = half_norm_sq(state.q);
    state.last_drift = l_new - state.lyapunov;
    state.lyapunov = l_new;
    state.t += 1;
    return state;
}

BoundCheck drift_bound_check(const QueueState& state_before, std::span<const double> g_now,
                             std::span<const std::uint8_t> equality_mask) {
    const QueueState after = update_queue(state_before, g_now, equality_mask);
    const double drift = after.lyapunov - state_before.lyapunov;
    double bound = 0.0;
    for (std::size_t k = 0; k < g_now.size(); ++k)
        bound += state_before.q[k] * g_now[k] + g_now[k] * g_now[k];
    return BoundCheck{drift <= bound + 1e-9, bound - drift};
}

}  // namespace vqopt
