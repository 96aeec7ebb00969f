#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "vqopt/queue.hpp"
#include "vqopt/rng.hpp"

using namespace vqopt;

TEST_CASE("init_queue clamps negative constraint values") {
    CHECK(init_queue(std::vector<double>{2.0}).q == std::vector<double>{0.0});
    CHECK(init_queue(std::vector<double>{-3.0}).q == std::vector<double>{3.0});
    CHECK(init_queue(std::vector<double>{-1.0, 4.0, 0.0}).q ==
          std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("update_queue max rule and equality rule") {
    QueueState st = init_queue(std::vector<double>{0.0});
    st.q = {2.0};
    st.lyapunov = 2.0;
    QueueState up = update_queue(st, std::vector<double>{-5.0});
    CHECK(up.q == std::vector<double>{5.0});  // max{5, -3}

    QueueState zero = init_queue(std::vector<double>{0.0});
    QueueState up2 = update_queue(zero, std::vector<double>{3.0});
    CHECK(up2.q == std::vector<double>{3.0});  // max{-3, 3}

    QueueState eq = init_queue(std::vector<double>{-1.0});
    CHECK(eq.q == std::vector<double>{1.0});
    const std::vector<std::uint8_t> mask{1};
    QueueState up3 = update_queue(eq, std::vector<double>{-0.4}, mask);
    CHECK(up3.q[0] == doctest::Approx(0.6));
}

TEST_CASE("update_queue tracks iteration count, lyapunov, drift, cumulative G") {
    QueueState st = init_queue(std::vector<double>{-2.0});  // Q(0) = [2], L = 2
    CHECK(st.t == 0);
    CHECK(st.lyapunov == doctest::Approx(2.0));
    QueueState up = update_queue(st, std::vector<double>{1.0});
    CHECK(up.t == 1);
    CHECK(up.q[0] == doctest::Approx(3.0));
    CHECK(up.lyapunov == doctest::Approx(4.5));
    CHECK(up.last_drift == doctest::Approx(2.5));
    CHECK(up.cumulative_g[0] == doctest::Approx(1.0));
    QueueState up2 = update_queue(up, std::vector<double>{-0.5});
    CHECK(up2.cumulative_g[0] == doctest::Approx(0.5));
    CHECK(up2.q[0] >= up2.cumulative_g[0]);
}

TEST_CASE("update_queue rejects dimension mismatch") {
    QueueState st = init_queue(std::vector<double>{0.0, 0.0});
    CHECK_THROWS_AS(update_queue(st, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("drift bound examples") {
    QueueState a = init_queue(std::vector<double>{0.0});  // Q = [0]
    BoundCheck ca = drift_bound_check(a, std::vector<double>{1.0});
    // Delta = 1/2, bound = 1.
    CHECK(ca.holds);
    CHECK(ca.slack == doctest::Approx(0.5));

    QueueState b = init_queue(std::vector<double>{-2.0});  // Q = [2]
    BoundCheck cb = drift_bound_check(b, std::vector<double>{0.0});
    CHECK(cb.holds);
    CHECK(cb.slack == doctest::Approx(0.0));
}

TEST_CASE("drift bound holds on 10^4 random (Q, G) pairs") {
    CounterRng rng(31337);
    for (int trial = 0; trial < 10000; ++trial) {
        const int m = 1 + static_cast<int>(rng.next_u64() % 5);
        QueueState st;
        st.q.resize(static_cast<std::size_t>(m));
        st.cumulative_g.assign(static_cast<std::size_t>(m), 0.0);
        std::vector<double> g(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) {
            st.q[static_cast<std::size_t>(k)] = rng.uniform(0.0, 10.0);
            g[static_cast<std::size_t>(k)] = rng.uniform(-10.0, 10.0);
        }
        double l = 0.0;
        for (double v : st.q) l += v * v;
        st.lyapunov = 0.5 * l;
        const BoundCheck c = drift_bound_check(st, g);
        REQUIRE(c.holds);
    }
}

TEST_CASE("queue invariants persist through a long random update sequence") {
    CounterRng rng(909);
    QueueState st = init_queue(std::vector<double>{-0.3, 0.7});
    std::vector<double> prev_g{-0.3, 0.7};
    for (int t = 0; t < 2000; ++t) {
        std::vector<double> g{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        st = update_queue(st, g);
        // Queue and multiplier nonnegativity plus the cumulative-sum domination.
        for (int k = 0; k < 2; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            REQUIRE(st.q[ku] >= 0.0);
            REQUIRE(st.q[ku] + g[ku] >= -1e-9);
            REQUIRE(st.q[ku] >= st.cumulative_g[ku] - 1e-9);
        }
        double gn = 0.0;
        for (double v : g) gn += v * v;
        REQUIRE(st.norm() * st.norm() >= gn - 1e-9);
        prev_g = g;
    }
}
