#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "vqopt/instances.hpp"
#include "vqopt/diagnostics.hpp"
#include "vqopt/reference.hpp"
#include "vqopt/solver.hpp"

using namespace vqopt;

TEST_CASE("grid_solve recovers the qp1 optimum at 1e-4") {
    GeneratedInstance qp1 = gen_qp1();
    ReferenceSolution ref = grid_solve(qp1.spec, 1e-4);
    CHECK(std::abs(ref.x_star[0] - 1.0) <= 1e-4 + 1e-12);
    CHECK(std::abs(ref.f_star - 1.0) <= 3e-4);
    CHECK(ref.method == ReferenceSolution::Method::Grid);
    CHECK(ref.lambda_star[0] == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("grid_solve reports the most nearly feasible point when infeasible") {
    ProblemSpec spec;
    spec.n = 1;
    spec.m = 1;
    spec.f = zero_oracle(1);
    SmoothOracle one = zero_oracle(1);
    one.value = [](std::span<const double>) { return 1.0; };  // g == 1 > 0 everywhere
    spec.g.push_back(one);
    spec.g_tilde.push_back(SeparableTerm::zero());
    spec.box = BoxSet::bounded(1, -1.0, 1.0);
    spec.beta = 1.0;
    CHECK_THROWS_WITH_AS(grid_solve(spec, 1e-2),
                         doctest::Contains("most nearly feasible"), std::runtime_error);
}

TEST_CASE("grid_solve rejects large or unbounded problems") {
    GeneratedInstance big = gen_gmv_l2(5, 1);
    CHECK_THROWS_AS(grid_solve(big.spec, 1e-2), std::invalid_argument);
    GeneratedInstance lasso = gen_constrained_lasso(4, 2, 1, 0.0);
    ProblemSpec unbounded = lasso.spec;
    unbounded.box = BoxSet::unbounded(2);
    CHECK_THROWS_AS(grid_solve(unbounded, 1e-2), std::invalid_argument);
}

TEST_CASE("grid_solve on ball1 n=1 matches the analytic KKT point") {
    GeneratedInstance ball = gen_ball1_with({1.0}, 0.25);
    ReferenceSolution ref = grid_solve(ball.spec, 1e-4);
    CHECK(std::abs(ref.x_star[0] + 0.5) <= 1e-4 + 1e-12);
    CHECK(ref.lambda_star[0] == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("refining the grid never worsens the optimum beyond the prior tolerance") {
    GeneratedInstance ball = gen_ball1(2, 55);
    double res = 4e-2;
    ReferenceSolution prev = grid_solve(ball.spec, res);
    for (int level = 0; level < 3; ++level) {
        res *= 0.5;
        ReferenceSolution next = grid_solve(ball.spec, res);
        CHECK(next.f_star <= prev.f_star + prev.tolerance + 1e-12);
        prev = next;
    }
}

TEST_CASE("dual_estimate on analytic instances") {
    GeneratedInstance qp1 = gen_qp1();
    DualEstimate d = dual_estimate(qp1.spec, std::vector<double>{1.0});
    CHECK(std::abs(d.lambda[0] - 2.0) <= 1e-3);
    CHECK(!d.low_confidence);

    GeneratedInstance ball = gen_ball1_with({1.0}, 0.25);
    DualEstimate db = dual_estimate(ball.spec, std::vector<double>{-0.5});
    CHECK(std::abs(db.lambda[0] - 1.0) <= 1e-3);
    CHECK(!db.low_confidence);
}

TEST_CASE("dual_estimate returns zero multipliers when nothing is active") {
    GeneratedInstance ball = gen_ball1_with({1.0}, 0.25);
    // Interior point: the ball constraint is slack, stationarity fails, but
    // the fitted multiplier on inactive constraints must be zero.
    DualEstimate d = dual_estimate(ball.spec, std::vector<double>{0.1});
    CHECK(d.lambda[0] == 0.0);
    CHECK(d.low_confidence);  // 0.1 is not a stationary point for min x
}

TEST_CASE("dual_estimate flags an inconsistent candidate as low confidence") {
    GeneratedInstance qp1 = gen_qp1();
    DualEstimate d = dual_estimate(qp1.spec, std::vector<double>{2.0});
    CHECK(d.low_confidence);
}

TEST_CASE("long_run_reference on qp1 approaches F* within the stated tolerance") {
    GeneratedInstance qp1 = gen_qp1();
    ReferenceSolution ref = long_run_reference(qp1.spec, 1000000);
    // The rate guarantee bounds the gap from above by alpha * D^2 / T = 2e-6
    // band at alpha = 1.5 here; the feasibility side adds at most twice the
    // violation bound, approached from below.
    CHECK(ref.f_star - 1.0 <= 2e-6 + 1e-9);
    CHECK(std::abs(ref.f_star - 1.0) <= 1.5e-5);
    CHECK(ref.method == ReferenceSolution::Method::LongRun);
    CHECK(ref.tolerance > 0.0);
    CHECK(ref.f_star - 1.0 <= ref.tolerance + 1e-9);
}

TEST_CASE("long_run_reference rejects small budgets") {
    GeneratedInstance qp1 = gen_qp1();
    CHECK_THROWS_AS(long_run_reference(qp1.spec, 99999), std::invalid_argument);
}

TEST_CASE("long runs of the new algorithm and tuned Algorithm 1 agree on gmv-l2") {
    GeneratedInstance gmv = gen_gmv_l2(50, 1);
    const long iters = 200000;
    ReferenceSolution new_alg = long_run_reference(gmv.spec, iters);

    // Tune the subgradient step over the documented grid and keep the best
    // feasible outcome.
    const double scale = 1.0 / std::sqrt(static_cast<double>(iters));
    double best_f = std::numeric_limits<double>::infinity();
    for (double c : {1.0 * scale, 0.1 * scale, 0.01 * scale}) {
        SolveOptions opts;
        opts.algorithm = Algorithm::PdSubgradient;
        opts.pd_step = c;
        opts.pd_lambda_max = default_lambda_max(gmv.spec, new_alg);
        opts.max_iters = iters;
        opts.stride = iters;
        SolverRun r = run(gmv.spec, opts);
        const double viol = max_violation(gmv.spec, r.x_bar);
        if (viol <= 1e-3) best_f = std::min(best_f, gmv.spec.F(r.x_bar));
    }
    REQUIRE(std::isfinite(best_f));
    CHECK(std::abs(best_f - new_alg.f_star) <= 1e-3 * std::abs(new_alg.f_star));
}

TEST_CASE("reference cache round-trips and is keyed by the descriptor") {
    const std::string dir = (std::filesystem::temp_directory_path() / "vqopt-cache-test").string();
    std::filesystem::remove_all(dir);
    GeneratedInstance ball = gen_ball1(2, 5);
    REQUIRE(ball.reference.has_value());
    const std::string key = ball.desc.key();
    CHECK(!cache_load(dir, key).has_value());
    cache_store(dir, key, *ball.reference);
    auto loaded = cache_load(dir, key);
    REQUIRE(loaded.has_value());
    CHECK(loaded->x_star == ball.reference->x_star);
    CHECK(loaded->lambda_star == ball.reference->lambda_star);
    CHECK(loaded->f_star == ball.reference->f_star);
    CHECK(loaded->method == ball.reference->method);
    CHECK(!cache_load(dir, "some-other-key").has_value());
    std::filesystem::remove_all(dir);
}

TEST_CASE("reference solutions pass their own feasibility and KKT invariants") {
    for (GeneratedInstance inst : {gen_qp1(), gen_ball1(2, 5), gen_ball1_with({1.0}, 0.25)}) {
        REQUIRE(inst.reference.has_value());
        const ReferenceSolution& ref = *inst.reference;
        const double tol = std::max(ref.tolerance, 1e-9);
        // x* in X.
        for (int i = 0; i < inst.spec.n; ++i) {
            const auto iu = static_cast<std::size_t>(i);
            CHECK(ref.x_star[iu] >= inst.spec.box.lower[iu] - tol);
            CHECK(ref.x_star[iu] <= inst.spec.box.upper[iu] + tol);
        }
        // Feasibility and complementary slackness entrywise.
        const std::vector<double> g = eval_G(inst.spec, ref.x_star);
        for (int k = 0; k < inst.spec.m; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            CHECK(g[ku] <= tol);
            CHECK(std::abs(ref.lambda_star[ku] * g[ku]) <= tol);
        }
        // F* is the exact re-evaluation.
        CHECK(ref.f_star == inst.spec.F(ref.x_star));
    }
}

TEST_CASE("run_verify detects violations against a corrupted reference") {
    GeneratedInstance qp1 = gen_qp1();
    SolveOptions opts;
    opts.algorithm = Algorithm::NewConstant;
    opts.alpha = 2.0;
    opts.max_iters = 500;
    opts.stride = 500;

    VerifyReport clean = run_verify(qp1.spec, *qp1.reference, opts);
    CHECK(clean.all_pass());

    ReferenceSolution wrong = *qp1.reference;
    wrong.f_star = 0.5;  // below the true optimum: the rate bound must break
    VerifyReport dirty = run_verify(qp1.spec, wrong, opts);
    CHECK(!dirty.all_pass());
}

TEST_CASE("default Algorithm 1 cap follows the fitted multipliers") {
    GeneratedInstance qp1 = gen_qp1();
    const std::vector<double> cap = default_lambda_max(qp1.spec, *qp1.reference);
    REQUIRE(cap.size() == 1);
    CHECK(cap[0] == doctest::Approx(10.0 * 3.0));
}
