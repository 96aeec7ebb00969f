#include "vqopt/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "vqopt/kernels.hpp"

namespace vqopt {

const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::NewConstant: return "new-constant";
        case Algorithm::NewAdaptive: return "new-adaptive";
        case Algorithm::YuNeely: return "yu-neely";
        case Algorithm::PdSubgradient: return "pd-subgradient";
    }
    return "?";
}

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Running: return "running";
        case RunStatus::MaxIters: return "max_iters";
        case RunStatus::TargetGapMet: return "target_gap_met";
        case RunStatus::NanAbort: return "nan_abort";
    }
    return "?";
}

std::optional<Algorithm> algorithm_from_string(const std::string& s) {
    if (s == "new-constant") return Algorithm::NewConstant;
    if (s == "new-adaptive") return Algorithm::NewAdaptive;
    if (s == "yu-neely") return Algorithm::YuNeely;
    if (s == "pd-subgradient") return Algorithm::PdSubgradient;
    return std::nullopt;
}

namespace {

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

double vec_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

AlphaRule build_alpha(const ProblemSpec& spec, const SolveOptions& opts) {
    switch (opts.algorithm) {
        case Algorithm::NewAdaptive:
            return AlphaRule::adaptive();
        case Algorithm::NewConstant:
        case Algorithm::YuNeely:
            return opts.alpha > 0.0 ? AlphaRule::constant(opts.alpha, spec.beta, spec.l_f())
                                    : AlphaRule::constant_default(spec.beta, spec.l_f());
        case Algorithm::PdSubgradient:
            // No proximal weight; the trace column reports the step size c.
            return AlphaRule::constant(opts.pd_step > 0.0 ? opts.pd_step : 1.0, 0.0, 0.0);
    }
    return AlphaRule::constant(1.0, 0.0, 0.0);
}

void compute_multipliers(SolverRun& run) {
    const std::size_t m = run.queue.q.size();
    run.multipliers.resize(m);
    for (std::size_t k = 0; k < m; ++k) run.multipliers[k] = run.queue.q[k] + run.g_x[k];
}

void update_average(SolverRun& run, std::span<const double> x_new) {
    const double a = static_cast<double>(run.averaged);
    const double w_old = a / (a + 1.0);
    const double w_new = 1.0 / (a + 1.0);
    for (std::size_t i = 0; i < run.x_bar.size(); ++i)
        run.x_bar[i] = run.x_bar[i] * w_old + x_new[i] * w_new;
    run.averaged += 1;
}

// Shared tail of the Algorithm 2/3 steps: evaluate G(x(t)), update the
// queue, fold x(t) into the running average, roll the iterate forward.
// x_new must not alias run.x.
void finish_primal_dual_step(const ProblemSpec& spec, SolverRun& run,
                             std::span<const double> x_new) {
    run.g_new.resize(static_cast<std::size_t>(spec.m));
    eval_G(spec, x_new, std::span<double>(run.g_new));
    if (!all_finite(x_new) || !all_finite(run.g_new)) {
        run.status = RunStatus::NanAbort;
        run.warnings.push_back("non-finite oracle output at iteration " + std::to_string(run.t));
        return;
    }
    run.x_prev_snapshot.assign(run.x.begin(), run.x.end());
    run.g_prev_snapshot.assign(run.g_x.begin(), run.g_x.end());
    run.queue_before = run.queue;
    run.queue = update_queue(std::move(run.queue), run.g_new, spec.equality_mask);
    update_average(run, x_new);
    run.x.assign(x_new.begin(), x_new.end());
    run.g_x = run.g_new;
    run.t += 1;
}

}  // namespace

SolverRun make_run(const ProblemSpec& spec, const SolveOptions& opts) {
    spec.validate();
    if (opts.max_iters < 1) throw std::invalid_argument("SolveOptions: max_iters must be >= 1");
    if (opts.stride < 1) throw std::invalid_argument("SolveOptions: stride must be >= 1");

    SolverRun run;
    const auto nu = static_cast<std::size_t>(spec.n);
    if (opts.x_start.empty()) {
        std::vector<double> zeros(nu, 0.0);
        run.x = spec.box.project(zeros);
    } else {
        if (static_cast<int>(opts.x_start.size()) != spec.n)
            throw std::invalid_argument("SolveOptions: x_start has wrong dimension");
        run.x = spec.box.project(opts.x_start);
    }
    run.x_bar = run.x;
    run.g_x = eval_G(spec, run.x);
    if (!all_finite(run.g_x)) throw std::invalid_argument("make_run: G is non-finite at the start");

    if (opts.algorithm == Algorithm::PdSubgradient) {
        if (!(opts.pd_step > 0.0))
            throw std::invalid_argument("SolveOptions: pd_step must be positive");
        if (static_cast<int>(opts.pd_lambda_max.size()) != spec.m)
            throw std::invalid_argument("SolveOptions: pd_lambda_max must have length m");
        for (double v : opts.pd_lambda_max)
            if (!(v > 0.0))
                throw std::invalid_argument("SolveOptions: pd_lambda_max must be positive");
        run.lambda.assign(static_cast<std::size_t>(spec.m), 0.0);
        run.averaged = 1;  // Algorithm 1 averages include the starting point
    } else {
        run.averaged = 0;
    }
    run.queue = init_queue(run.g_x);
    run.queue_before = run.queue;

    run.alpha = build_alpha(spec, opts);
    compute_multipliers(run);
    run.alpha.initialize(spec, run.multipliers);

    run.grad_f.assign(nu, 0.0);
    run.grads_g.assign(static_cast<std::size_t>(spec.m) * nu, 0.0);
    run.ws_a.assign(nu, 0.0);
    run.ws_b.assign(nu, 0.0);
    run.ws_c.assign(nu, 0.0);
    run.ws_d.assign(nu, 0.0);
    return run;
}

void new_alg_step(const ProblemSpec& spec, SolverRun& run, const SolveOptions& opts) {
    const Exec ex{opts.threads};
    const auto nu = static_cast<std::size_t>(spec.n);

    compute_multipliers(run);
    run.alpha.advance(spec, run.multipliers);
    const double alpha = run.alpha.current();

    spec.f.gradient(run.x, std::span<double>(run.grad_f), ex);
    for (int k = 0; k < spec.m; ++k)
        spec.g[static_cast<std::size_t>(k)].gradient(
            run.x, std::span<double>(run.grads_g.data() + static_cast<std::size_t>(k) * nu, nu),
            ex);
    if (!all_finite(run.grad_f) || !all_finite(run.grads_g) || !all_finite(run.g_x)) {
        run.status = RunStatus::NanAbort;
        run.warnings.push_back("non-finite gradient at iteration " + std::to_string(run.t));
        return;
    }

    std::vector<double>& x_new = run.ws_a;
    if (spec.closed_form_l1()) {
        coordinate_pass_l1(spec, run.x, run.multipliers, run.grad_f, run.grads_g, alpha,
                           std::span<double>(x_new), ex);
    } else {
        coordinate_pass_generic(spec, run.x, run.multipliers, run.grad_f, run.grads_g, alpha,
                                std::span<double>(x_new), ex);
    }
    finish_primal_dual_step(spec, run, x_new);
}

namespace {

// Subproblem objective of Algorithm 2: F(x) + w^T G(x) + alpha ||x - x_c||^2.
double inner_objective(const ProblemSpec& spec, std::span<const double> x,
                       std::span<const double> w, std::span<const double> x_c, double alpha) {
    double v = spec.f.value(x) + spec.f_tilde.value(x);
    for (int k = 0; k < spec.m; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        v += w[ku] * (spec.g[ku].value(x) + spec.g_tilde[ku].value(x));
    }
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - x_c[i];
        q += d * d;
    }
    return v + alpha * q;
}

}  // namespace

void yu_neely_step(const ProblemSpec& spec, SolverRun& run, const SolveOptions& opts) {
    const Exec ex{opts.threads};
    const auto nu = static_cast<std::size_t>(spec.n);

    compute_multipliers(run);
    run.alpha.advance(spec, run.multipliers);
    const double alpha = run.alpha.current();
    const std::span<const double> w(run.multipliers);

    run.last_inner_iters = 0;
    if (opts.inner.budget <= 0) {
        run.warnings.push_back("inner budget is zero at iteration " + std::to_string(run.t) +
                               "; keeping previous iterate");
        std::vector<double>& same = run.ws_a;
        same.assign(run.x.begin(), run.x.end());
        finish_primal_dual_step(spec, run, same);
        return;
    }

    const std::vector<double> x_c(run.x);

    // Smoothness modulus of the smooth part f + w^T g + alpha ||. - x_c||^2.
    double l_inner = spec.l_f() + 2.0 * alpha;
    for (int k = 0; k < spec.m; ++k)
        l_inner += run.multipliers[static_cast<std::size_t>(k)] *
                   spec.g[static_cast<std::size_t>(k)].smoothness;

    double e_total = spec.f_tilde.l1_coeff();
    for (int k = 0; k < spec.m; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (spec.g_tilde[ku].kind() == SeparableTerm::Kind::WeightedL1)
            e_total += run.multipliers[ku] * spec.g_tilde[ku].l1_coeff();
    }
    const bool closed_form = spec.closed_form_l1();

    std::vector<double>& xk = run.ws_a;      // accepted inner iterate
    std::vector<double>& yk = run.ws_b;      // extrapolated point
    std::vector<double>& x_next = run.ws_c;  // candidate
    std::vector<double>& gbuf = run.ws_d;    // gradient of the smooth part
    xk.assign(x_c.begin(), x_c.end());
    yk.assign(x_c.begin(), x_c.end());

    double phi_prev = inner_objective(spec, xk, w, x_c, alpha);
    std::vector<double> x_best = xk;
    double phi_best = phi_prev;
    double theta = 1.0;
    bool converged = false;

    for (long j = 0; j < opts.inner.budget; ++j) {
        run.last_inner_iters = j + 1;
        spec.f.gradient(yk, std::span<double>(gbuf), ex);
        for (int k = 0; k < spec.m; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            spec.g[ku].gradient(yk, std::span<double>(run.grad_f), ex);  // grad_f as scratch
            const double wk = run.multipliers[ku];
            for (std::size_t i = 0; i < nu; ++i) gbuf[i] += wk * run.grad_f[i];
        }
        for (std::size_t i = 0; i < nu; ++i) gbuf[i] += 2.0 * alpha * (yk[i] - x_c[i]);
        if (!all_finite(gbuf)) {
            run.status = RunStatus::NanAbort;
            run.warnings.push_back("non-finite gradient in inner solve at iteration " +
                                   std::to_string(run.t));
            return;
        }

        // Proximal step: per coordinate, argmin (L/2)(x - y_i)^2 + gbuf_i x + ns(x).
        if (closed_form) {
            parallel_for(spec.n, ex, [&](std::int64_t i) {
                const auto iu = static_cast<std::size_t>(i);
                CoordinateSubproblem sub{0.5 * l_inner, yk[iu], gbuf[iu], e_total,
                                         spec.box.lower[iu], spec.box.upper[iu]};
                x_next[iu] = solve_l1_scalar(sub);
            });
        } else {
            parallel_for(spec.n, ex, [&](std::int64_t ii) {
                const int i = static_cast<int>(ii);
                const auto iu = static_cast<std::size_t>(i);
                ScalarPiece composite;
                composite.value = [&spec, &w, i](double x) {
                    double v = spec.f_tilde.value_at(i, x);
                    for (int k = 0; k < spec.m; ++k)
                        v += w[static_cast<std::size_t>(k)] *
                             spec.g_tilde[static_cast<std::size_t>(k)].value_at(i, x);
                    return v;
                };
                composite.subgrad = [&spec, &w, i](double x) {
                    double v = spec.f_tilde.subgrad_at(i, x);
                    for (int k = 0; k < spec.m; ++k)
                        v += w[static_cast<std::size_t>(k)] *
                             spec.g_tilde[static_cast<std::size_t>(k)].subgrad_at(i, x);
                    return v;
                };
                x_next[iu] = solve_scalar_generic(0.5 * l_inner, yk[iu], gbuf[iu], composite,
                                                  spec.box.lower[iu], spec.box.upper[iu]);
            });
        }

        const double phi_next = inner_objective(spec, x_next, w, x_c, alpha);
        if (phi_next < phi_best) {
            phi_best = phi_next;
            x_best.assign(x_next.begin(), x_next.end());
        }
        if (std::abs(phi_prev - phi_next) <= opts.inner.eps) {
            converged = true;
            break;
        }
        if (phi_next > phi_prev) {
            // Momentum overshoot; restart from the candidate.
            yk.assign(x_next.begin(), x_next.end());
            xk.assign(x_next.begin(), x_next.end());
            theta = 1.0;
        } else {
            const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
            const double mom = (theta - 1.0) / theta_next;
            for (std::size_t i = 0; i < nu; ++i) yk[i] = x_next[i] + mom * (x_next[i] - xk[i]);
            xk.assign(x_next.begin(), x_next.end());
            theta = theta_next;
        }
        phi_prev = phi_next;
    }
    if (!converged)
        run.warnings.push_back("inner budget exhausted at iteration " + std::to_string(run.t) +
                               "; using best inner iterate");
    finish_primal_dual_step(spec, run, x_best);
}

void pd_subgradient_step(const ProblemSpec& spec, SolverRun& run, const SolveOptions& opts) {
    const Exec ex{opts.threads};
    const auto nu = static_cast<std::size_t>(spec.n);
    const double c = opts.pd_step;

    // Subgradients of F and each G_k at x(t-1); nonsmooth parts use the
    // 0-at-kink selector, which keeps iterates sparse on l1 terms.
    spec.f.gradient(run.x, std::span<double>(run.grad_f), ex);
    for (std::size_t i = 0; i < nu; ++i)
        run.grad_f[i] += spec.f_tilde.subgrad_at(static_cast<int>(i), run.x[i]);
    for (int k = 0; k < spec.m; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        std::span<double> row(run.grads_g.data() + ku * nu, nu);
        spec.g[ku].gradient(run.x, row, ex);
        for (std::size_t i = 0; i < nu; ++i)
            row[i] += spec.g_tilde[ku].subgrad_at(static_cast<int>(i), run.x[i]);
    }
    if (!all_finite(run.grad_f) || !all_finite(run.grads_g)) {
        run.status = RunStatus::NanAbort;
        run.warnings.push_back("non-finite subgradient at iteration " + std::to_string(run.t));
        return;
    }

    std::vector<double>& x_new = run.ws_a;
    parallel_for(spec.n, ex, [&](std::int64_t i) {
        const auto iu = static_cast<std::size_t>(i);
        double s = run.grad_f[iu];
        for (int k = 0; k < spec.m; ++k)
            s += run.lambda[static_cast<std::size_t>(k)] *
                 run.grads_g[static_cast<std::size_t>(k) * nu + iu];
        x_new[iu] = spec.box.clamp(static_cast<int>(i), run.x[iu] - c * s);
    });

    run.g_new.resize(static_cast<std::size_t>(spec.m));
    eval_G(spec, x_new, std::span<double>(run.g_new));
    if (!all_finite(x_new) || !all_finite(run.g_new)) {
        run.status = RunStatus::NanAbort;
        run.warnings.push_back("non-finite oracle output at iteration " + std::to_string(run.t));
        return;
    }

    // Multiplier ascent uses G at the old point, clipped to [0, lambda_max].
    run.x_prev_snapshot.assign(run.x.begin(), run.x.end());
    run.g_prev_snapshot.assign(run.g_x.begin(), run.g_x.end());
    for (int k = 0; k < spec.m; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        run.lambda[ku] =
            std::clamp(run.lambda[ku] + c * run.g_x[ku], 0.0, opts.pd_lambda_max[ku]);
    }
    update_average(run, x_new);
    run.x.assign(x_new.begin(), x_new.end());
    run.g_x = run.g_new;
    run.t += 1;
}

namespace {

void record_row(const ProblemSpec& spec, const SolverRun& run, std::vector<IterationRecord>& out,
                std::int64_t wall_ns) {
    IterationRecord r;
    r.t = run.t;
    r.f_x = spec.F(run.x);
    r.f_xbar = spec.F(run.x_bar);
    r.max_violation_xbar = max_violation(spec, run.x_bar);
    r.queue_norm = run.lambda.empty() ? run.queue.norm() : vec_norm(run.lambda);
    r.alpha_t = run.alpha.current();
    r.drift = run.queue.last_drift;
    r.wall_time_ns = wall_ns;
    out.push_back(r);
}

void assert_queue_invariants(const ProblemSpec& spec, const SolverRun& run) {
    constexpr double tol = 1e-9;
    const QueueState& q = run.queue;  // Q(t+1) after the step
    for (int k = 0; k < spec.m; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (spec.is_equality(k)) continue;
        if (q.q[ku] < -tol) throw std::logic_error("queue invariant violated: Q_k >= 0");
        if (q.q[ku] + run.g_x[ku] < -tol)
            throw std::logic_error("queue invariant violated: Q_k + G_k(x(t-1)) >= 0");
        if (q.q[ku] < q.cumulative_g[ku] - tol)
            throw std::logic_error("queue invariant violated: Q_k >= cumulative G_k");
    }
    double qn = 0.0, gn = 0.0;  // non-equality rows only
    for (int k = 0; k < spec.m; ++k) {
        if (spec.is_equality(k)) continue;
        const auto ku = static_cast<std::size_t>(k);
        qn += q.q[ku] * q.q[ku];
        gn += run.g_x[ku] * run.g_x[ku];
    }
    if (qn < gn - tol)
        throw std::logic_error("queue invariant violated: ||Q|| >= ||G||");
}

}  // namespace

SolverRun run(const ProblemSpec& spec, const SolveOptions& opts, const StepObserver& observer) {
    SolverRun st = make_run(spec, opts);

    const bool want_target = opts.target_gap.has_value() || opts.target_violation.has_value();
    std::vector<std::pair<long, double>> fbar_history;
    if (want_target) fbar_history.emplace_back(0, spec.F(st.x_bar));

    // Brings the reported alpha up to alpha(t) for the state entering
    // iteration t; harmless because the max-rule advance is idempotent and
    // the next step recomputes the same multipliers.
    const auto refresh_alpha = [&]() {
        if (opts.algorithm == Algorithm::PdSubgradient) return;
        compute_multipliers(st);
        st.alpha.advance(spec, st.multipliers);
    };

    record_row(spec, st, st.trace, 0);

    using clock = std::chrono::steady_clock;
    std::int64_t last_ns = 0;

    for (long t = 0; t < opts.max_iters; ++t) {
        const auto t0 = opts.timing ? clock::now() : clock::time_point{};

        switch (opts.algorithm) {
            case Algorithm::NewConstant:
            case Algorithm::NewAdaptive:
                new_alg_step(spec, st, opts);
                break;
            case Algorithm::YuNeely:
                yu_neely_step(spec, st, opts);
                break;
            case Algorithm::PdSubgradient:
                pd_subgradient_step(spec, st, opts);
                break;
        }
        if (st.status == RunStatus::NanAbort) return st;

        if (opts.timing)
            last_ns =
                std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0).count();

        if (observer) {
            StepInfo info;
            info.t = t;
            info.spec = &spec;
            info.x_prev = st.x_prev_snapshot;
            info.x_now = st.x;
            info.x_bar_next = st.x_bar;
            info.g_prev = st.g_prev_snapshot;
            info.g_now = st.g_x;
            info.multipliers = st.multipliers;
            info.queue_before = &st.queue_before;
            info.queue_after = &st.queue;
            info.alpha_t = st.alpha.current();
            info.drift = st.queue.last_drift;
            info.lambda = st.lambda;
            observer(info);
        }
        if (opts.diagnostics && opts.algorithm != Algorithm::PdSubgradient)
            assert_queue_invariants(spec, st);

        const bool at_stride = (st.t % opts.stride) == 0;
        if (at_stride && st.t < opts.max_iters) {
            refresh_alpha();
            record_row(spec, st, st.trace, last_ns);
        }

        if (want_target && at_stride) {
            const double fbar = spec.F(st.x_bar);
            fbar_history.emplace_back(st.t, fbar);
            bool ok = true;
            if (opts.target_gap) {
                double f_half = fbar;
                const long half = st.t / 2;
                for (const auto& [tt, ff] : fbar_history)
                    if (tt <= half) f_half = ff;
                ok = ok && st.t >= 2 && std::abs(f_half - fbar) <= *opts.target_gap;
            }
            if (opts.target_violation)
                ok = ok && max_violation(spec, st.x_bar) <= *opts.target_violation;
            if (ok) {
                st.status = RunStatus::TargetGapMet;
                if (!(at_stride && st.t < opts.max_iters)) {
                    refresh_alpha();
                    record_row(spec, st, st.trace, last_ns);
                }
                return st;
            }
        }
    }
    st.status = RunStatus::MaxIters;
    refresh_alpha();
    record_row(spec, st, st.trace, last_ns);
    return st;
}

}  // namespace vqopt
