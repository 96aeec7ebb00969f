#include "vqopt/reference.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "vqopt/alpha.hpp"
#include "vqopt/dense.hpp"
#include "vqopt/rng.hpp"
#include "vqopt/solver.hpp"

namespace vqopt {

using nlohmann::json;

double ReferenceSolution::lambda_norm() const {
    double s = 0.0;
    for (double v : lambda_star) s += v * v;
    return std::sqrt(s);
}

const char* to_string(ReferenceSolution::Method m) {
    switch (m) {
        case ReferenceSolution::Method::Analytic: return "analytic";
        case ReferenceSolution::Method::Grid: return "grid";
        case ReferenceSolution::Method::LongRun: return "long-run";
    }
    return "?";
}

std::optional<ReferenceSolution::Method> method_from_string(const std::string& s) {
    if (s == "analytic") return ReferenceSolution::Method::Analytic;
    if (s == "grid") return ReferenceSolution::Method::Grid;
    if (s == "long-run") return ReferenceSolution::Method::LongRun;
    return std::nullopt;
}

namespace {

struct GridBest {
    double f = std::numeric_limits<double>::infinity();
    std::int64_t index = -1;
    // Most nearly feasible point for the error message.
    double min_violation = std::numeric_limits<double>::infinity();
    std::int64_t min_violation_index = -1;
    double max_grad_norm = 0.0;
};

}  // namespace

ReferenceSolution grid_solve(const ProblemSpec& spec, double resolution, const Exec& ex) {
    spec.validate();
    if (spec.n > 3) throw std::invalid_argument("grid_solve: only n <= 3 is supported");
    if (!spec.box.finite()) throw std::invalid_argument("grid_solve: box must be finite");
    if (!(resolution > 0.0)) throw std::invalid_argument("grid_solve: resolution must be positive");

    std::vector<std::int64_t> counts(static_cast<std::size_t>(spec.n));
    std::int64_t total = 1;
    for (int i = 0; i < spec.n; ++i) {
        const double w = spec.box.upper[static_cast<std::size_t>(i)] -
                         spec.box.lower[static_cast<std::size_t>(i)];
        counts[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor(w / resolution)) + 1;
        total *= counts[static_cast<std::size_t>(i)];
    }
    const double slack = resolution * std::max(spec.beta, 1.0);

    const int nthreads = std::max(1, ex.threads);
    std::vector<GridBest> locals(static_cast<std::size_t>(nthreads));

    const auto point_at = [&](std::int64_t idx, std::vector<double>& x) {
        for (int i = spec.n - 1; i >= 0; --i) {
            const auto iu = static_cast<std::size_t>(i);
            const std::int64_t c = counts[iu];
            const std::int64_t j = idx % c;
            idx /= c;
            x[iu] = std::min(spec.box.lower[iu] + static_cast<double>(j) * resolution,
                             spec.box.upper[iu]);
        }
    };

    const auto scan_range = [&](std::int64_t lo, std::int64_t hi, GridBest& best) {
        std::vector<double> x(static_cast<std::size_t>(spec.n));
        std::vector<double> gx(static_cast<std::size_t>(spec.m));
        std::vector<double> grad(static_cast<std::size_t>(spec.n));
        for (std::int64_t idx = lo; idx < hi; ++idx) {
            point_at(idx, x);
            eval_G(spec, x, std::span<double>(gx));
            double worst = 0.0;
            for (int k = 0; k < spec.m; ++k) {
                const double v = spec.is_equality(k) ? std::abs(gx[static_cast<std::size_t>(k)])
                                                     : gx[static_cast<std::size_t>(k)];
                worst = std::max(worst, v);
            }
            if (worst < best.min_violation) {
                best.min_violation = worst;
                best.min_violation_index = idx;
            }
            // Sampled Lipschitz bound of F for the tolerance estimate.
            spec.f.gradient(x, std::span<double>(grad), Exec::serial());
            double gn = 0.0;
            for (int i = 0; i < spec.n; ++i) {
                const double s = grad[static_cast<std::size_t>(i)] +
                                 spec.f_tilde.subgrad_at(i, x[static_cast<std::size_t>(i)]) +
                                 (x[static_cast<std::size_t>(i)] == 0.0 ? spec.f_tilde.l1_coeff() : 0.0);
                gn += s * s;
            }
            best.max_grad_norm = std::max(best.max_grad_norm, std::sqrt(gn));
            if (worst > slack) continue;
            const double fv = spec.F(x);
            if (fv < best.f || (fv == best.f && idx < best.index)) {
                best.f = fv;
                best.index = idx;
            }
        }
    };

#ifdef _OPENMP
    if (nthreads > 1) {
#pragma omp parallel num_threads(nthreads)
        {
            const int tid = omp_get_thread_num();
            const std::int64_t chunk = (total + nthreads - 1) / nthreads;
            const std::int64_t lo = static_cast<std::int64_t>(tid) * chunk;
            const std::int64_t hi = std::min(total, lo + chunk);
            if (lo < hi) scan_range(lo, hi, locals[static_cast<std::size_t>(tid)]);
        }
    } else {
        scan_range(0, total, locals[0]);
    }
#else
    scan_range(0, total, locals[0]);
#endif

    // Deterministic merge in thread order; ties by smaller linear index.
    GridBest best;
    for (const GridBest& l : locals) {
        if (l.index >= 0 &&
            (best.index < 0 || l.f < best.f || (l.f == best.f && l.index < best.index))) {
            best.f = l.f;
            best.index = l.index;
        }
        if (l.min_violation < best.min_violation) {
            best.min_violation = l.min_violation;
            best.min_violation_index = l.min_violation_index;
        }
        best.max_grad_norm = std::max(best.max_grad_norm, l.max_grad_norm);
    }

    if (best.index < 0) {
        std::vector<double> x(static_cast<std::size_t>(spec.n));
        point_at(std::max<std::int64_t>(best.min_violation_index, 0), x);
        std::ostringstream os;
        os << "grid_solve: no feasible grid point; most nearly feasible point (violation "
           << best.min_violation << ") is [";
        for (int i = 0; i < spec.n; ++i) os << (i ? ", " : "") << x[static_cast<std::size_t>(i)];
        os << "]";
        throw std::runtime_error(os.str());
    }

    ReferenceSolution ref;
    ref.method = ReferenceSolution::Method::Grid;
    ref.x_star.resize(static_cast<std::size_t>(spec.n));
    point_at(best.index, ref.x_star);
    ref.f_star = best.f;
    ref.tolerance = resolution * std::sqrt(static_cast<double>(spec.n)) *
                    std::max(best.max_grad_norm, 1e-12);
    DualEstimate de = dual_estimate(spec, ref.x_star, std::max(slack, 1e-6));
    ref.lambda_star = de.lambda;
    ref.residual = de.residual;
    ref.low_confidence = de.low_confidence;
    return ref;
}

namespace {

// Distance from 0 to the interval [lo, hi] (half-lines allowed).
double interval_distance(double lo, double hi) {
    if (lo > 0.0) return lo;
    if (hi < 0.0) return -hi;
    return 0.0;
}

// Projected stationarity residual of the Lagrangian at x for multipliers
// lambda. Per coordinate the optimality condition is
//   0 in s_i + [-w_i, w_i] + N_i,
// where s_i is the smooth part of the Lagrangian gradient, w_i the total l1
// kink width at x_i (zero when x_i != 0), and N_i the box normal cone.
double stationarity_residual(const ProblemSpec& spec, std::span<const double> x,
                             std::span<const double> lambda,
                             const std::vector<std::vector<double>>& grads,
                             std::span<const double> grad_f, double bound_tol) {
    const double inf = std::numeric_limits<double>::infinity();
    double sq = 0.0;
    for (int i = 0; i < spec.n; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        double s = grad_f[iu];
        double kink = 0.0;
        const bool at_zero = x[iu] == 0.0;
        if (at_zero)
            kink += spec.f_tilde.l1_coeff();
        else
            s += spec.f_tilde.subgrad_at(i, x[iu]);
        for (int k = 0; k < spec.m; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            s += lambda[ku] * grads[ku][iu];
            if (spec.g_tilde[ku].kind() == SeparableTerm::Kind::WeightedL1) {
                if (at_zero)
                    kink += lambda[ku] * spec.g_tilde[ku].l1_coeff();
                else
                    s += lambda[ku] * spec.g_tilde[ku].subgrad_at(i, x[iu]);
            }
        }
        double lo = s - kink;
        double hi = s + kink;
        const bool at_lower = x[iu] <= spec.box.lower[iu] + bound_tol;
        const bool at_upper = x[iu] >= spec.box.upper[iu] - bound_tol;
        if (at_lower) lo = -inf;  // normal cone (-inf, 0]: only s + kink >= 0 is required
        if (at_upper) hi = inf;   // normal cone [0, inf): only s - kink <= 0 is required
        const double r = interval_distance(lo, hi);
        sq += r * r;
    }
    return std::sqrt(sq);
}

}  // namespace

DualEstimate dual_estimate(const ProblemSpec& spec, std::span<const double> x_star,
                           double active_tol) {
    spec.validate();
    if (static_cast<int>(x_star.size()) != spec.n)
        throw std::invalid_argument("dual_estimate: x_star has wrong dimension");

    std::vector<double> gx = eval_G(spec, x_star);
    std::vector<double> grad_f(static_cast<std::size_t>(spec.n));
    spec.f.gradient(x_star, std::span<double>(grad_f), Exec::serial());
    std::vector<std::vector<double>> grads(static_cast<std::size_t>(spec.m),
                                           std::vector<double>(static_cast<std::size_t>(spec.n)));
    for (int k = 0; k < spec.m; ++k)
        spec.g[static_cast<std::size_t>(k)].gradient(
            x_star, std::span<double>(grads[static_cast<std::size_t>(k)]), Exec::serial());

    std::vector<int> active;
    for (int k = 0; k < spec.m; ++k)
        if (spec.is_equality(k) || gx[static_cast<std::size_t>(k)] >= -active_tol) active.push_back(k);

    // Rows for the least-squares fit: strictly interior coordinates with no
    // kink at x_i (stationarity is an equation there).
    std::vector<int> rows;
    for (int i = 0; i < spec.n; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        const bool interior = x_star[iu] > spec.box.lower[iu] + active_tol &&
                              x_star[iu] < spec.box.upper[iu] - active_tol;
        if (!interior) continue;
        bool kink = false;
        if (x_star[iu] == 0.0) {
            if (spec.f_tilde.l1_coeff() > 0.0) kink = true;
            for (int k = 0; k < spec.m; ++k)
                if (spec.g_tilde[static_cast<std::size_t>(k)].kind() ==
                        SeparableTerm::Kind::WeightedL1 &&
                    spec.g_tilde[static_cast<std::size_t>(k)].l1_coeff() > 0.0)
                    kink = true;
        }
        if (!kink) rows.push_back(i);
    }

    DualEstimate best;
    best.lambda.assign(static_cast<std::size_t>(spec.m), 0.0);
    best.residual = stationarity_residual(spec, x_star, best.lambda, grads, grad_f, active_tol);

    const int na = static_cast<int>(active.size());
    if (na > 0 && na <= 16 && !rows.empty()) {
        Eigen::VectorXd r0(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const int i = rows[r];
            r0(static_cast<Eigen::Index>(r)) =
                grad_f[static_cast<std::size_t>(i)] +
                (x_star[static_cast<std::size_t>(i)] != 0.0
                     ? spec.f_tilde.subgrad_at(i, x_star[static_cast<std::size_t>(i)])
                     : 0.0);
        }
        // Enumerate support subsets of the active set; tiny m makes this
        // exact and fully deterministic.
        for (unsigned mask = 1; mask < (1u << na); ++mask) {
            std::vector<int> sup;
            for (int a = 0; a < na; ++a)
                if (mask & (1u << a)) sup.push_back(active[static_cast<std::size_t>(a)]);
            Eigen::MatrixXd J(static_cast<Eigen::Index>(rows.size()),
                              static_cast<Eigen::Index>(sup.size()));
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (std::size_t c = 0; c < sup.size(); ++c) {
                    const int i = rows[r];
                    const int k = sup[c];
                    double v = grads[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
                    if (spec.g_tilde[static_cast<std::size_t>(k)].kind() ==
                            SeparableTerm::Kind::WeightedL1 &&
                        x_star[static_cast<std::size_t>(i)] != 0.0)
                        v += spec.g_tilde[static_cast<std::size_t>(k)].subgrad_at(
                            i, x_star[static_cast<std::size_t>(i)]);
                    J(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
                }
            Eigen::VectorXd sol = J.colPivHouseholderQr().solve(-r0);
            bool ok = true;
            for (Eigen::Index c = 0; c < sol.size(); ++c) {
                const int k = sup[static_cast<std::size_t>(c)];
                if (!spec.is_equality(k) && sol(c) < -1e-12) ok = false;
                if (!std::isfinite(sol(c))) ok = false;
            }
            if (!ok) continue;
            std::vector<double> lam(static_cast<std::size_t>(spec.m), 0.0);
            for (Eigen::Index c = 0; c < sol.size(); ++c)
                lam[static_cast<std::size_t>(sup[static_cast<std::size_t>(c)])] =
                    std::max(0.0, sol(c));
            const double res = stationarity_residual(spec, x_star, lam, grads, grad_f, active_tol);
            if (res < best.residual - 1e-15) {
                best.residual = res;
                best.lambda = lam;
            }
        }
    }
    best.low_confidence = best.residual > 1e-3;
    return best;
}

ReferenceSolution long_run_reference(const ProblemSpec& spec, long iterations, int threads) {
    if (iterations < 100000)
        throw std::invalid_argument("long_run_reference: iterations must be >= 1e5");
    SolveOptions opts;
    opts.algorithm = Algorithm::NewAdaptive;
    opts.max_iters = iterations;
    opts.stride = iterations;  // trace only the endpoints
    opts.threads = threads;
    SolverRun r = run(spec, opts);
    if (r.status != RunStatus::MaxIters)
        throw std::runtime_error("long_run_reference: run did not complete");

    ReferenceSolution ref;
    ref.method = ReferenceSolution::Method::LongRun;
    ref.x_star = r.x_bar;
    ref.f_star = spec.F(r.x_bar);

    DualEstimate de = dual_estimate(spec, ref.x_star, 1e-4);
    ref.lambda_star = de.lambda;
    ref.residual = de.residual;
    ref.low_confidence = de.low_confidence;

    // Bound-derived tolerance at T: the linear case uses alpha R^2 / T, the
    // nonlinear case alpha_max R^2 / T with the fitted multipliers.
    const double t = static_cast<double>(iterations);
    bool linear = true;
    for (int k = 0; k < spec.m; ++k)
        if (spec.g[static_cast<std::size_t>(k)].smoothness != 0.0) linear = false;
    double r2 = spec.R > 0.0 ? spec.R * spec.R : std::numeric_limits<double>::quiet_NaN();
    if (std::isnan(r2)) {
        const double d = spec.box.diameter();
        r2 = std::isfinite(d) ? d * d : 4.0 * (1.0 + dot(r.x_bar, r.x_bar));
        ref.low_confidence = true;
    }
    if (linear) {
        ref.tolerance = r.alpha.current() * r2 / t;
    } else if (spec.C > 0.0 && spec.R > 0.0) {
        ref.tolerance = compute_alpha_max(spec, ref.lambda_norm()) * r2 / t;
    } else {
        ref.tolerance = r.alpha.current() * r2 / t;
        ref.low_confidence = true;
    }
    return ref;
}

std::vector<double> default_lambda_max(const ProblemSpec& spec, const ReferenceSolution& ref) {
    const double cap = 10.0 * (ref.lambda_norm() + 1.0);
    return std::vector<double>(static_cast<std::size_t>(spec.m), cap);
}

namespace {

json ref_to_json(const ReferenceSolution& ref) {
    return json{{"x_star", ref.x_star},
                {"lambda_star", ref.lambda_star},
                {"f_star", ref.f_star},
                {"method", to_string(ref.method)},
                {"tolerance", ref.tolerance},
                {"residual", ref.residual},
                {"low_confidence", ref.low_confidence}};
}

}  // namespace

std::optional<ReferenceSolution> cache_load(const std::string& dir, const std::string& key) {
    const std::filesystem::path p =
        std::filesystem::path(dir) / (std::to_string(fnv1a64(key.data(), key.size())) + ".json");
    std::ifstream in(p);
    if (!in) return std::nullopt;
    json j;
    try {
        in >> j;
        if (j.at("key").get<std::string>() != key) return std::nullopt;
        ReferenceSolution ref;
        ref.x_star = j.at("x_star").get<std::vector<double>>();
        ref.lambda_star = j.at("lambda_star").get<std::vector<double>>();
        ref.f_star = j.at("f_star").get<double>();
        ref.method = method_from_string(j.at("method").get<std::string>())
                         .value_or(ReferenceSolution::Method::LongRun);
        ref.tolerance = j.at("tolerance").get<double>();
        ref.residual = j.at("residual").get<double>();
        ref.low_confidence = j.at("low_confidence").get<bool>();
        return ref;
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

void cache_store(const std::string& dir, const std::string& key, const ReferenceSolution& ref) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path p =
        std::filesystem::path(dir) / (std::to_string(fnv1a64(key.data(), key.size())) + ".json");
    json j = ref_to_json(ref);
    j["key"] = key;
    std::ofstream out(p, std::ios::binary);
    out << j.dump(2) << "\n";
}

}  // namespace vqopt
