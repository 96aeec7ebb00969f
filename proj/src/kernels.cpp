#include "vqopt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vqopt {

double CoordinateSubproblem::objective(double x) const {
    const double dx = x - x_prev;
    return alpha * dx * dx + d * x + e * std::abs(x);
}

double solve_l1_scalar(const CoordinateSubproblem& sub) {
    if (!(sub.alpha > 0.0)) throw std::invalid_argument("solve_l1_scalar: alpha must be positive");
    if (!(sub.e >= 0.0)) throw std::invalid_argument("solve_l1_scalar: e must be nonnegative");
    const double p = sub.x_prev - sub.d / (2.0 * sub.alpha);
    const double h = sub.e / (2.0 * sub.alpha);
    double v;
    if (p > h)
        v = p - h;
    else if (p < -h)
        v = p + h;
    else
        v = 0.0;
    return std::min(std::max(v, sub.lo), sub.hi);
}

namespace {

// Right-hand derivative selector of the full scalar objective.
inline double scalar_deriv(double alpha, double x_prev, double d, const ScalarPiece& ns, double x) {
    return 2.0 * alpha * (x - x_prev) + d + ns.subgrad(x);
}

}  // namespace

double solve_scalar_generic(double alpha, double x_prev, double d, const ScalarPiece& nonsmooth,
                            double lo, double hi) {
    if (!(alpha > 0.0)) throw std::invalid_argument("solve_scalar_generic: alpha must be positive");
    if (lo > hi) throw std::invalid_argument("solve_scalar_generic: empty interval");

    // Finite bracket: expand geometrically from x_prev on unbounded sides.
    // The quadratic term dominates eventually, so the derivative changes
    // sign within finitely many doublings.
    double a = lo;
    double b = hi;
    if (!std::isfinite(a)) {
        double w = 1.0;
        a = std::min(x_prev, b) - w;
        for (int i = 0; i < 80 && scalar_deriv(alpha, x_prev, d, nonsmooth, a) > 0.0; ++i) {
            w *= 2.0;
            a = std::min(x_prev, b) - w;
        }
    }
    if (!std::isfinite(b)) {
        double w = 1.0;
        b = std::max(x_prev, a) + w;
        for (int i = 0; i < 80 && scalar_deriv(alpha, x_prev, d, nonsmooth, b) < 0.0; ++i) {
            w *= 2.0;
            b = std::max(x_prev, a) + w;
        }
    }

    double da = scalar_deriv(alpha, x_prev, d, nonsmooth, a);
    double db = scalar_deriv(alpha, x_prev, d, nonsmooth, b);
    const double mono_tol = 1e-9 * (1.0 + std::abs(da) + std::abs(db));
    if (da > db + mono_tol)
        throw std::domain_error("solve_scalar_generic: subgradient non-monotone across bracket");
    if (da >= 0.0) return a;
    if (db <= 0.0) return b;

    for (int it = 0; it < 200 && (b - a) > 1e-10; ++it) {
        const double mid = 0.5 * (a + b);
        const double dm = scalar_deriv(alpha, x_prev, d, nonsmooth, mid);
        if (dm < da - mono_tol || dm > db + mono_tol)
            throw std::domain_error("solve_scalar_generic: subgradient non-monotone across bracket");
        if (dm > 0.0) {
            b = mid;
            db = dm;
        } else {
            a = mid;
            da = dm;
        }
    }
    return 0.5 * (a + b);
}

namespace {

// Shared per-coordinate body of the l1 pass. Both the serial and the OpenMP
// loop call exactly this, which is what makes them bit-identical.
inline double coord_solve_l1(const ProblemSpec& spec, std::span<const double> x_prev,
                             std::span<const double> w, std::span<const double> grad_f,
                             std::span<const double> grads_g, double alpha, double e, int i) {
    const auto iu = static_cast<std::size_t>(i);
    double d = grad_f[iu];
    for (int k = 0; k < spec.m; ++k)
        d += w[static_cast<std::size_t>(k)] * grads_g[static_cast<std::size_t>(k) * spec.n + iu];
    CoordinateSubproblem sub{alpha, x_prev[iu], d, e,
                             spec.box.lower[iu], spec.box.upper[iu]};
    return solve_l1_scalar(sub);
}

double combined_l1_weight(const ProblemSpec& spec, std::span<const double> w) {
    double e = spec.f_tilde.l1_coeff();
    for (int k = 0; k < spec.m; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (spec.g_tilde[ku].kind() == SeparableTerm::Kind::WeightedL1)
            e += w[ku] * spec.g_tilde[ku].l1_coeff();
    }
    return e;
}

void check_pass_args(const ProblemSpec& spec, std::span<const double> x_prev,
                     std::span<const double> w, std::span<const double> grad_f,
                     std::span<const double> grads_g, double alpha, std::span<double> x_out) {
    if (static_cast<int>(x_prev.size()) != spec.n || static_cast<int>(grad_f.size()) != spec.n ||
        static_cast<int>(x_out.size()) != spec.n || static_cast<int>(w.size()) != spec.m ||
        grads_g.size() != static_cast<std::size_t>(spec.m) * static_cast<std::size_t>(spec.n))
        throw std::invalid_argument("coordinate pass: dimension mismatch");
    if (!(alpha > 0.0)) throw std::invalid_argument("coordinate pass: alpha must be positive");
}

}  // namespace

void coordinate_pass_l1_serial(const ProblemSpec& spec, std::span<const double> x_prev,
                               std::span<const double> multipliers, std::span<const double> grad_f,
                               std::span<const double> grads_g, double alpha,
                               std::span<double> x_out) {
    check_pass_args(spec, x_prev, multipliers, grad_f, grads_g, alpha, x_out);
    const double e = combined_l1_weight(spec, multipliers);
    for (int i = 0; i < spec.n; ++i)
        x_out[static_cast<std::size_t>(i)] =
            coord_solve_l1(spec, x_prev, multipliers, grad_f, grads_g, alpha, e, i);
}

void coordinate_pass_l1(const ProblemSpec& spec, std::span<const double> x_prev,
                        std::span<const double> multipliers, std::span<const double> grad_f,
                        std::span<const double> grads_g, double alpha, std::span<double> x_out,
                        const Exec& ex) {
    check_pass_args(spec, x_prev, multipliers, grad_f, grads_g, alpha, x_out);
    const double e = combined_l1_weight(spec, multipliers);
    parallel_for(spec.n, ex, [&](std::int64_t i) {
        x_out[static_cast<std::size_t>(i)] = coord_solve_l1(spec, x_prev, multipliers, grad_f,
                                                            grads_g, alpha, e, static_cast<int>(i));
    });
}

void coordinate_pass_generic(const ProblemSpec& spec, std::span<const double> x_prev,
                             std::span<const double> multipliers, std::span<const double> grad_f,
                             std::span<const double> grads_g, double alpha, std::span<double> x_out,
                             const Exec& ex) {
    check_pass_args(spec, x_prev, multipliers, grad_f, grads_g, alpha, x_out);
    parallel_for(spec.n, ex, [&](std::int64_t ii) {
        const int i = static_cast<int>(ii);
        const auto iu = static_cast<std::size_t>(i);
        double d = grad_f[iu];
        for (int k = 0; k < spec.m; ++k)
            d += multipliers[static_cast<std::size_t>(k)] *
                 grads_g[static_cast<std::size_t>(k) * spec.n + iu];
        ScalarPiece composite;
        composite.value = [&spec, &multipliers, i](double x) {
            double v = spec.f_tilde.value_at(i, x);
            for (int k = 0; k < spec.m; ++k)
                v += multipliers[static_cast<std::size_t>(k)] * spec.g_tilde[static_cast<std::size_t>(k)].value_at(i, x);
            return v;
        };
        composite.subgrad = [&spec, &multipliers, i](double x) {
            double v = spec.f_tilde.subgrad_at(i, x);
            for (int k = 0; k < spec.m; ++k)
                v += multipliers[static_cast<std::size_t>(k)] * spec.g_tilde[static_cast<std::size_t>(k)].subgrad_at(i, x);
            return v;
        };
        x_out[iu] = solve_scalar_generic(alpha, x_prev[iu], d, composite, spec.box.lower[iu],
                                         spec.box.upper[iu]);
    });
}

std::vector<double> smooth_step(const ProblemSpec& spec, std::span<const double> x_prev,
                                std::span<const double> multipliers, double alpha, const Exec& ex) {
    if (!spec.smooth_only())
        throw std::invalid_argument("smooth_step: requires f_tilde == 0 and g_tilde == 0");
    if (static_cast<int>(multipliers.size()) != spec.m)
        throw std::invalid_argument("smooth_step: multiplier dimension mismatch");
    for (int k = 0; k < spec.m; ++k)
        if (!spec.is_equality(k) && multipliers[static_cast<std::size_t>(k)] < 0.0)
            throw std::domain_error("smooth_step: negative multiplier on inequality row");
    if (!(alpha > 0.0)) throw std::invalid_argument("smooth_step: alpha must be positive");

    const auto nu = static_cast<std::size_t>(spec.n);
    std::vector<double> dvec(nu);
    std::vector<double> scratch(nu);
    spec.f.gradient(x_prev, std::span<double>(dvec), ex);
    for (int k = 0; k < spec.m; ++k) {
        spec.g[static_cast<std::size_t>(k)].gradient(x_prev, std::span<double>(scratch), ex);
        const double wk = multipliers[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < nu; ++i) dvec[i] += wk * scratch[i];
    }
    // Same arithmetic as the e = 0 branch of solve_l1_scalar, so the two
    // routes agree bit for bit on smooth problems.
    std::vector<double> out(nu);
    parallel_for(spec.n, ex, [&](std::int64_t i) {
        const auto iu = static_cast<std::size_t>(i);
        out[iu] = spec.box.clamp(static_cast<int>(i), x_prev[iu] - dvec[iu] / (2.0 * alpha));
    });
    return out;
}

}  // namespace vqopt
