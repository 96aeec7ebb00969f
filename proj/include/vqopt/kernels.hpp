#pragma once

#include <span>
#include <vector>

#include "vqopt/exec.hpp"
#include "vqopt/problem.hpp"
#include "vqopt/separable.hpp"

namespace vqopt {

/// Scalar subproblem of one coordinate update:
///
///   min_{x in [lo, hi]}  alpha * (x - x_prev)^2 + d * x + e * |x|
///
/// with alpha > 0 and e >= 0 (e is a nonnegative combination of l1 weights).
struct CoordinateSubproblem {
    double alpha;
    double x_prev;
    double d;
    double e;
    double lo;
    double hi;

    double objective(double x) const;
};

/// Closed-form minimizer of the scalar subproblem: a soft-threshold around
/// x_prev - d/(2 alpha) with dead zone e/(2 alpha), clamped to [lo, hi].
/// Ties at the kink resolve to the clamped 0 branch.
double solve_l1_scalar(const CoordinateSubproblem& sub);

/// Minimizer of alpha*(x - x_prev)^2 + d*x + nonsmooth(x) over [lo, hi] for
/// an arbitrary scalar convex nonsmooth term, by bisection on the monotone
/// subdifferential. Argument tolerance 1e-10, at most 200 halvings. Throws
/// if the supplied subgradients are non-monotone across the bracket.
double solve_scalar_generic(double alpha, double x_prev, double d, const ScalarPiece& nonsmooth,
                            double lo, double hi);

/// Per-coordinate pass of the parallel primal update: given the multipliers
/// w_k = Q_k(t) + G_k(x(t-1)), the gradients at x(t-1) (grads_g is m x n
/// row-major), and alpha(t), writes x(t) into x_out. Only valid when every
/// nonsmooth term is zero/weighted-l1; the l1 coefficient
/// e = c_0 + sum_k w_k c_k is the same for every coordinate.
void coordinate_pass_l1(const ProblemSpec& spec, std::span<const double> x_prev,
                        std::span<const double> multipliers, std::span<const double> grad_f,
                        std::span<const double> grads_g, double alpha, std::span<double> x_out,
                        const Exec& ex);

/// Serial reference for coordinate_pass_l1; the OpenMP path must match it
/// bit for bit.
void coordinate_pass_l1_serial(const ProblemSpec& spec, std::span<const double> x_prev,
                               std::span<const double> multipliers, std::span<const double> grad_f,
                               std::span<const double> grads_g, double alpha,
                               std::span<double> x_out);

/// Same pass for problems with custom separable terms; each coordinate is
/// solved by bisection on the composite nonsmooth function
/// f_tilde_i + sum_k w_k g_tilde_k,i.
void coordinate_pass_generic(const ProblemSpec& spec, std::span<const double> x_prev,
                             std::span<const double> multipliers, std::span<const double> grad_f,
                             std::span<const double> grads_g, double alpha, std::span<double> x_out,
                             const Exec& ex);

/// Projected-gradient form of the update for smooth problems
/// (f_tilde == 0, g_tilde == 0):
///
///   x(t) = P_X[ x(t-1) - d(t) / (2 alpha) ],
///   d(t) = grad f(x(t-1)) + sum_k w_k grad g_k(x(t-1)).
///
/// Multipliers must be nonnegative on non-equality rows (they are along the
/// algorithm trajectory); a negative one is a hard error.
std::vector<double> smooth_step(const ProblemSpec& spec, std::span<const double> x_prev,
                                std::span<const double> multipliers, double alpha,
                                const Exec& ex = Exec::serial());

}  // namespace vqopt
