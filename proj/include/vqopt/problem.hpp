#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vqopt/box.hpp"
#include "vqopt/exec.hpp"
#include "vqopt/separable.hpp"

namespace vqopt {

/// Smooth convex building block: value, gradient, and the smoothness modulus
/// (Lipschitz constant of the gradient; 0 for linear maps). Oracles must be
/// pure functions of x and evaluable on a neighborhood of the box.
struct SmoothOracle {
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>, const Exec&)> gradient;
    double smoothness = 0.0;
};

SmoothOracle zero_oracle(int n);
SmoothOracle linear_oracle(std::vector<double> coeffs, double offset = 0.0);

/// Constrained composite convex program
///
///   min  F(x) = f(x) + f_tilde(x)
///   s.t. G_k(x) = g_k(x) + g_tilde_k(x) <= 0,  k = 1..m
///        x in box
///
/// plus the problem-level constants the step-size rules and diagnostics
/// need: beta (Lipschitz modulus of the stacked G), and C / R (bounds on
/// ||G(x)|| and the box diameter; 0 means "not supplied").
struct ProblemSpec {
    int n = 0;
    int m = 0;
    SmoothOracle f;
    SeparableTerm f_tilde;
    std::vector<SmoothOracle> g;
    std::vector<SeparableTerm> g_tilde;
    BoxSet box;

    double beta = 0.0;
    bool beta_exact = false;
    double C = 0.0;
    double R = 0.0;

    /// Rows marked true use the signed additive queue update for linear
    /// equality constraints; those rows must have smoothness 0 and a zero
    /// nonsmooth part.
    std::vector<std::uint8_t> equality_mask;

    double l_f() const { return f.smoothness; }
    std::vector<double> l_g() const;
    double l_g_norm() const;
    bool is_equality(int k) const {
        return !equality_mask.empty() && equality_mask[static_cast<std::size_t>(k)] != 0;
    }
    bool smooth_only() const;
    /// All nonsmooth terms are zero/weighted-l1, so the closed
    /// form applies coordinate-wise.
    bool closed_form_l1() const;

    double F(std::span<const double> x) const;

    void validate() const;
};

/// Stacked constraint values G_k(x) = g_k(x) + g_tilde_k(x).
void eval_G(const ProblemSpec& spec, std::span<const double> x, std::span<double> out);
std::vector<double> eval_G(const ProblemSpec& spec, std::span<const double> x);

/// Max_k G_k(x), with |G_k| on equality-masked rows.
double max_violation(const ProblemSpec& spec, std::span<const double> x);

/// Sampled Lipschitz ratio of G over the box:
/// max over pairs of ||G(x)-G(y)|| / ||x-y||. Returns 0 for a degenerate
/// (single point) box. Sampling on unbounded coordinates falls back to the
/// range [-10, 10].
double lipschitz_estimate(const ProblemSpec& spec, int samples, std::uint64_t seed);

}  // namespace vqopt
