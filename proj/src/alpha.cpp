#include "vqopt/alpha.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vqopt {

AlphaRule AlphaRule::constant(double alpha, double beta, double l_f) {
    const double base = 0.5 * (beta * beta + l_f);
    if (!(alpha > base))
        throw std::invalid_argument("AlphaRule::constant: alpha must exceed (beta^2 + L_f)/2");
    AlphaRule r;
    r.mode_ = Mode::Constant;
    r.alpha_const_ = alpha;
    r.current_ = alpha;
    return r;
}

AlphaRule AlphaRule::constant_default(double beta, double l_f) {
    const double base = 0.5 * (beta * beta + l_f);
    return constant(base > 0.0 ? base * (1.0 + 1e-3) : 1.0, beta, l_f);
}

AlphaRule AlphaRule::adaptive() {
    AlphaRule r;
    r.mode_ = Mode::Adaptive;
    return r;
}

double AlphaRule::floor_value(const ProblemSpec& spec, std::span<const double> multipliers) {
    double dot_wl = 0.0;
    for (int k = 0; k < spec.m; ++k)
        dot_wl += multipliers[static_cast<std::size_t>(k)] *
                  spec.g[static_cast<std::size_t>(k)].smoothness;
    return 0.5 * (spec.beta * spec.beta + spec.l_f() + dot_wl);
}

void AlphaRule::initialize(const ProblemSpec& spec, std::span<const double> multipliers0) {
    if (mode_ == Mode::Constant) {
        current_ = alpha_const_;
        return;
    }
    current_ = floor_value(spec, multipliers0);
    if (!(current_ > 0.0))
        throw std::invalid_argument("AlphaRule: adaptive alpha(0) must be positive");
}

void AlphaRule::advance(const ProblemSpec& spec, std::span<const double> multipliers) {
    if (mode_ == Mode::Constant) return;
    current_ = std::max(current_, floor_value(spec, multipliers));
}

double compute_alpha_max(double beta, double l_f, std::span<const double> l_g,
                         double lambda_star_norm, double c_bound, double r_bound) {
    double lg_norm_sq = 0.0;
    for (double l : l_g) lg_norm_sq += l * l;
    const double lg_norm = std::sqrt(lg_norm_sq);
    const double inner =
        0.5 * beta * beta + 0.5 * l_f + lambda_star_norm * lg_norm + c_bound * lg_norm;
    const double root = std::sqrt(inner) + (std::sqrt(2.0) / 2.0) * r_bound * lg_norm;
    return root * root;
}

double compute_alpha_max(const ProblemSpec& spec, double lambda_star_norm) {
    if (!(spec.C > 0.0) || !(spec.R > 0.0))
        throw std::invalid_argument("compute_alpha_max: spec must supply C and R");
    const std::vector<double> lg = spec.l_g();
    return compute_alpha_max(spec.beta, spec.l_f(), lg, lambda_star_norm, spec.C, spec.R);
}

}  // namespace vqopt
