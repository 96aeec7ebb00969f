#pragma once

#include <span>

#include "vqopt/problem.hpp"

namespace vqopt {

/// Proximal-weight schedule.
///
/// Constant mode needs alpha > (beta^2 + L_f) / 2, strictly.
///
/// Adaptive mode is the non-decreasing rule
///   alpha(0) = [beta^2 + L_f + w(0)^T L_g] / 2,
///   alpha(t) = max{ alpha(t-1), [beta^2 + L_f + w(t)^T L_g] / 2 },
/// with w(t) = Q(t) + G(x(t-1)); whenever C and R and a reference
/// ||lambda*|| are known it stays below the alpha_max cap.
class AlphaRule {
public:
    enum class Mode { Constant, Adaptive };

    static AlphaRule constant(double alpha, double beta, double l_f);
    /// Smallest admissible constant value inflated by 1e-3 (the constant
    /// rule is a strict inequality); 1.0 when beta and L_f both vanish.
    static AlphaRule constant_default(double beta, double l_f);
    static AlphaRule adaptive();

    Mode mode() const { return mode_; }
    double current() const { return current_; }

    /// Lower admissible value [beta^2 + L_f + w^T L_g] / 2 for given
    /// multipliers (fixed-order dot product).
    static double floor_value(const ProblemSpec& spec, std::span<const double> multipliers);

    /// Sets alpha(0); for constant mode this is the configured value.
    void initialize(const ProblemSpec& spec, std::span<const double> multipliers0);
    /// Advances to alpha(t) from w(t); no-op in constant mode.
    void advance(const ProblemSpec& spec, std::span<const double> multipliers);

private:
    Mode mode_ = Mode::Constant;
    double alpha_const_ = 0.0;
    double current_ = 0.0;
};

/// alpha_max = [ sqrt(beta^2/2 + L_f/2 + ||lambda*|| ||L_g|| + C ||L_g||)
///               + (sqrt(2)/2) R ||L_g|| ]^2
double compute_alpha_max(double beta, double l_f, std::span<const double> l_g,
                         double lambda_star_norm, double c_bound, double r_bound);

/// Same, pulling constants from the spec; throws when C or R are missing.
double compute_alpha_max(const ProblemSpec& spec, double lambda_star_norm);

}  // namespace vqopt
