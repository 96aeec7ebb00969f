#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace vqopt {

/// Axis-aligned box X = prod_i [lower_i, upper_i]. Entries may be +-inf;
/// projection treats infinite bounds as a no-op on that side.
struct BoxSet {
    std::vector<double> lower;
    std::vector<double> upper;

    static BoxSet bounded(int n, double lo, double hi) {
        BoxSet b;
        b.lower.assign(static_cast<std::size_t>(n), lo);
        b.upper.assign(static_cast<std::size_t>(n), hi);
        b.validate();
        return b;
    }

    static BoxSet unbounded(int n) {
        const double inf = std::numeric_limits<double>::infinity();
        BoxSet b;
        b.lower.assign(static_cast<std::size_t>(n), -inf);
        b.upper.assign(static_cast<std::size_t>(n), inf);
        return b;
    }

    int dim() const { return static_cast<int>(lower.size()); }

    void validate() const {
        if (lower.size() != upper.size())
            throw std::invalid_argument("BoxSet: bound vectors differ in length");
        for (std::size_t i = 0; i < lower.size(); ++i) {
            if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i])
                throw std::invalid_argument("BoxSet: requires lower_i <= upper_i");
        }
    }

    double clamp(int i, double v) const {
        return std::min(std::max(v, lower[static_cast<std::size_t>(i)]),
                        upper[static_cast<std::size_t>(i)]);
    }

    void project(std::span<const double> x, std::span<double> out) const {
        if (x.size() != lower.size() || out.size() != lower.size())
            throw std::invalid_argument("BoxSet::project: dimension mismatch");
        for (std::size_t i = 0; i < x.size(); ++i)
            out[i] = std::min(std::max(x[i], lower[i]), upper[i]);
    }

    std::vector<double> project(std::span<const double> x) const {
        std::vector<double> out(x.size());
        project(x, std::span<double>(out));
        return out;
    }

    bool finite() const {
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) return false;
        return true;
    }

    /// Euclidean diameter; +inf if any side is unbounded.
    double diameter() const {
        double s = 0.0;
        for (std::size_t i = 0; i < lower.size(); ++i) {
            const double w = upper[i] - lower[i];
            if (!std::isfinite(w)) return std::numeric_limits<double>::infinity();
            s += w * w;
        }
        return std::sqrt(s);
    }
};

}  // namespace vqopt
