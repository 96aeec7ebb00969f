#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace vqopt {

/// One coordinate of a separable convex function: a value and a subgradient
/// selector. The selector must return some element of the subdifferential;
/// at kinks the convention is to return 0 when 0 is admissible (as for |x|
/// at the origin).
struct ScalarPiece {
    std::function<double(double)> value;
    std::function<double(double)> subgrad;
};

/// Separable convex term, evaluated as a sum of per-coordinate scalar
/// functions. Three kinds: identically zero, c*||x||_1 with c >= 0, or a
/// per-coordinate table of custom scalar convex functions.
class SeparableTerm {
public:
    enum class Kind { Zero, WeightedL1, Custom };

    SeparableTerm() = default;

    static SeparableTerm zero() { return SeparableTerm(); }

    static SeparableTerm weighted_l1(double coeff) {
        if (coeff < 0.0 || std::isnan(coeff))
            throw std::invalid_argument("weighted_l1: coefficient must be >= 0");
        SeparableTerm t;
        t.kind_ = Kind::WeightedL1;
        t.l1_coeff_ = coeff;
        return t;
    }

    static SeparableTerm custom(std::vector<ScalarPiece> pieces) {
        SeparableTerm t;
        t.kind_ = Kind::Custom;
        t.pieces_ = std::move(pieces);
        return t;
    }

    Kind kind() const { return kind_; }
    double l1_coeff() const { return l1_coeff_; }
    const std::vector<ScalarPiece>& pieces() const { return pieces_; }

    /// True when the term participates in the l1 closed form
    /// (zero counts as weighted l1 with c = 0).
    bool closed_form_l1() const { return kind_ != Kind::Custom; }

    double value_at(int i, double xi) const {
        switch (kind_) {
            case Kind::Zero: return 0.0;
            case Kind::WeightedL1: return l1_coeff_ * std::abs(xi);
            case Kind::Custom: return pieces_.at(static_cast<std::size_t>(i)).value(xi);
        }
        return 0.0;
    }

    double subgrad_at(int i, double xi) const {
        switch (kind_) {
            case Kind::Zero: return 0.0;
            case Kind::WeightedL1:
                if (xi > 0.0) return l1_coeff_;
                if (xi < 0.0) return -l1_coeff_;
                return 0.0;
            case Kind::Custom: return pieces_.at(static_cast<std::size_t>(i)).subgrad(xi);
        }
        return 0.0;
    }

    /// Sum over coordinates; the evaluation IS the per-coordinate sum, so
    /// separability is structural rather than assumed.
    double value(std::span<const double> x) const {
        if (kind_ == Kind::Zero) return 0.0;
        if (kind_ == Kind::Custom && pieces_.size() != x.size())
            throw std::invalid_argument("SeparableTerm: dimension mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            s += value_at(static_cast<int>(i), x[i]);
        return s;
    }

private:
    Kind kind_ = Kind::Zero;
    double l1_coeff_ = 0.0;
    std::vector<ScalarPiece> pieces_;
};

}  // namespace vqopt
