#include "vqopt/problem.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "vqopt/rng.hpp"

namespace vqopt {

SmoothOracle zero_oracle(int n) {
    SmoothOracle o;
    o.value = [](std::span<const double>) { return 0.0; };
    o.gradient = [n](std::span<const double>, std::span<double> out, const Exec&) {
        if (static_cast<int>(out.size()) != n)
            throw std::invalid_argument("zero_oracle: dimension mismatch");
        for (auto& v : out) v = 0.0;
    };
    o.smoothness = 0.0;
    return o;
}

SmoothOracle linear_oracle(std::vector<double> coeffs, double offset) {
    auto c = std::make_shared<std::vector<double>>(std::move(coeffs));
    SmoothOracle o;
    o.value = [c, offset](std::span<const double> x) {
        if (x.size() != c->size())
            throw std::invalid_argument("linear_oracle: dimension mismatch");
        double s = offset;
        for (std::size_t i = 0; i < x.size(); ++i) s += (*c)[i] * x[i];
        return s;
    };
    o.gradient = [c](std::span<const double> x, std::span<double> out, const Exec&) {
        if (x.size() != c->size() || out.size() != c->size())
            throw std::invalid_argument("linear_oracle: dimension mismatch");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*c)[i];
    };
    o.smoothness = 0.0;
    return o;
}

std::vector<double> ProblemSpec::l_g() const {
    std::vector<double> out(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) out[static_cast<std::size_t>(k)] = g[static_cast<std::size_t>(k)].smoothness;
    return out;
}

double ProblemSpec::l_g_norm() const {
    double s = 0.0;
    for (int k = 0; k < m; ++k) {
        const double l = g[static_cast<std::size_t>(k)].smoothness;
        s += l * l;
    }
    return std::sqrt(s);
}

bool ProblemSpec::smooth_only() const {
    if (f_tilde.kind() != SeparableTerm::Kind::Zero &&
        !(f_tilde.kind() == SeparableTerm::Kind::WeightedL1 && f_tilde.l1_coeff() == 0.0))
        return false;
    for (const auto& t : g_tilde) {
        if (t.kind() != SeparableTerm::Kind::Zero &&
            !(t.kind() == SeparableTerm::Kind::WeightedL1 && t.l1_coeff() == 0.0))
            return false;
    }
    return true;
}

bool ProblemSpec::closed_form_l1() const {
    if (!f_tilde.closed_form_l1()) return false;
    for (const auto& t : g_tilde)
        if (!t.closed_form_l1()) return false;
    return true;
}

double ProblemSpec::F(std::span<const double> x) const {
    return f.value(x) + f_tilde.value(x);
}

void ProblemSpec::validate() const {
    if (n <= 0) throw std::invalid_argument("ProblemSpec: n must be positive");
    if (m < 0 || static_cast<int>(g.size()) != m || static_cast<int>(g_tilde.size()) != m)
        throw std::invalid_argument("ProblemSpec: constraint lists must have length m");
    if (box.dim() != n) throw std::invalid_argument("ProblemSpec: box dimension mismatch");
    box.validate();
    if (!equality_mask.empty()) {
        if (static_cast<int>(equality_mask.size()) != m)
            throw std::invalid_argument("ProblemSpec: equality mask length mismatch");
        for (int k = 0; k < m; ++k) {
            if (!is_equality(k)) continue;
            if (g[static_cast<std::size_t>(k)].smoothness != 0.0 ||
                g_tilde[static_cast<std::size_t>(k)].kind() != SeparableTerm::Kind::Zero)
                throw std::invalid_argument(
                    "ProblemSpec: equality-masked constraints must be linear with no nonsmooth part");
        }
    }
    if (std::isnan(beta) || beta < 0.0)
        throw std::invalid_argument("ProblemSpec: beta must be nonnegative");
}

void eval_G(const ProblemSpec& spec, std::span<const double> x, std::span<double> out) {
    if (static_cast<int>(x.size()) != spec.n)
        throw std::invalid_argument("eval_G: x has wrong dimension");
    if (static_cast<int>(out.size()) != spec.m)
        throw std::invalid_argument("eval_G: output has wrong dimension");
    for (int k = 0; k < spec.m; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        out[ku] = spec.g[ku].value(x) + spec.g_tilde[ku].value(x);
    }
}

std::vector<double> eval_G(const ProblemSpec& spec, std::span<const double> x) {
    std::vector<double> out(static_cast<std::size_t>(spec.m));
    eval_G(spec, x, std::span<double>(out));
    return out;
}

double max_violation(const ProblemSpec& spec, std::span<const double> x) {
    if (spec.m == 0) return 0.0;
    std::vector<double> gx = eval_G(spec, x);
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < spec.m; ++k) {
        const double v = spec.is_equality(k) ? std::abs(gx[static_cast<std::size_t>(k)])
                                             : gx[static_cast<std::size_t>(k)];
        worst = std::max(worst, v);
    }
    return worst;
}

namespace {

double sample_coord(const BoxSet& box, int i, CounterRng& rng) {
    double lo = box.lower[static_cast<std::size_t>(i)];
    double hi = box.upper[static_cast<std::size_t>(i)];
    if (!std::isfinite(lo)) lo = std::isfinite(hi) ? hi - 20.0 : -10.0;
    if (!std::isfinite(hi)) hi = lo + 20.0;
    return rng.uniform(lo, hi);
}

}  // namespace

double lipschitz_estimate(const ProblemSpec& spec, int samples, std::uint64_t seed) {
    if (samples < 2) throw std::invalid_argument("lipschitz_estimate: samples must be >= 2");
    CounterRng rng(seed);
    std::vector<double> x(static_cast<std::size_t>(spec.n));
    std::vector<double> y(static_cast<std::size_t>(spec.n));
    std::vector<double> gx(static_cast<std::size_t>(spec.m));
    std::vector<double> gy(static_cast<std::size_t>(spec.m));
    double best = 0.0;
    for (int s = 0; s < samples; ++s) {
        double dist2 = 0.0;
        for (int i = 0; i < spec.n; ++i) {
            x[static_cast<std::size_t>(i)] = sample_coord(spec.box, i, rng);
            y[static_cast<std::size_t>(i)] = sample_coord(spec.box, i, rng);
            const double d = x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
            dist2 += d * d;
        }
        if (dist2 == 0.0) continue;  // degenerate box or coincident pair
        eval_G(spec, x, std::span<double>(gx));
        eval_G(spec, y, std::span<double>(gy));
        double diff2 = 0.0;
        for (int k = 0; k < spec.m; ++k) {
            const double d = gx[static_cast<std::size_t>(k)] - gy[static_cast<std::size_t>(k)];
            diff2 += d * d;
        }
        best = std::max(best, std::sqrt(diff2 / dist2));
    }
    return best;
}

}  // namespace vqopt
