#include "vqopt/instances.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "vqopt/rng.hpp"

namespace vqopt {

std::string InstanceDescriptor::key() const {
    std::ostringstream os;
    os.precision(17);
    os << name << "|n=" << n << "|rows=" << rows << "|seed=" << seed << "|b=" << b
       << "|lw=" << lambda_weight << "|r=" << radius << "|eq=" << (equality ? 1 : 0);
    return os.str();
}

namespace {

SmoothOracle quadratic_form_oracle(std::shared_ptr<const DenseMatrix> m) {
    SmoothOracle o;
    o.value = [m](std::span<const double> x) {
        std::vector<double> mx(static_cast<std::size_t>(m->rows));
        matvec(*m, x, std::span<double>(mx), Exec::serial());
        return dot(x, mx);
    };
    o.gradient = [m](std::span<const double> x, std::span<double> out, const Exec& ex) {
        matvec(*m, x, out, ex);
        for (auto& v : out) v *= 2.0;
    };
    o.smoothness = 2.0 * max_abs_row_sum(*m);
    return o;
}

SmoothOracle l2_ball_oracle(int n, double bound) {
    SmoothOracle o;
    o.value = [n, bound](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        (void)n;
        return s - bound;
    };
    o.gradient = [](std::span<const double> x, std::span<double> out, const Exec&) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = 2.0 * x[i];
    };
    o.smoothness = 2.0;
    return o;
}

SmoothOracle constant_oracle(int n, double value) {
    SmoothOracle o = zero_oracle(n);
    o.value = [value](std::span<const double>) { return value; };
    return o;
}

}  // namespace

GeneratedInstance gen_qp1() {
    GeneratedInstance inst;
    inst.desc.name = "qp1";
    inst.desc.n = 1;
    inst.desc.provenance = "analytic scalar program exercising the linear-constraint rate bound";

    ProblemSpec spec;
    spec.n = 1;
    spec.m = 1;
    spec.f.value = [](std::span<const double> x) { return x[0] * x[0]; };
    spec.f.gradient = [](std::span<const double> x, std::span<double> out, const Exec&) {
        out[0] = 2.0 * x[0];
    };
    spec.f.smoothness = 2.0;
    spec.f_tilde = SeparableTerm::zero();
    spec.g.push_back(linear_oracle({-1.0}, 1.0));  // 1 - x
    spec.g_tilde.push_back(SeparableTerm::zero());
    spec.box = BoxSet::bounded(1, -10.0, 10.0);
    spec.beta = 1.0;
    spec.beta_exact = true;
    spec.C = 11.0;  // sup |1 - x| over the box
    spec.R = 20.0;
    inst.spec = std::move(spec);

    ReferenceSolution ref;
    ref.method = ReferenceSolution::Method::Analytic;
    ref.x_star = {1.0};
    ref.lambda_star = {2.0};
    ref.f_star = 1.0;
    ref.tolerance = 0.0;
    inst.reference = ref;
    return inst;
}

GeneratedInstance gen_ball1_with(std::vector<double> c, double b) {
    if (!(b > 0.0)) throw std::invalid_argument("gen_ball1: b must be positive");
    const int n = static_cast<int>(c.size());
    GeneratedInstance inst;
    inst.desc.name = "ball1";
    inst.desc.n = n;
    inst.desc.b = b;
    inst.desc.provenance = "linear objective over an l2 ball, nonlinear-constraint rate bounds";

    inst.linear = c;

    ProblemSpec spec;
    spec.n = n;
    spec.m = 1;
    spec.f = linear_oracle(c);
    spec.f_tilde = SeparableTerm::zero();
    spec.g.push_back(l2_ball_oracle(n, b));
    spec.g_tilde.push_back(SeparableTerm::zero());
    spec.box = BoxSet::bounded(n, -1.0, 1.0);
    const double sn = std::sqrt(static_cast<double>(n));
    spec.beta = 2.0 * sn;  // sup ||2x|| over the box
    spec.beta_exact = true;
    spec.C = std::max(b, static_cast<double>(n) - b);
    spec.R = 2.0 * sn;
    inst.spec = std::move(spec);

    const double cn = norm2(c);
    ReferenceSolution ref;
    if (cn == 0.0) {
        ref.method = ReferenceSolution::Method::Analytic;
        ref.x_star.assign(static_cast<std::size_t>(n), 0.0);
        ref.lambda_star = {0.0};
        ref.f_star = 0.0;
        ref.tolerance = 0.0;
        inst.reference = ref;
    } else if (b <= 1.0) {
        // Ball boundary is active, box is not: x* = -sqrt(b) c / ||c||.
        const double sb = std::sqrt(b);
        ref.method = ReferenceSolution::Method::Analytic;
        ref.x_star.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            ref.x_star[static_cast<std::size_t>(i)] = -sb * c[static_cast<std::size_t>(i)] / cn;
        ref.lambda_star = {cn / (2.0 * sb)};
        ref.f_star = inst.spec.F(ref.x_star);  // re-evaluated, not the closed form
        ref.tolerance = 0.0;
        inst.reference = ref;
    }
    return inst;
}

GeneratedInstance gen_ball1(int n, std::uint64_t seed, double b) {
    if (n < 1) throw std::invalid_argument("gen_ball1: n must be >= 1");
    CounterRng rng(seed);
    std::vector<double> c(static_cast<std::size_t>(n));
    double cn = 0.0;
    do {
        for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = rng.normal();
        cn = norm2(c);
    } while (cn < 1e-12);
    GeneratedInstance inst = gen_ball1_with(std::move(c), b);
    inst.desc.seed = seed;
    return inst;
}

DenseMatrix gen_correlation_matrix(int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("gen_correlation_matrix: n must be >= 2");
    DenseMatrix nmat(n, n);
    CounterRng rng(seed);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) nmat.at(i, j) = rng.normal();

    DenseMatrix ntn = gram(nmat);
    // Guard against an underflowing diagonal entry (column nearly zero).
    for (int j = 0; j < n; ++j) {
        int guard = 0;
        while (ntn.at(j, j) < 1e-12 && guard++ < 64) {
            for (int i = 0; i < n; ++i) nmat.at(i, j) = rng.normal();
            ntn = gram(nmat);
        }
    }

    // Normalize the upper triangle and mirror so symmetry is exact.
    DenseMatrix m(n, n);
    std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        inv_sqrt[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(ntn.at(i, i));
    for (int i = 0; i < n; ++i) {
        m.at(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double v = ntn.at(i, j) * inv_sqrt[static_cast<std::size_t>(i)] *
                             inv_sqrt[static_cast<std::size_t>(j)];
            m.at(i, j) = v;
            m.at(j, i) = v;
        }
    }
    return m;
}

GeneratedInstance gen_gmv_l2(int n, std::uint64_t seed, bool equality_row) {
    if (n < 2) throw std::invalid_argument("gen_gmv_l2: n must be >= 2");
    GeneratedInstance inst;
    inst.desc.name = "gmv-l2";
    inst.desc.n = n;
    inst.desc.seed = seed;
    inst.desc.equality = equality_row;
    inst.desc.provenance = "minimum-variance portfolio, l2 norm budget";
    const double b = 3.0 / static_cast<double>(n);
    inst.desc.b = b;

    auto m = std::make_shared<DenseMatrix>(gen_correlation_matrix(n, seed));
    inst.matrix = *m;

    ProblemSpec spec;
    spec.n = n;
    spec.m = 2;
    spec.f = quadratic_form_oracle(m);
    spec.f_tilde = SeparableTerm::zero();
    spec.g.push_back(linear_oracle(std::vector<double>(static_cast<std::size_t>(n), -1.0), 1.0));
    spec.g_tilde.push_back(SeparableTerm::zero());
    spec.g.push_back(l2_ball_oracle(n, b));
    spec.g_tilde.push_back(SeparableTerm::zero());
    spec.box = BoxSet::bounded(n, 0.0, 1.0);
    const double nd = static_cast<double>(n);
    spec.beta = std::sqrt(5.0 * nd);  // sup sqrt(||-1||^2 + ||2x||^2) over [0,1]^n
    spec.beta_exact = true;
    const double g1_max = std::max(nd - 1.0, 1.0);
    const double g2_max = std::max(b, nd - b);
    spec.C = std::sqrt(g1_max * g1_max + g2_max * g2_max);
    spec.R = std::sqrt(nd);
    if (equality_row) spec.equality_mask = {1, 0};
    inst.spec = std::move(spec);
    return inst;
}

GeneratedInstance gen_gmv_l1(int n, std::uint64_t seed, double b, bool equality_row) {
    if (n < 2) throw std::invalid_argument("gen_gmv_l1: n must be >= 2");
    if (b <= 0.0) b = 3.0 / static_cast<double>(n);
    GeneratedInstance inst;
    inst.desc.name = "gmv-l1";
    inst.desc.n = n;
    inst.desc.seed = seed;
    inst.desc.b = b;
    inst.desc.equality = equality_row;
    inst.desc.provenance = "minimum-variance portfolio, l1 norm budget (sparsity-promoting)";

    auto m = std::make_shared<DenseMatrix>(gen_correlation_matrix(n, seed));
    inst.matrix = *m;

    ProblemSpec spec;
    spec.n = n;
    spec.m = 2;
    spec.f = quadratic_form_oracle(m);
    spec.f_tilde = SeparableTerm::zero();
    spec.g.push_back(linear_oracle(std::vector<double>(static_cast<std::size_t>(n), -1.0), 1.0));
    spec.g_tilde.push_back(SeparableTerm::zero());
    // G_2(x) = ||x||_1 - b: the smooth part is the constant -b, the
    // separable part carries the norm.
    spec.g.push_back(constant_oracle(n, -b));
    spec.g_tilde.push_back(SeparableTerm::weighted_l1(1.0));
    spec.box = BoxSet::bounded(n, -1.0, 1.0);
    const double nd = static_cast<double>(n);
    spec.beta = std::sqrt(2.0 * nd);  // stacked moduli sqrt(n) and sqrt(n)
    spec.beta_exact = true;
    const double g1_max = 1.0 + nd;
    const double g2_max = std::max(b, nd - b);
    spec.C = std::sqrt(g1_max * g1_max + g2_max * g2_max);
    spec.R = 2.0 * std::sqrt(nd);
    if (equality_row) spec.equality_mask = {1, 0};
    inst.spec = std::move(spec);
    return inst;
}

GeneratedInstance gen_constrained_lasso(long rows, int n, std::uint64_t seed,
                                        double lambda_weight, double radius) {
    if (rows < 1 || n < 1) throw std::invalid_argument("gen_constrained_lasso: rows, n >= 1");
    if (lambda_weight < 0.0)
        throw std::invalid_argument("gen_constrained_lasso: lambda_weight must be >= 0");
    if (!(radius > 0.0)) throw std::invalid_argument("gen_constrained_lasso: radius must be > 0");

    GeneratedInstance inst;
    inst.desc.name = "lasso";
    inst.desc.n = n;
    inst.desc.rows = rows;
    inst.desc.seed = seed;
    inst.desc.lambda_weight = lambda_weight;
    inst.desc.radius = radius;
    inst.desc.provenance = "constrained lasso with a planted sparse ground truth";

    CounterRng rng(seed);
    auto a = std::make_shared<DenseMatrix>(static_cast<int>(rows), n);
    for (long i = 0; i < rows; ++i)
        for (int j = 0; j < n; ++j) a->at(static_cast<int>(i), j) = rng.normal();
    inst.matrix = *a;

    // Planted sparse truth with ceil(n/10) unit-magnitude entries.
    std::vector<double> truth(static_cast<std::size_t>(n), 0.0);
    const int nnz = std::max(1, n / 10);
    for (int s = 0; s < nnz; ++s) {
        const int pos = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
        truth[static_cast<std::size_t>(pos)] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    }
    auto rhs = std::make_shared<std::vector<double>>(static_cast<std::size_t>(rows));
    matvec(*a, truth, std::span<double>(*rhs), Exec::serial());
    inst.rhs = *rhs;

    ProblemSpec spec;
    spec.n = n;
    spec.m = 2 * n;
    spec.f.value = [a, rhs](std::span<const double> x) {
        std::vector<double> r(rhs->size());
        matvec(*a, x, std::span<double>(r), Exec::serial());
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double d = r[i] - (*rhs)[i];
            s += d * d;
        }
        return s;
    };
    spec.f.gradient = [a, rhs](std::span<const double> x, std::span<double> out, const Exec& ex) {
        std::vector<double> r(rhs->size());
        matvec(*a, x, std::span<double>(r), ex);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = 2.0 * (r[i] - (*rhs)[i]);
        // out = A^T r with fixed per-column order.
        parallel_for(static_cast<std::int64_t>(out.size()), ex, [&](std::int64_t j) {
            double s = 0.0;
            for (int i = 0; i < a->rows; ++i) s += a->at(i, static_cast<int>(j)) * r[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(j)] = s;
        });
    };
    {
        // sigma_max(A)^2 <= min(||A||_1 ||A||_inf, ||A||_F^2)
        double col_max = 0.0;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < a->rows; ++i) s += std::abs(a->at(i, j));
            col_max = std::max(col_max, s);
        }
        double frob = 0.0;
        for (double v : a->a) frob += v * v;
        spec.f.smoothness = 2.0 * std::min(max_abs_row_sum(*a) * col_max, frob);
    }
    spec.f_tilde = lambda_weight > 0.0 ? SeparableTerm::weighted_l1(lambda_weight)
                                       : SeparableTerm::zero();
    // C x - d <= 0 with C = [I; -I], d = radius * 1.
    for (int j = 0; j < n; ++j) {
        std::vector<double> row(static_cast<std::size_t>(n), 0.0);
        row[static_cast<std::size_t>(j)] = 1.0;
        spec.g.push_back(linear_oracle(row, -radius));
        spec.g_tilde.push_back(SeparableTerm::zero());
    }
    for (int j = 0; j < n; ++j) {
        std::vector<double> row(static_cast<std::size_t>(n), 0.0);
        row[static_cast<std::size_t>(j)] = -1.0;
        spec.g.push_back(linear_oracle(row, -radius));
        spec.g_tilde.push_back(SeparableTerm::zero());
    }
    spec.box = BoxSet::bounded(n, -10.0, 10.0);
    spec.beta = std::sqrt(2.0);
    spec.beta_exact = true;
    const double per = (10.0 - radius) * (10.0 - radius) + (10.0 + radius) * (10.0 + radius);
    spec.C = std::sqrt(static_cast<double>(n) * per);
    spec.R = 20.0 * std::sqrt(static_cast<double>(n));
    inst.spec = std::move(spec);
    return inst;
}

GeneratedInstance make_instance(const InstanceDescriptor& desc) {
    if (desc.name == "qp1") return gen_qp1();
    if (desc.name == "ball1")
        return gen_ball1(desc.n > 0 ? desc.n : 2, desc.seed, desc.b > 0.0 ? desc.b : 0.25);
    if (desc.name == "gmv-l2") return gen_gmv_l2(desc.n > 0 ? desc.n : 50, desc.seed, desc.equality);
    if (desc.name == "gmv-l1")
        return gen_gmv_l1(desc.n > 0 ? desc.n : 50, desc.seed, desc.b, desc.equality);
    if (desc.name == "lasso")
        return gen_constrained_lasso(desc.rows > 0 ? desc.rows : 20, desc.n > 0 ? desc.n : 10,
                                     desc.seed, desc.lambda_weight,
                                     desc.radius > 0.0 ? desc.radius : 1.0);
    throw std::invalid_argument("make_instance: unknown instance '" + desc.name + "'");
}

}  // namespace vqopt
