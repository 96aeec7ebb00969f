#include "vqopt/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>


namespace vqopt {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json bound_to_json(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    return v;
}

double bound_from_json(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        throw std::runtime_error("config: bad bound '" + s + "'");
    }
    return j.get<double>();
}

json matrix_to_json(const DenseMatrix& m, const std::string& csv_dir, const std::string& stem,
                    const fs::path& base_dir) {
    if (!csv_dir.empty()) {
        fs::create_directories(base_dir / csv_dir);
        const std::string rel = csv_dir + "/" + stem + ".csv";
        write_matrix_csv((base_dir / rel).string(), m);
        return json{{"csv", rel}};
    }
    json rows = json::array();
    for (int i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols; ++j) row.push_back(m.at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

DenseMatrix matrix_from_json(const json& j, const fs::path& base_dir) {
    if (j.is_object()) {
        const std::string rel = j.at("csv").get<std::string>();
        return read_matrix_csv((base_dir / rel).string());
    }
    if (!j.is_array() || j.empty()) throw std::runtime_error("config: bad matrix payload");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j.at(0).size());
    DenseMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<int>(row.size()) != cols)
            throw std::runtime_error("config: ragged matrix payload");
        for (int c = 0; c < cols; ++c) m.at(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

}  // namespace

void write_matrix_csv(const std::string& path, const DenseMatrix& m) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_matrix_csv: cannot open " + path);
    std::string out;
    char buf[40];
    for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m.at(i, j));
            out += buf;
            out += (j + 1 < m.cols) ? ',' : '\n';
        }
    }
    f << out;
}

DenseMatrix read_matrix_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_matrix_csv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && rows.back().size() != row.size())
            throw std::runtime_error("read_matrix_csv: ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("read_matrix_csv: empty file " + path);
    DenseMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m.at(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

namespace {

json objective_to_json(const ObjectiveConfig& o, const std::string& csv_dir,
                       const fs::path& base_dir) {
    json j;
    j["kind"] = o.kind;
    if (o.matrix.rows > 0) j["matrix"] = matrix_to_json(o.matrix, csv_dir, "objective", base_dir);
    if (!o.linear.empty()) j["linear"] = o.linear;
    if (!o.rhs.empty()) j["rhs"] = o.rhs;
    if (o.offset != 0.0) j["offset"] = o.offset;
    if (o.l1_weight != 0.0) j["l1_weight"] = o.l1_weight;
    return j;
}

ObjectiveConfig objective_from_json(const json& j, const fs::path& base_dir) {
    ObjectiveConfig o;
    o.kind = j.at("kind").get<std::string>();
    if (j.contains("matrix")) o.matrix = matrix_from_json(j.at("matrix"), base_dir);
    if (j.contains("linear")) o.linear = j.at("linear").get<std::vector<double>>();
    if (j.contains("rhs")) o.rhs = j.at("rhs").get<std::vector<double>>();
    o.offset = j.value("offset", 0.0);
    o.l1_weight = j.value("l1_weight", 0.0);
    return o;
}

json constraint_to_json(const ConstraintConfig& c, const std::string& csv_dir, int index,
                        const fs::path& base_dir) {
    json j;
    j["kind"] = c.kind;
    if (!c.coeffs.empty()) j["coeffs"] = c.coeffs;
    if (c.matrix.rows > 0)
        j["matrix"] = matrix_to_json(c.matrix, csv_dir, "constraint" + std::to_string(index), base_dir);
    if (!c.linear.empty()) j["linear"] = c.linear;
    if (c.offset != 0.0) j["offset"] = c.offset;
    if (c.bound != 0.0) j["bound"] = c.bound;
    if (c.coeff != 1.0) j["coeff"] = c.coeff;
    if (c.equality) j["equality"] = true;
    return j;
}

ConstraintConfig constraint_from_json(const json& j, const fs::path& base_dir) {
    ConstraintConfig c;
    c.kind = j.at("kind").get<std::string>();
    if (j.contains("coeffs")) c.coeffs = j.at("coeffs").get<std::vector<double>>();
    if (j.contains("matrix")) c.matrix = matrix_from_json(j.at("matrix"), base_dir);
    if (j.contains("linear")) c.linear = j.at("linear").get<std::vector<double>>();
    c.offset = j.value("offset", 0.0);
    c.bound = j.value("bound", 0.0);
    c.coeff = j.value("coeff", 1.0);
    c.equality = j.value("equality", false);
    return c;
}

}  // namespace

ProblemConfig load_problem_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_problem_config: cannot open " + path);
    json j;
    f >> j;
    const fs::path base_dir = fs::path(path).parent_path();

    ProblemConfig cfg;
    cfg.n = j.at("n").get<int>();
    const json& box = j.at("box");
    for (const json& v : box.at("lower")) cfg.box.lower.push_back(bound_from_json(v));
    for (const json& v : box.at("upper")) cfg.box.upper.push_back(bound_from_json(v));
    cfg.objective = objective_from_json(j.at("objective"), base_dir);
    if (j.contains("constraints"))
        for (const json& c : j.at("constraints"))
            cfg.constraints.push_back(constraint_from_json(c, base_dir));
    if (j.contains("constants")) {
        const json& k = j.at("constants");
        cfg.beta = k.value("beta", 0.0);
        cfg.beta_exact = k.value("beta_exact", false);
        cfg.C = k.value("C", 0.0);
        cfg.R = k.value("R", 0.0);
    }
    return cfg;
}

void save_problem_config(const std::string& path, const ProblemConfig& cfg,
                         const std::string& csv_dir) {
    const fs::path base_dir = fs::path(path).parent_path();
    json j;
    j["n"] = cfg.n;
    json lower = json::array();
    json upper = json::array();
    for (double v : cfg.box.lower) lower.push_back(bound_to_json(v));
    for (double v : cfg.box.upper) upper.push_back(bound_to_json(v));
    j["box"] = {{"lower", lower}, {"upper", upper}};
    j["objective"] = objective_to_json(cfg.objective, csv_dir, base_dir);
    json cons = json::array();
    for (std::size_t i = 0; i < cfg.constraints.size(); ++i)
        cons.push_back(constraint_to_json(cfg.constraints[i], csv_dir, static_cast<int>(i), base_dir));
    j["constraints"] = std::move(cons);
    j["constants"] = {{"beta", cfg.beta},
                      {"beta_exact", cfg.beta_exact},
                      {"C", cfg.C},
                      {"R", cfg.R}};
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_problem_config: cannot open " + path);
    f << j.dump(2) << "\n";
}

namespace {

SmoothOracle build_quadratic_form(std::shared_ptr<const DenseMatrix> m,
                                  std::shared_ptr<const std::vector<double>> lin, double offset) {
    SmoothOracle o;
    o.value = [m, lin, offset](std::span<const double> x) {
        std::vector<double> mx(static_cast<std::size_t>(m->rows));
        matvec(*m, x, std::span<double>(mx), Exec::serial());
        double v = dot(x, mx) + offset;
        if (lin)
            for (std::size_t i = 0; i < x.size(); ++i) v += (*lin)[i] * x[i];
        return v;
    };
    o.gradient = [m, lin](std::span<const double> x, std::span<double> out, const Exec& ex) {
        matvec(*m, x, out, ex);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] *= 2.0;
            if (lin) out[i] += (*lin)[i];
        }
    };
    o.smoothness = 2.0 * max_abs_row_sum(*m);
    return o;
}

SmoothOracle build_least_squares(std::shared_ptr<const DenseMatrix> a,
                                 std::shared_ptr<const std::vector<double>> rhs) {
    SmoothOracle o;
    o.value = [a, rhs](std::span<const double> x) {
        std::vector<double> r(rhs->size());
        matvec(*a, x, std::span<double>(r), Exec::serial());
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double d = r[i] - (*rhs)[i];
            s += d * d;
        }
        return s;
    };
    o.gradient = [a, rhs](std::span<const double> x, std::span<double> out, const Exec& ex) {
        std::vector<double> r(rhs->size());
        matvec(*a, x, std::span<double>(r), ex);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = 2.0 * (r[i] - (*rhs)[i]);
        parallel_for(static_cast<std::int64_t>(out.size()), ex, [&](std::int64_t j) {
            double s = 0.0;
            for (int i = 0; i < a->rows; ++i)
                s += a->at(i, static_cast<int>(j)) * r[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(j)] = s;
        });
    };
    double col_max = 0.0;
    for (int j = 0; j < a->cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < a->rows; ++i) s += std::abs(a->at(i, j));
        col_max = std::max(col_max, s);
    }
    double frob = 0.0;
    for (double v : a->a) frob += v * v;
    o.smoothness = 2.0 * std::min(max_abs_row_sum(*a) * col_max, frob);
    return o;
}

}  // namespace

ProblemSpec build_spec(const ProblemConfig& cfg) {
    ProblemSpec spec;
    spec.n = cfg.n;
    spec.box = cfg.box;
    spec.box.validate();
    if (spec.box.dim() != cfg.n) throw std::runtime_error("build_spec: box dimension mismatch");

    const ObjectiveConfig& o = cfg.objective;
    if (o.kind == "quadratic-form") {
        auto m = std::make_shared<DenseMatrix>(o.matrix);
        auto lin = o.linear.empty() ? nullptr
                                    : std::make_shared<const std::vector<double>>(o.linear);
        spec.f = build_quadratic_form(m, lin, o.offset);
    } else if (o.kind == "least-squares") {
        auto a = std::make_shared<DenseMatrix>(o.matrix);
        auto rhs = std::make_shared<const std::vector<double>>(o.rhs);
        if (static_cast<int>(rhs->size()) != a->rows)
            throw std::runtime_error("build_spec: least-squares rhs length mismatch");
        spec.f = build_least_squares(a, rhs);
    } else if (o.kind == "linear") {
        spec.f = linear_oracle(o.linear, o.offset);
    } else {
        throw std::runtime_error("build_spec: unknown objective kind '" + o.kind + "'");
    }
    spec.f_tilde = o.l1_weight > 0.0 ? SeparableTerm::weighted_l1(o.l1_weight)
                                     : SeparableTerm::zero();

    spec.m = static_cast<int>(cfg.constraints.size());
    bool any_equality = false;
    for (const ConstraintConfig& c : cfg.constraints) {
        if (c.kind == "linear") {
            spec.g.push_back(linear_oracle(c.coeffs, c.offset));
            spec.g_tilde.push_back(SeparableTerm::zero());
        } else if (c.kind == "quadratic-form") {
            auto m = std::make_shared<DenseMatrix>(c.matrix);
            auto lin = c.linear.empty() ? nullptr
                                        : std::make_shared<const std::vector<double>>(c.linear);
            spec.g.push_back(build_quadratic_form(m, lin, c.offset));
            spec.g_tilde.push_back(SeparableTerm::zero());
        } else if (c.kind == "l2-ball") {
            SmoothOracle g;
            const double bound = c.bound;
            g.value = [bound](std::span<const double> x) {
                double s = 0.0;
                for (double v : x) s += v * v;
                return s - bound;
            };
            g.gradient = [](std::span<const double> x, std::span<double> out, const Exec&) {
                for (std::size_t i = 0; i < x.size(); ++i) out[i] = 2.0 * x[i];
            };
            g.smoothness = 2.0;
            spec.g.push_back(std::move(g));
            spec.g_tilde.push_back(SeparableTerm::zero());
        } else if (c.kind == "l1") {
            SmoothOracle g = zero_oracle(cfg.n);
            const double bound = c.bound;
            g.value = [bound](std::span<const double>) { return -bound; };
            spec.g.push_back(std::move(g));
            spec.g_tilde.push_back(SeparableTerm::weighted_l1(c.coeff));
        } else {
            throw std::runtime_error("build_spec: unknown constraint kind '" + c.kind + "'");
        }
        any_equality = any_equality || c.equality;
    }
    if (any_equality) {
        spec.equality_mask.resize(cfg.constraints.size(), 0);
        for (std::size_t k = 0; k < cfg.constraints.size(); ++k)
            spec.equality_mask[k] = cfg.constraints[k].equality ? 1 : 0;
    }
    spec.beta = cfg.beta;
    spec.beta_exact = cfg.beta_exact;
    spec.C = cfg.C;
    spec.R = cfg.R;
    spec.validate();
    return spec;
}

ProblemConfig problem_config_from_instance(const GeneratedInstance& inst) {
    ProblemConfig cfg;
    const ProblemSpec& spec = inst.spec;
    cfg.n = spec.n;
    cfg.box = spec.box;
    cfg.beta = spec.beta;
    cfg.beta_exact = spec.beta_exact;
    cfg.C = spec.C;
    cfg.R = spec.R;

    const std::string& name = inst.desc.name;
    if (name == "qp1") {
        cfg.objective.kind = "quadratic-form";
        cfg.objective.matrix = DenseMatrix(1, 1);
        cfg.objective.matrix.at(0, 0) = 1.0;
        ConstraintConfig c;
        c.kind = "linear";
        c.coeffs = {-1.0};
        c.offset = 1.0;
        cfg.constraints.push_back(std::move(c));
        return cfg;
    }
    if (name == "ball1") {
        cfg.objective.kind = "linear";
        cfg.objective.linear = inst.linear;
        ConstraintConfig c;
        c.kind = "l2-ball";
        c.bound = inst.desc.b;
        cfg.constraints.push_back(std::move(c));
        return cfg;
    }
    if (name == "gmv-l2" || name == "gmv-l1") {
        cfg.objective.kind = "quadratic-form";
        if (!inst.matrix) throw std::runtime_error("problem_config_from_instance: missing matrix");
        cfg.objective.matrix = *inst.matrix;
        ConstraintConfig budget;
        budget.kind = "linear";
        budget.coeffs.assign(static_cast<std::size_t>(spec.n), -1.0);
        budget.offset = 1.0;
        budget.equality = inst.desc.equality;
        cfg.constraints.push_back(std::move(budget));
        ConstraintConfig norm_c;
        if (name == "gmv-l2") {
            norm_c.kind = "l2-ball";
            norm_c.bound = inst.desc.b;
        } else {
            norm_c.kind = "l1";
            norm_c.bound = inst.desc.b;
            norm_c.coeff = 1.0;
        }
        cfg.constraints.push_back(std::move(norm_c));
        return cfg;
    }
    if (name == "lasso") {
        cfg.objective.kind = "least-squares";
        if (!inst.matrix) throw std::runtime_error("problem_config_from_instance: missing matrix");
        cfg.objective.matrix = *inst.matrix;
        cfg.objective.rhs = inst.rhs;
        cfg.objective.l1_weight = inst.desc.lambda_weight;
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j < spec.n; ++j) {
                ConstraintConfig c;
                c.kind = "linear";
                c.coeffs.assign(static_cast<std::size_t>(spec.n), 0.0);
                c.coeffs[static_cast<std::size_t>(j)] = pass == 0 ? 1.0 : -1.0;
                c.offset = -inst.desc.radius;
                cfg.constraints.push_back(std::move(c));
            }
        return cfg;
    }
    throw std::runtime_error("problem_config_from_instance: unsupported instance '" + name + "'");
}

std::string RunConfig::instance_key() const {
    return instance_file.empty() ? instance.key() : "file:" + instance_file;
}

std::string run_config_to_json(const RunConfig& cfg) {
    json inst;
    if (!cfg.instance_file.empty()) {
        inst = {{"file", cfg.instance_file}};
    } else {
        inst = {{"name", cfg.instance.name}, {"n", cfg.instance.n},
                {"rows", cfg.instance.rows}, {"seed", cfg.instance.seed},
                {"b", cfg.instance.b},       {"lambda_weight", cfg.instance.lambda_weight},
                {"radius", cfg.instance.radius}, {"equality", cfg.instance.equality}};
    }
    json j = {{"instance", inst},   {"algorithm", cfg.algorithm},
              {"alpha", cfg.alpha}, {"iters", cfg.iters},
              {"stride", cfg.stride}, {"diagnostics", cfg.diagnostics},
              {"timing", cfg.timing}, {"threads", cfg.threads},
              {"pd_step", cfg.pd_step}, {"pd_lambda_max", cfg.pd_lambda_max},
              {"out", cfg.out}};
    return j.dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
    json j = json::parse(text);
    RunConfig cfg;
    const json& inst = j.at("instance");
    if (inst.contains("file")) {
        cfg.instance_file = inst.at("file").get<std::string>();
    } else {
        cfg.instance.name = inst.at("name").get<std::string>();
        cfg.instance.n = inst.value("n", 0);
        cfg.instance.rows = inst.value("rows", 0L);
        cfg.instance.seed = inst.value("seed", static_cast<std::uint64_t>(0));
        cfg.instance.b = inst.value("b", 0.0);
        cfg.instance.lambda_weight = inst.value("lambda_weight", 0.0);
        cfg.instance.radius = inst.value("radius", 0.0);
        cfg.instance.equality = inst.value("equality", false);
    }
    cfg.algorithm = j.value("algorithm", std::string("new-constant"));
    cfg.alpha = j.value("alpha", 0.0);
    cfg.iters = j.value("iters", 1000L);
    cfg.stride = j.value("stride", 1L);
    cfg.diagnostics = j.value("diagnostics", false);
    cfg.timing = j.value("timing", false);
    cfg.threads = j.value("threads", 1);
    cfg.pd_step = j.value("pd_step", 0.0);
    cfg.pd_lambda_max = j.value("pd_lambda_max", 0.0);
    cfg.out = j.value("out", std::string());
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_run_config: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return run_config_from_json(ss.str());
}

}  // namespace vqopt
