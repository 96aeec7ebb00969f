#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "vqopt/config_io.hpp"
#include "vqopt/instances.hpp"
#include "vqopt/rng.hpp"
#include "vqopt/trace_io.hpp"

using namespace vqopt;

namespace {

std::filesystem::path temp_dir() {
    auto p = std::filesystem::temp_directory_path() / "vqopt-config-test";
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("matrix CSV round-trips bit-exactly") {
    CounterRng rng(8);
    DenseMatrix m(7, 5);
    for (auto& v : m.a) v = rng.normal() * std::pow(10.0, rng.uniform(-8.0, 8.0));
    const auto path = (temp_dir() / "m.csv").string();
    write_matrix_csv(path, m);
    DenseMatrix back = read_matrix_csv(path);
    CHECK(back == m);
}

TEST_CASE("generated instances survive the config round trip") {
    for (const char* name : {"qp1", "ball1", "gmv-l2", "gmv-l1", "lasso"}) {
        InstanceDescriptor desc;
        desc.name = name;
        desc.n = std::string(name) == "qp1" ? 1 : 6;
        desc.rows = 8;
        desc.seed = 17;
        desc.b = std::string(name) == "gmv-l1" ? 1.5 : 0.0;
        desc.lambda_weight = 0.25;
        desc.radius = 1.0;
        GeneratedInstance inst = make_instance(desc);

        ProblemConfig cfg = problem_config_from_instance(inst);
        const auto path = (temp_dir() / (std::string(name) + ".json")).string();
        save_problem_config(path, cfg);
        ProblemSpec loaded = build_spec(load_problem_config(path));

        REQUIRE(loaded.n == inst.spec.n);
        REQUIRE(loaded.m == inst.spec.m);
        CHECK(loaded.beta == inst.spec.beta);
        CHECK(loaded.C == inst.spec.C);
        CHECK(loaded.R == inst.spec.R);

        CounterRng rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(static_cast<std::size_t>(inst.spec.n));
            for (int i = 0; i < inst.spec.n; ++i) {
                const auto iu = static_cast<std::size_t>(i);
                double lo = inst.spec.box.lower[iu];
                double hi = inst.spec.box.upper[iu];
                if (!std::isfinite(lo)) lo = -5.0;
                if (!std::isfinite(hi)) hi = 5.0;
                x[iu] = rng.uniform(lo, hi);
            }
            CHECK(loaded.F(x) == inst.spec.F(x));
            CHECK(eval_G(loaded, x) == eval_G(inst.spec, x));
        }
    }
}

TEST_CASE("config with CSV matrix payloads loads identically") {
    GeneratedInstance gmv = gen_gmv_l2(10, 23);
    ProblemConfig cfg = problem_config_from_instance(gmv);
    const auto dir = temp_dir();
    const auto path = (dir / "gmv-csv.json").string();
    save_problem_config(path, cfg, "payloads");
    ProblemSpec loaded = build_spec(load_problem_config(path));
    std::vector<double> x(10, 0.1);
    CHECK(loaded.F(x) == gmv.spec.F(x));
}

TEST_CASE("infinite box bounds survive the config format") {
    ProblemConfig cfg;
    cfg.n = 2;
    cfg.box.lower = {-std::numeric_limits<double>::infinity(), 0.0};
    cfg.box.upper = {1.0, std::numeric_limits<double>::infinity()};
    cfg.objective.kind = "linear";
    cfg.objective.linear = {1.0, -1.0};
    cfg.beta = 1.0;
    ConstraintConfig c;
    c.kind = "linear";
    c.coeffs = {1.0, 1.0};
    c.offset = -1.0;
    cfg.constraints.push_back(c);
    const auto path = (temp_dir() / "inf-box.json").string();
    save_problem_config(path, cfg);
    ProblemConfig back = load_problem_config(path);
    CHECK(back.box.lower[0] == -std::numeric_limits<double>::infinity());
    CHECK(back.box.upper[1] == std::numeric_limits<double>::infinity());
    CHECK(back.box.lower[1] == 0.0);
}

TEST_CASE("run config round-trips losslessly through JSON") {
    RunConfig cfg;
    cfg.instance.name = "gmv-l1";
    cfg.instance.n = 50;
    cfg.instance.seed = 42;
    cfg.instance.b = 1.5;
    cfg.algorithm = "yu-neely";
    cfg.alpha = 131.25;
    cfg.iters = 10000;
    cfg.stride = 100;
    cfg.diagnostics = true;
    cfg.threads = 4;
    cfg.out = "trace.csv";

    const std::string j1 = run_config_to_json(cfg);
    RunConfig back = run_config_from_json(j1);
    const std::string j2 = run_config_to_json(back);
    CHECK(j1 == j2);
    CHECK(back.instance.key() == cfg.instance.key());
    CHECK(back.algorithm == cfg.algorithm);
    CHECK(back.alpha == cfg.alpha);
    CHECK(back.iters == cfg.iters);
}

TEST_CASE("trace CSV parses back losslessly") {
    std::vector<IterationRecord> records;
    CounterRng rng(5);
    for (long t = 0; t <= 5; ++t) {
        IterationRecord r;
        r.t = t * 100;
        r.f_x = rng.normal() * 1e3;
        r.f_xbar = rng.normal();
        r.max_violation_xbar = std::abs(rng.normal()) * 1e-7;
        r.queue_norm = std::abs(rng.normal());
        r.alpha_t = 131.3815;
        r.drift = rng.normal() * 1e-12;
        r.wall_time_ns = static_cast<std::int64_t>(rng.next_u64() % 1000000);
        records.push_back(r);
    }
    const std::string csv = format_trace(records);
    const std::vector<IterationRecord> back = parse_trace(csv);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].t == records[i].t);
        CHECK(back[i].f_x == records[i].f_x);
        CHECK(back[i].f_xbar == records[i].f_xbar);
        CHECK(back[i].max_violation_xbar == records[i].max_violation_xbar);
        CHECK(back[i].queue_norm == records[i].queue_norm);
        CHECK(back[i].alpha_t == records[i].alpha_t);
        CHECK(back[i].drift == records[i].drift);
        CHECK(back[i].wall_time_ns == records[i].wall_time_ns);
    }
}

TEST_CASE("trace CSV uses LF endings and the documented header") {
    std::vector<IterationRecord> one(1);
    const std::string csv = format_trace(one);
    CHECK(csv.find("\r") == std::string::npos);
    CHECK(csv.rfind("t,F_x,F_xbar,max_violation_xbar,queue_norm,alpha_t,drift,wall_time_ns\n",
                    0) == 0);
}
