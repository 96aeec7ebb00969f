// Command-line driver: generate instances, run the solvers, emit CSV traces
// and JSON summaries, compare algorithms, and run the invariant suite.
//
// Exit codes: 0 completed, 1 verify found violations, 2 run aborted on a
// non-finite oracle output, 3 configuration error, 4 missing reference.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vqopt/config_io.hpp"
#include "vqopt/diagnostics.hpp"
#include "vqopt/instances.hpp"
#include "vqopt/reference.hpp"
#include "vqopt/solver.hpp"
#include "vqopt/trace_io.hpp"

namespace fs = std::filesystem;
using namespace vqopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitNanAbort = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNoReference = 4;

std::string out_path(const std::string& path) {
    if (path.empty()) return path;
    if (fs::path(path).is_absolute()) return path;
    if (const char* dir = std::getenv("VQOPT_OUT_DIR")) {
        fs::create_directories(dir);
        return (fs::path(dir) / path).string();
    }
    return path;
}

struct LoadedInstance {
    ProblemSpec spec;
    std::optional<ReferenceSolution> reference;
    std::optional<GeneratedInstance> generated;
    std::string label;
};

LoadedInstance load_instance(const RunConfig& cfg) {
    LoadedInstance out;
    if (!cfg.instance_file.empty()) {
        out.spec = build_spec(load_problem_config(cfg.instance_file));
        out.label = cfg.instance_file;
        return out;
    }
    GeneratedInstance gi = make_instance(cfg.instance);
    out.spec = gi.spec;
    out.reference = gi.reference;
    out.label = gi.desc.key();
    out.generated = std::move(gi);
    return out;
}

SolveOptions to_solve_options(const RunConfig& cfg, const LoadedInstance& inst) {
    SolveOptions opts;
    const auto alg = algorithm_from_string(cfg.algorithm);
    if (!alg) throw std::runtime_error("unknown algorithm '" + cfg.algorithm + "'");
    opts.algorithm = *alg;
    opts.max_iters = cfg.iters;
    opts.stride = cfg.stride;
    opts.diagnostics = cfg.diagnostics;
    opts.timing = cfg.timing;
    opts.threads = cfg.threads;
    opts.alpha = cfg.alpha;
    if (opts.algorithm == Algorithm::PdSubgradient) {
        opts.pd_step = cfg.pd_step;
        if (cfg.pd_lambda_max > 0.0) {
            opts.pd_lambda_max.assign(static_cast<std::size_t>(inst.spec.m), cfg.pd_lambda_max);
        } else if (inst.reference) {
            opts.pd_lambda_max = default_lambda_max(inst.spec, *inst.reference);
        } else {
            throw std::runtime_error(
                "pd-subgradient needs --pd-lambda-max (no reference multiplier available)");
        }
        if (!(opts.pd_step > 0.0))
            throw std::runtime_error("pd-subgradient needs --pd-step > 0");
    }
    return opts;
}

void add_instance_flags(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--instance", cfg.instance.name,
                    "instance name {qp1, ball1, gmv-l2, gmv-l1, lasso} or a problem JSON path");
    cmd->add_option("--n", cfg.instance.n, "instance dimension");
    cmd->add_option("--rows", cfg.instance.rows, "lasso row count");
    cmd->add_option("--seed", cfg.instance.seed, "generator seed");
    cmd->add_option("--b", cfg.instance.b, "norm bound (ball1 / gmv instances)");
    cmd->add_option("--lambda-weight", cfg.instance.lambda_weight, "lasso l1 weight");
    cmd->add_option("--radius", cfg.instance.radius, "lasso constraint radius");
    cmd->add_flag("--equality", cfg.instance.equality,
                  "use the signed-queue equality row for the budget constraint");
}

void add_run_flags(CLI::App* cmd, RunConfig& cfg, bool with_algorithm = true) {
    if (with_algorithm)
        cmd->add_option("--algorithm", cfg.algorithm,
                        "new-constant | new-adaptive | yu-neely | pd-subgradient");
    cmd->add_option("--alpha", cfg.alpha, "constant alpha (0 = default rule)");
    cmd->add_option("--iters", cfg.iters, "iteration budget");
    cmd->add_option("--stride", cfg.stride, "trace stride");
    cmd->add_flag("--diagnostics", cfg.diagnostics, "assert queue invariants every iteration");
    cmd->add_flag("--timing", cfg.timing,
                  "record per-iteration wall time in the trace (breaks byte reproducibility)");
    cmd->add_option("--threads", cfg.threads, "worker threads for the coordinate kernels");
    cmd->add_option("--pd-step", cfg.pd_step, "pd-subgradient step size c");
    cmd->add_option("--pd-lambda-max", cfg.pd_lambda_max,
                    "pd-subgradient multiplier cap (scalar, broadcast)");
}

void normalize_instance(RunConfig& cfg) {
    // A name that points at an existing .json file is a problem config.
    if (!cfg.instance.name.empty() && fs::exists(cfg.instance.name) &&
        cfg.instance.name.size() > 5 &&
        cfg.instance.name.substr(cfg.instance.name.size() - 5) == ".json") {
        cfg.instance_file = cfg.instance.name;
        cfg.instance.name.clear();
    }
}

int cmd_solve(RunConfig cfg, const std::string& config_path, const std::string& summary_path) {
    try {
        if (!config_path.empty()) cfg = load_run_config(config_path);
        normalize_instance(cfg);
        if (cfg.instance.name.empty() && cfg.instance_file.empty())
            throw std::runtime_error("solve needs --instance or --config");
        LoadedInstance inst = load_instance(cfg);
        SolveOptions opts = to_solve_options(cfg, inst);

        SolverRun result = run(inst.spec, opts);

        const std::string trace_path = out_path(cfg.out.empty() ? "trace.csv" : cfg.out);
        write_trace(trace_path, result.trace);
        RunSummary s = summarize(inst.label, cfg.algorithm, result);
        std::cout << summary_line(s) << "\n";
        if (!summary_path.empty()) {
            std::ofstream f(out_path(summary_path), std::ios::binary);
            f << summary_json(s) << "\n";
        }
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
        return result.status == RunStatus::NanAbort ? kExitNanAbort : kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_compare(std::vector<std::string> config_paths, RunConfig shared,
                std::vector<std::string> algorithms, const std::string& out_dir) {
    try {
        std::vector<RunConfig> cfgs;
        for (const auto& p : config_paths) cfgs.push_back(load_run_config(p));
        for (const auto& a : algorithms) {
            RunConfig c = shared;
            c.algorithm = a;
            cfgs.push_back(c);
        }
        if (cfgs.size() < 2) throw std::runtime_error("compare needs at least two run configs");
        for (auto& c : cfgs) normalize_instance(c);
        for (std::size_t i = 1; i < cfgs.size(); ++i) {
            if (cfgs[i].instance_key() != cfgs[0].instance_key())
                throw std::runtime_error("compare requires all configs to share one instance");
            if (cfgs[i].iters != cfgs[0].iters || cfgs[i].stride != cfgs[0].stride)
                throw std::runtime_error("compare requires identical iters and stride");
        }

        const std::string dir = out_path(out_dir.empty() ? "compare-out" : out_dir);
        fs::create_directories(dir);

        LoadedInstance inst = load_instance(cfgs[0]);
        std::vector<SolverRun> runs;
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < cfgs.size(); ++i) {
            RunConfig c = cfgs[i];
            c.timing = true;  // wall-time ratios need per-iteration times
            SolveOptions opts = to_solve_options(c, inst);
            runs.push_back(run(inst.spec, opts));
            std::string label = c.algorithm;
            for (std::size_t j = 0; j < labels.size(); ++j)
                if (labels[j] == label) label += "_" + std::to_string(i);
            labels.push_back(label);
            write_trace((fs::path(dir) / (label + ".csv")).string(), runs.back().trace);
        }

        // Aligned CSV of objective and violation columns.
        std::string csv = "t";
        for (const auto& l : labels) csv += ",F_xbar_" + l + ",max_violation_" + l;
        csv += "\n";
        const std::size_t rows = runs[0].trace.size();
        char buf[64];
        for (std::size_t r = 0; r < rows; ++r) {
            csv += std::to_string(runs[0].trace[r].t);
            for (const auto& rn : runs) {
                std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", rn.trace[r].f_xbar,
                              rn.trace[r].max_violation_xbar);
                csv += buf;
            }
            csv += '\n';
        }
        {
            std::ofstream f(fs::path(dir) / "compare.csv", std::ios::binary);
            f << csv;
        }

        // Wall-time ratio of each run against the first (mean and p50 of
        // per-row ratios).
        nlohmann::json ratios = nlohmann::json::array();
        const auto mean_ns = [](const SolverRun& r) {
            double s = 0.0;
            long c = 0;
            for (const auto& rec : r.trace)
                if (rec.wall_time_ns > 0) {
                    s += static_cast<double>(rec.wall_time_ns);
                    ++c;
                }
            return c ? s / static_cast<double>(c) : 0.0;
        };
        const double base_mean = mean_ns(runs[0]);
        for (std::size_t i = 0; i < runs.size(); ++i) {
            std::vector<double> per_row;
            for (std::size_t r = 0; r < rows; ++r)
                if (runs[i].trace[r].wall_time_ns > 0 && runs[0].trace[r].wall_time_ns > 0)
                    per_row.push_back(static_cast<double>(runs[i].trace[r].wall_time_ns) /
                                      static_cast<double>(runs[0].trace[r].wall_time_ns));
            double p50 = 0.0;
            if (!per_row.empty()) {
                std::nth_element(per_row.begin(), per_row.begin() + per_row.size() / 2,
                                 per_row.end());
                p50 = per_row[per_row.size() / 2];
            }
            ratios.push_back({{"run", labels[i]},
                              {"mean_iteration_ns", mean_ns(runs[i])},
                              {"mean_ratio_vs_first", base_mean > 0.0 ? mean_ns(runs[i]) / base_mean : 0.0},
                              {"p50_ratio_vs_first", p50}});
            std::cout << labels[i] << ": final F_xbar=" << runs[i].trace.back().f_xbar
                      << " max_violation=" << runs[i].trace.back().max_violation_xbar
                      << " mean_iter_ns=" << mean_ns(runs[i]) << "\n";
        }
        {
            std::ofstream f(fs::path(dir) / "timing.json", std::ios::binary);
            f << ratios.dump(2) << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_verify(RunConfig cfg, long budget, const std::string& cache_dir, long long_run_iters,
               double resolution, const std::string& report_path) {
    LoadedInstance inst;
    try {
        normalize_instance(cfg);
        if (cfg.instance.name.empty() && cfg.instance_file.empty())
            throw std::runtime_error("verify needs --instance");
        inst = load_instance(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    std::string cache = cache_dir;
    if (cache.empty())
        if (const char* env = std::getenv("VQOPT_CACHE_DIR")) cache = env;

    std::optional<ReferenceSolution> ref = inst.reference;
    if (!ref && !cache.empty()) ref = cache_load(cache, inst.label);
    if (!ref) {
        try {
            if (inst.spec.n <= 3 && inst.spec.box.finite()) {
                ref = grid_solve(inst.spec, resolution, Exec::max_parallel());
            } else if (long_run_iters > 0) {
                ref = long_run_reference(inst.spec, long_run_iters, cfg.threads);
            }
        } catch (const std::exception& e) {
            std::cerr << "error: reference construction failed: " << e.what() << "\n";
            return kExitNoReference;
        }
        if (ref && !cache.empty()) cache_store(cache, inst.label, *ref);
    }
    if (!ref) {
        std::cerr << "error: no reference solution available for " << inst.label
                  << " (supply --cache-dir with a cached entry or --long-run N)\n";
        return kExitNoReference;
    }

    try {
        SolveOptions opts = to_solve_options(cfg, inst);
        opts.max_iters = budget;
        VerifyReport report = run_verify(inst.spec, *ref, opts);
        const std::string text = report.to_json();
        std::cout << text << "\n";
        if (!report_path.empty()) {
            std::ofstream f(out_path(report_path), std::ios::binary);
            f << text << "\n";
        }
        return report.all_pass() ? kExitOk : kExitViolations;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_gen(RunConfig cfg, const std::string& out, const std::string& csv_dir) {
    try {
        normalize_instance(cfg);
        if (cfg.instance.name.empty())
            throw std::runtime_error("gen needs a named --instance");
        GeneratedInstance gi = make_instance(cfg.instance);
        ProblemConfig pc = problem_config_from_instance(gi);
        const std::string path = out_path(out.empty() ? gi.desc.name + ".json" : out);
        save_problem_config(path, pc, csv_dir);
        std::cout << "wrote " << path << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"virtual-queue primal-dual solver benchmark"};
    app.require_subcommand(1);

    RunConfig solve_cfg;
    std::string solve_config_path, solve_summary;
    CLI::App* solve = app.add_subcommand("solve", "run one algorithm and write a trace");
    add_instance_flags(solve, solve_cfg);
    add_run_flags(solve, solve_cfg);
    solve->add_option("--config", solve_config_path, "run-config JSON (overrides flags)");
    solve->add_option("--out", solve_cfg.out, "trace CSV path");
    solve->add_option("--summary", solve_summary, "summary JSON path");

    std::vector<std::string> cmp_configs, cmp_algorithms;
    RunConfig cmp_shared;
    std::string cmp_out;
    CLI::App* compare = app.add_subcommand("compare", "run several configs on one instance");
    compare->add_option("--config", cmp_configs, "run-config JSON files (repeatable)");
    add_instance_flags(compare, cmp_shared);
    add_run_flags(compare, cmp_shared, /*with_algorithm=*/false);
    compare->add_option("--algorithm", cmp_algorithms,
                        "algorithms to compare on the shared instance (repeatable)")
        ->take_all();
    compare->add_option("--out", cmp_out, "output directory");

    RunConfig verify_cfg;
    long verify_budget = 10000;
    long verify_long_run = 0;
    double verify_resolution = 1e-3;
    std::string verify_cache, verify_report;
    CLI::App* verify = app.add_subcommand("verify", "run the invariant suite against a reference");
    add_instance_flags(verify, verify_cfg);
    add_run_flags(verify, verify_cfg);
    verify->add_option("--budget", verify_budget, "iterations to check");
    verify->add_option("--cache-dir", verify_cache, "reference cache directory");
    verify->add_option("--long-run", verify_long_run,
                       "build a long-run reference with this many iterations (>= 1e5)");
    verify->add_option("--resolution", verify_resolution, "grid resolution for n <= 3 references");
    verify->add_option("--out", verify_report, "report JSON path");

    RunConfig gen_cfg;
    std::string gen_out, gen_csv_dir;
    CLI::App* gen = app.add_subcommand("gen", "export a generated instance as a problem config");
    add_instance_flags(gen, gen_cfg);
    gen->add_option("--out", gen_out, "problem JSON path");
    gen->add_option("--csv-dir", gen_csv_dir, "write matrix payloads as CSV under this subdirectory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (solve->parsed()) return cmd_solve(solve_cfg, solve_config_path, solve_summary);
    if (compare->parsed()) return cmd_compare(cmp_configs, cmp_shared, cmp_algorithms, cmp_out);
    if (verify->parsed())
        return cmd_verify(verify_cfg, verify_budget, verify_cache, verify_long_run,
                          verify_resolution, verify_report);
    if (gen->parsed()) return cmd_gen(gen_cfg, gen_out, gen_csv_dir);
    return kExitConfig;
}
