#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vqopt/dense.hpp"
#include "vqopt/instances.hpp"
#include "vqopt/problem.hpp"

namespace vqopt {

/// Structured (data-only) description of a problem instance; the JSON
/// document mirrors these fields. Matrices may be inline or CSV file
/// references (row-major, 17 significant digits).
struct ObjectiveConfig {
    std::string kind;  // quadratic-form | least-squares | linear
    DenseMatrix matrix;
    std::vector<double> linear;
    std::vector<double> rhs;
    double offset = 0.0;
    double l1_weight = 0.0;
};

struct ConstraintConfig {
    std::string kind;  // linear | quadratic-form | l1 | l2-ball
    std::vector<double> coeffs;
    DenseMatrix matrix;
    std::vector<double> linear;
    double offset = 0.0;
    double bound = 0.0;
    double coeff = 1.0;
    bool equality = false;
};

struct ProblemConfig {
    int n = 0;
    BoxSet box;
    ObjectiveConfig objective;
    std::vector<ConstraintConfig> constraints;
    double beta = 0.0;
    bool beta_exact = false;
    double C = 0.0;
    double R = 0.0;
};

ProblemConfig load_problem_config(const std::string& path);
/// csv_dir non-empty writes matrix payloads as CSV files next to the config.
void save_problem_config(const std::string& path, const ProblemConfig& cfg,
                         const std::string& csv_dir = "");
ProblemSpec build_spec(const ProblemConfig& cfg);

/// Reconstructs the structured form of a generated instance for export.
ProblemConfig problem_config_from_instance(const GeneratedInstance& inst);

void write_matrix_csv(const std::string& path, const DenseMatrix& m);
DenseMatrix read_matrix_csv(const std::string& path);

/// CLI run configuration; round-trips losslessly through JSON.
struct RunConfig {
    std::string instance_file;    // set when the instance comes from a file
    InstanceDescriptor instance;  // set for named generators
    std::string algorithm = "new-constant";
    double alpha = 0.0;
    long iters = 1000;
    long stride = 1;
    bool diagnostics = false;
    bool timing = false;
    int threads = 1;
    double pd_step = 0.0;
    double pd_lambda_max = 0.0;
    std::string out;

    std::string instance_key() const;
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace vqopt
