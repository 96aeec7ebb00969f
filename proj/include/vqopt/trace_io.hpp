#pragma once

#include <string>
#include <vector>

#include "vqopt/solver.hpp"

namespace vqopt {

/// CSV trace format: header
///   t,F_x,F_xbar,max_violation_xbar,queue_norm,alpha_t,drift,wall_time_ns
/// one row per record, LF line endings, '.' decimal separator, floats at 17
/// significant digits (lossless round-trip).
std::string format_trace(const std::vector<IterationRecord>& records);
void write_trace(const std::string& path, const std::vector<IterationRecord>& records);
std::vector<IterationRecord> parse_trace(const std::string& csv);
std::vector<IterationRecord> read_trace(const std::string& path);

/// One-line run summary plus a JSON document with the same fields.
struct RunSummary {
    std::string instance;
    std::string algorithm;
    long iterations = 0;
    std::string status;
    double final_f_xbar = 0.0;
    double final_max_violation = 0.0;
    double mean_iteration_ns = 0.0;
    std::vector<std::string> warnings;
};

RunSummary summarize(const std::string& instance, const std::string& algorithm,
                     const SolverRun& run);
std::string summary_json(const RunSummary& s);
std::string summary_line(const RunSummary& s);

}  // namespace vqopt
