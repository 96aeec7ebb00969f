#include "vqopt/trace_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace vqopt {

namespace {

void append_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

std::string format_trace(const std::vector<IterationRecord>& records) {
    std::string out = "t,F_x,F_xbar,max_violation_xbar,queue_norm,alpha_t,drift,wall_time_ns\n";
    for (const auto& r : records) {
        out += std::to_string(r.t);
        out += ',';
        append_double(out, r.f_x);
        out += ',';
        append_double(out, r.f_xbar);
        out += ',';
        append_double(out, r.max_violation_xbar);
        out += ',';
        append_double(out, r.queue_norm);
        out += ',';
        append_double(out, r.alpha_t);
        out += ',';
        append_double(out, r.drift);
        out += ',';
        out += std::to_string(r.wall_time_ns);
        out += '\n';
    }
    return out;
}

void write_trace(const std::string& path, const std::vector<IterationRecord>& records) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_trace: cannot open " + path);
    f << format_trace(records);
}

std::vector<IterationRecord> parse_trace(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("parse_trace: empty input");
    if (line != "t,F_x,F_xbar,max_violation_xbar,queue_norm,alpha_t,drift,wall_time_ns")
        throw std::runtime_error("parse_trace: unexpected header");
    std::vector<IterationRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        IterationRecord r;
        long long wall = 0;
        const int got = std::sscanf(line.c_str(),
                                    "%ld,%lg,%lg,%lg,%lg,%lg,%lg,%lld", &r.t, &r.f_x, &r.f_xbar,
                                    &r.max_violation_xbar, &r.queue_norm, &r.alpha_t, &r.drift,
                                    &wall);
        if (got != 8) throw std::runtime_error("parse_trace: malformed row: " + line);
        r.wall_time_ns = wall;
        out.push_back(r);
    }
    return out;
}

std::vector<IterationRecord> read_trace(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_trace: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_trace(ss.str());
}

RunSummary summarize(const std::string& instance, const std::string& algorithm,
                     const SolverRun& run) {
    RunSummary s;
    s.instance = instance;
    s.algorithm = algorithm;
    s.iterations = run.t;
    s.status = to_string(run.status);
    if (!run.trace.empty()) {
        s.final_f_xbar = run.trace.back().f_xbar;
        s.final_max_violation = run.trace.back().max_violation_xbar;
    }
    double total = 0.0;
    long counted = 0;
    for (const auto& r : run.trace) {
        if (r.wall_time_ns > 0) {
            total += static_cast<double>(r.wall_time_ns);
            counted += 1;
        }
    }
    s.mean_iteration_ns = counted > 0 ? total / static_cast<double>(counted) : 0.0;
    s.warnings = run.warnings;
    return s;
}

std::string summary_json(const RunSummary& s) {
    nlohmann::json j = {{"instance", s.instance},
                        {"algorithm", s.algorithm},
                        {"iterations", s.iterations},
                        {"status", s.status},
                        {"final_F_xbar", s.final_f_xbar},
                        {"final_max_violation", s.final_max_violation},
                        {"mean_iteration_ns", s.mean_iteration_ns},
                        {"warnings", s.warnings}};
    return j.dump(2);
}

std::string summary_line(const RunSummary& s) {
    std::ostringstream os;
    os.precision(17);
    os << s.instance << " " << s.algorithm << ": status=" << s.status
       << " iters=" << s.iterations << " F_xbar=" << s.final_f_xbar
       << " max_violation=" << s.final_max_violation << " mean_iter_ns=" << s.mean_iteration_ns;
    return os.str();
}

}  // namespace vqopt
