#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "vqopt/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return VQOPT_CLI_PATH; }

int run_cli(const std::string& args) {
    const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path work_dir() {
    auto p = fs::temp_directory_path() / "vqopt-cli-test";
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("solve on qp1 meets the rate bound and the stride row count") {
    const auto dir = work_dir();
    const auto trace = dir / "qp1.csv";
    const int rc = run_cli("solve --instance qp1 --algorithm new-constant --alpha 2 "
                           "--iters 10000 --stride 100 --out " + trace.string());
    REQUIRE(rc == 0);
    const auto records = vqopt::read_trace(trace.string());
    REQUIRE(records.size() == 101);
    CHECK(records.front().t == 0);
    CHECK(records.back().t == 10000);
    CHECK(records.back().f_xbar <= 1.0002 + 1e-9);
    for (const auto& r : records) CHECK(r.wall_time_ns == 0);
}

TEST_CASE("identical solve configs produce byte-identical traces") {
    const auto dir = work_dir();
    const auto t1 = dir / "a.csv";
    const auto t2 = dir / "b.csv";
    const std::string base = "solve --instance gmv-l2 --n 20 --seed 3 --algorithm new-adaptive "
                             "--iters 300 --stride 10 --out ";
    REQUIRE(run_cli(base + t1.string()) == 0);
    REQUIRE(run_cli(base + t2.string()) == 0);
    CHECK(slurp(t1) == slurp(t2));
    CHECK(!slurp(t1).empty());
}

TEST_CASE("unreadable config exits 3") {
    CHECK(run_cli("solve --config /nonexistent/run.json") == 3);
    CHECK(run_cli("solve --instance no-such-instance") == 3);
    CHECK(run_cli("solve") == 3);
}

TEST_CASE("compare requires at least two configs sharing an instance") {
    const auto dir = work_dir();
    CHECK(run_cli("compare --instance qp1 --algorithm new-constant --iters 10 --out " +
                  (dir / "c0").string()) == 3);

    // Mismatched instances through config files.
    const auto f1 = dir / "r1.json";
    const auto f2 = dir / "r2.json";
    std::ofstream(f1) << R"({"instance":{"name":"qp1"},"algorithm":"new-constant","iters":10})";
    std::ofstream(f2) << R"({"instance":{"name":"ball1","n":2},"algorithm":"new-constant","iters":10})";
    CHECK(run_cli("compare --config " + f1.string() + " --config " + f2.string() + " --out " +
                  (dir / "c1").string()) == 3);
}

TEST_CASE("compare curves of the two rate-matched algorithms stay close on gmv-l2") {
    const auto dir = work_dir();
    const auto out = dir / "cmp-gmv";
    const int rc = run_cli("compare --instance gmv-l2 --n 50 --seed 1 --iters 2000 --stride 100 "
                           "--algorithm new-constant --algorithm yu-neely --out " + out.string());
    REQUIRE(rc == 0);
    std::ifstream f(out / "compare.csv");
    std::string line;
    REQUIRE(std::getline(f, line));  // header
    while (std::getline(f, line)) {
        long t = 0;
        double f_new = 0.0, v_new = 0.0, f_yn = 0.0, v_yn = 0.0;
        REQUIRE(std::sscanf(line.c_str(), "%ld,%lg,%lg,%lg,%lg", &t, &f_new, &v_new, &f_yn,
                            &v_yn) == 5);
        if (t < 1000) continue;
        CHECK(std::abs(f_new - f_yn) <= 1e-2 * std::max(std::abs(f_new), std::abs(f_yn)));
    }
}

TEST_CASE("VQOPT_OUT_DIR provides the default output directory") {
    const auto dir = work_dir() / "env-out";
    fs::remove_all(dir);
    const std::string cmd = "VQOPT_OUT_DIR=" + dir.string() + " " + std::string(cli_path()) +
                            " solve --instance qp1 --algorithm new-constant --alpha 2 --iters 10 "
                            "--out env-trace.csv >/dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(dir / "env-trace.csv"));
}

TEST_CASE("compare writes aligned columns and timing ratios") {
    const auto dir = work_dir();
    const auto out = dir / "cmp";
    const int rc = run_cli("compare --instance gmv-l2 --n 12 --seed 2 --iters 200 --stride 20 "
                           "--algorithm new-constant --algorithm yu-neely --out " + out.string());
    REQUIRE(rc == 0);
    const std::string table = slurp(out / "compare.csv");
    CHECK(table.rfind("t,F_xbar_new-constant,max_violation_new-constant,"
                      "F_xbar_yu-neely,max_violation_yu-neely\n", 0) == 0);
    CHECK(fs::exists(out / "timing.json"));
    CHECK(fs::exists(out / "new-constant.csv"));
    CHECK(fs::exists(out / "yu-neely.csv"));
}

TEST_CASE("verify passes on qp1 and ball1 and exits 4 without a reference") {
    const auto dir = work_dir();
    CHECK(run_cli("verify --instance qp1 --algorithm new-constant --alpha 2 --budget 2000 "
                  "--out " + (dir / "qp1-report.json").string()) == 0);
    CHECK(run_cli("verify --instance ball1 --n 2 --seed 4 --algorithm new-adaptive "
                  "--budget 2000") == 0);
    // gmv-l2 at n=10 has no analytic reference, no cache, no grid (n > 3).
    CHECK(run_cli("verify --instance gmv-l2 --n 10 --seed 1 --budget 100") == 4);
}

TEST_CASE("equality-masked gmv verify exempts the signed row") {
    const auto dir = work_dir();
    const auto report = dir / "eq-report.json";
    // Equality-masked budget row with a long-run reference: the signed row is
    // exempt from the nonnegativity checks, everything else must pass.
    const int rc = run_cli("verify --instance gmv-l2 --n 6 --seed 9 --equality "
                           "--algorithm new-adaptive --budget 1000 --long-run 100000 --out " +
                           report.string());
    CHECK(rc == 0);
    const std::string text = slurp(report);
    CHECK(text.find("\"all_pass\": true") != std::string::npos);
    CHECK(text.find("queue-nonnegativity") != std::string::npos);
    CHECK(text.find("drift-bound") != std::string::npos);
}

TEST_CASE("non-finite oracle output exits 2") {
    const auto dir = work_dir();
    const auto prob = dir / "overflow.json";
    // A linear program whose iterates blow past the double range: the first
    // step lands on the box corner at 1e160 and the constraint value
    // overflows to infinity.
    std::ofstream(prob) << R"({
      "n": 1,
      "box": {"lower": [-1e160], "upper": [1e160]},
      "objective": {"kind": "linear", "linear": [1e160]},
      "constraints": [{"kind": "linear", "coeffs": [1e160], "offset": 0.0}],
      "constants": {"beta": 1.0}
    })";
    const int rc = run_cli("solve --instance " + prob.string() +
                           " --algorithm new-constant --alpha 1 --iters 10 --out " +
                           (dir / "overflow.csv").string());
    CHECK(rc == 2);
}

TEST_CASE("gen exports a loadable problem config") {
    const auto dir = work_dir();
    const auto prob = dir / "gmv.json";
    REQUIRE(run_cli("gen --instance gmv-l2 --n 8 --seed 5 --out " + prob.string()) == 0);
    const auto trace = dir / "from-file.csv";
    CHECK(run_cli("solve --instance " + prob.string() +
                  " --algorithm new-adaptive --iters 100 --out " + trace.string()) == 0);
    CHECK(vqopt::read_trace(trace.string()).size() == 101);
}
