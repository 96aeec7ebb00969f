// Benchmark: OpenMP kernels against the serial reference (verifying
// bit-identical outputs along the way) and per-iteration solver costs.
//
// Usage: bench_iteration [n ...]   (default 500 2000)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "vqopt/instances.hpp"
#include "vqopt/kernels.hpp"
#include "vqopt/solver.hpp"

using namespace vqopt;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e100;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_seconds();
        fn();
        best = std::min(best, now_seconds() - t0);
    }
    return best;
}

void bench_kernels(int n) {
    GeneratedInstance gmv = gen_gmv_l1(n, 3, 1.5);
    const ProblemSpec& spec = gmv.spec;
    const auto nu = static_cast<std::size_t>(n);

    std::vector<double> x_prev(nu, 0.01), grad_f(nu), grads(2 * nu), out_serial(nu), out_par(nu);
    std::vector<double> w{1.0, 2.0};
    spec.f.gradient(x_prev, std::span<double>(grad_f), Exec::serial());
    for (int k = 0; k < 2; ++k)
        spec.g[static_cast<std::size_t>(k)].gradient(
            x_prev, std::span<double>(grads.data() + static_cast<std::size_t>(k) * nu, nu),
            Exec::serial());

    const Exec par = Exec::max_parallel();
    const int reps = n >= 2000 ? 20 : 200;

    const double t_serial = time_best_of(reps, [&] {
        coordinate_pass_l1_serial(spec, x_prev, w, grad_f, grads, 3.0, std::span<double>(out_serial));
    });
    const double t_par = time_best_of(reps, [&] {
        coordinate_pass_l1(spec, x_prev, w, grad_f, grads, 3.0, std::span<double>(out_par), par);
    });
    const bool identical = out_serial == out_par;

    std::vector<double> mv_serial(nu), mv_par(nu);
    const DenseMatrix& m = *gmv.matrix;
    const double t_mv_serial =
        time_best_of(reps, [&] { matvec_serial(m, x_prev, std::span<double>(mv_serial)); });
    const double t_mv_par =
        time_best_of(reps, [&] { matvec(m, x_prev, std::span<double>(mv_par), par); });
    const bool mv_identical = mv_serial == mv_par;

    std::printf("n=%-5d coordinate pass: serial %9.1f us | omp(%d) %9.1f us | speedup %5.2fx | %s\n",
                n, t_serial * 1e6, par.threads, t_par * 1e6, t_serial / t_par,
                identical ? "bit-identical" : "MISMATCH");
    std::printf("n=%-5d dense matvec:    serial %9.1f us | omp(%d) %9.1f us | speedup %5.2fx | %s\n",
                n, t_mv_serial * 1e6, par.threads, t_mv_par * 1e6, t_mv_serial / t_mv_par,
                mv_identical ? "bit-identical" : "MISMATCH");
}

void bench_algorithms(int n) {
    for (bool l1 : {false, true}) {
        GeneratedInstance inst = l1 ? gen_gmv_l1(n, 3, 1.5) : gen_gmv_l2(n, 3);
        const long iters = n >= 2000 ? 10 : (n >= 500 ? 40 : 300);
        const auto mean_iter = [&](Algorithm alg, int threads) {
            SolveOptions opts;
            opts.algorithm = alg;
            opts.max_iters = iters;
            opts.stride = iters;
            opts.threads = threads;
            const double t0 = now_seconds();
            run(inst.spec, opts);
            return (now_seconds() - t0) / static_cast<double>(iters);
        };
        const double t_new_1 = mean_iter(Algorithm::NewConstant, 1);
        const double t_new_p = mean_iter(Algorithm::NewConstant, Exec::max_parallel().threads);
        const double t_yn = mean_iter(Algorithm::YuNeely, 1);
        std::printf(
            "n=%-5d %s per-iteration: new(serial) %9.1f us | new(omp) %9.1f us | "
            "yu-neely %9.1f us | yu-neely/new %6.1fx\n",
            n, l1 ? "gmv-l1" : "gmv-l2", t_new_1 * 1e6, t_new_p * 1e6, t_yn * 1e6,
            t_yn / t_new_1);
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> sizes;
    for (int i = 1; i < argc; ++i) sizes.push_back(std::atoi(argv[i]));
    if (sizes.empty()) sizes = {500, 2000};

    std::printf("threads available: %d\n", Exec::max_parallel().threads);
    for (int n : sizes) bench_kernels(n);
    for (int n : sizes) bench_algorithms(n);
    return 0;
}
