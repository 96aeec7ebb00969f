#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "vqopt/exec.hpp"

namespace vqopt {

/// Row-major dense matrix. Kept deliberately plain so the hot loops below
/// control summation order explicitly (bit-reproducibility contract).
struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
    const double* row(int i) const { return a.data() + static_cast<std::size_t>(i) * cols; }

    bool operator==(const DenseMatrix& o) const {
        return rows == o.rows && cols == o.cols && a == o.a;
    }
};

/// out = M x. Parallel over rows; each row is a fixed-order serial dot, so
/// the result is identical for any thread count.
inline void matvec(const DenseMatrix& m, std::span<const double> x, std::span<double> out,
                   const Exec& ex = Exec::serial()) {
    if (static_cast<int>(x.size()) != m.cols || static_cast<int>(out.size()) != m.rows)
        throw std::invalid_argument("matvec: dimension mismatch");
    const double* xd = x.data();
    double* od = out.data();
    parallel_for(m.rows, ex, [&](std::int64_t i) {
        const double* r = m.row(static_cast<int>(i));
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += r[j] * xd[j];
        od[i] = s;
    });
}

/// Serial reference for matvec, kept for the kernel-equivalence tests.
inline void matvec_serial(const DenseMatrix& m, std::span<const double> x, std::span<double> out) {
    matvec(m, x, out, Exec::serial());
}

inline double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

inline double max_abs_row_sum(const DenseMatrix& m) {
    double best = 0.0;
    for (int i = 0; i < m.rows; ++i) {
        double s = 0.0;
        const double* r = m.row(i);
        for (int j = 0; j < m.cols; ++j) s += std::abs(r[j]);
        best = std::max(best, s);
    }
    return best;
}

/// N^T N with a fixed j-k-i loop nest (deterministic summation order).
inline DenseMatrix gram(const DenseMatrix& n) {
    DenseMatrix g(n.cols, n.cols);
    for (int k = 0; k < n.rows; ++k) {
        const double* r = n.row(k);
        for (int i = 0; i < n.cols; ++i) {
            const double ri = r[i];
            if (ri == 0.0) continue;
            double* gi = g.a.data() + static_cast<std::size_t>(i) * g.cols;
            for (int j = 0; j < n.cols; ++j) gi[j] += ri * r[j];
        }
    }
    return g;
}

}  // namespace vqopt
