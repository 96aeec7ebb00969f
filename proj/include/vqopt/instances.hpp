#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "vqopt/dense.hpp"
#include "vqopt/problem.hpp"
#include "vqopt/reference.hpp"

namespace vqopt {

/// Parameters that fully determine a generated instance; the same descriptor
/// always regenerates a bit-identical ProblemSpec.
struct InstanceDescriptor {
    std::string name;
    int n = 0;
    long rows = 0;
    std::uint64_t seed = 0;
    double b = 0.0;
    double lambda_weight = 0.0;
    double radius = 0.0;
    bool equality = false;
    std::string provenance;  // free-form note, not part of the identity

    std::string key() const;
};

struct GeneratedInstance {
    InstanceDescriptor desc;
    ProblemSpec spec;
    std::optional<ReferenceSolution> reference;
    /// Payloads referenced by the oracles (exportable to the config format).
    std::optional<DenseMatrix> matrix;
    std::vector<double> rhs;     // lasso target vector
    std::vector<double> linear;  // ball1 cost vector
};

/// min x^2 s.t. 1 - x <= 0 on [-10, 10]; analytic reference x* = 1, F* = 1,
/// lambda* = 2.
GeneratedInstance gen_qp1();

/// min c^T x s.t. ||x||^2 - b <= 0 on [-1, 1]^n with seeded Gaussian c. For
/// b <= 1 the box is inactive and the reference is analytic:
/// x* = -sqrt(b) c / ||c||, lambda* = ||c|| / (2 sqrt(b)).
GeneratedInstance gen_ball1(int n, std::uint64_t seed, double b = 0.25);

/// Same instance with an explicit cost vector (test hook for the pinned
/// analytic examples).
GeneratedInstance gen_ball1_with(std::vector<double> c, double b);

/// Correlation matrix M = D^{-1/2} N^T N D^{-1/2}, D = Diag(N^T N), with N
/// an n x n matrix of seeded standard normals. Columns whose squared norm
/// underflows are regenerated.
DenseMatrix gen_correlation_matrix(int n, std::uint64_t seed);

/// Minimum-variance portfolio with the l2 norm constraint:
/// min x^T M x s.t. 1 - sum x_i <= 0, ||x||^2 - b <= 0, x in [0, 1]^n,
/// b = 3/n. equality_row replaces the budget inequality with a signed-queue
/// equality row.
GeneratedInstance gen_gmv_l2(int n, std::uint64_t seed, bool equality_row = false);

/// Minimum-variance portfolio with the l1 norm constraint:
/// min x^T M x s.t. 1 - sum x_i <= 0, ||x||_1 - b <= 0, x in [-1, 1]^n.
/// The default b = 3/n follows the printed experiment; note the program is
/// only feasible for b >= 1.
GeneratedInstance gen_gmv_l1(int n, std::uint64_t seed, double b = -1.0,
                             bool equality_row = false);

/// Constrained LASSO: min ||Ax - b||^2 + lambda ||x||_1 s.t. |x_i| <= radius
/// (encoded as Cx - d <= 0 with C = [I; -I]), x in [-10, 10]^n, with seeded
/// Gaussian A and a planted sparse ground truth.
GeneratedInstance gen_constrained_lasso(long rows, int n, std::uint64_t seed,
                                        double lambda_weight, double radius = 1.0);

/// Dispatcher for the CLI: name in {qp1, ball1, gmv-l2, gmv-l1, lasso}.
GeneratedInstance make_instance(const InstanceDescriptor& desc);

}  // namespace vqopt
