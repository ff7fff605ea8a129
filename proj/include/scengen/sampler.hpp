#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace scengen {

// Linear equality constraint A x = b on a mean-zero Gaussian vector. Rows are
// constraint functionals; typical rows sum a lag range or the assets of one
// zone.
struct LinearConstraint {
  Eigen::MatrixXd A;  // r x d
  Eigen::VectorXd b;  // r
};

struct ConditionedGaussian {
  Eigen::VectorXd mu;
  Eigen::MatrixXd Sigma;  // PSD with rank d - r after conditioning
};

// Indices of the rows kept by greedy reduction: the earliest rows that stay
// numerically independent (residual above tol after orthogonalization).
std::vector<int> independent_rows(const Eigen::MatrixXd& A,
                                  double tol = 1e-10);

// Greedy row reduction: keeps the earliest rows that are numerically
// independent (residual above tol after orthogonalization). A dependent row
// whose b value contradicts the rows it depends on makes the system
// infeasible and raises SingularConstraintError.
LinearConstraint drop_dependent_rows(const LinearConstraint& constraint,
                                     double tol = 1e-10);

// Factor L with L L^T = Sigma for sampling. Cholesky when Sigma is positive
// definite; otherwise, with repair enabled, eigenvalues below 1e-10 are
// clipped to zero and the factor spans only the positive directions. The
// repaired flag reports when clipping happened.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& Sigma,
                                  bool allow_repair = false,
                                  bool* repaired = nullptr);

// m mean-zero Gaussian rows with covariance Sigma. Draw i consumes its own
// counter stream (stream_begin + i), so scenarios can be generated in
// parallel and the output is byte-identical for a fixed seed.
Eigen::MatrixXd sample_mvn(const Eigen::MatrixXd& Sigma, int m,
                           std::uint64_t seed, std::uint64_t stream_begin = 0,
                           bool allow_repair = false,
                           bool* repaired = nullptr);

// m rows with covariance Sigma_S (x) Sigma_T, never materializing the full
// Kronecker product: each draw is L_S G L_T^T flattened row-major, matching
// the (unit, lag) index order unit*q + lag.
Eigen::MatrixXd sample_kronecker(const Eigen::MatrixXd& Sigma_S,
                                 const Eigen::MatrixXd& Sigma_T, int m,
                                 std::uint64_t seed,
                                 std::uint64_t stream_begin = 0,
                                 bool allow_repair = false);

// (Sigma_S (x) Sigma_T) A^T assembled column by column as vec(Sigma_S M_r
// Sigma_T), M_r being constraint row r reshaped to p x q. Only d x r
// intermediates are formed.
Eigen::MatrixXd kronecker_cross(const Eigen::MatrixXd& Sigma_S,
                                const Eigen::MatrixXd& Sigma_T,
                                const Eigen::MatrixXd& A);

// Projection gain K = Sigma A^T (A Sigma A^T)^{-1} from the precomputed
// cross product SAt = Sigma A^T. x - K (A x - b) then enforces A x = b while
// preserving the conditional distribution.
Eigen::MatrixXd projection_gain(const Eigen::MatrixXd& SAt,
                                const Eigen::MatrixXd& A);

// Mean and covariance of x | A x = b for x ~ N(0, Sigma):
//   mu_c = Sigma A^T (A Sigma A^T)^{-1} b
//   Sigma_c = Sigma - Sigma A^T (A Sigma A^T)^{-1} A Sigma
ConditionedGaussian condition_on_linear(const Eigen::MatrixXd& Sigma,
                                        const LinearConstraint& constraint);

// Draws from N(mu_c, Sigma_c) by projection: x_c = x - K (A x - b) with
// K = Sigma A^T (A Sigma A^T)^{-1}, so every sample satisfies the constraint
// to machine precision.
Eigen::MatrixXd sample_conditional(const Eigen::MatrixXd& Sigma,
                                   const LinearConstraint& constraint, int m,
                                   std::uint64_t seed,
                                   std::uint64_t stream_begin = 0);

// Conditional sampling under a Kronecker covariance. Sigma A^T is built one
// constraint row at a time as vec(Sigma_S M_r Sigma_T), where M_r is the row
// reshaped to p x q, so only d x r intermediates are ever formed.
Eigen::MatrixXd sample_conditional_kronecker(
    const Eigen::MatrixXd& Sigma_S, const Eigen::MatrixXd& Sigma_T,
    const LinearConstraint& constraint, int m, std::uint64_t seed,
    std::uint64_t stream_begin = 0);

}  // namespace scengen
