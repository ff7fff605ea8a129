#include "scengen/sampler.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "scengen/errors.hpp"
#include "scengen/rng.hpp"

namespace scengen {

namespace {

Eigen::VectorXd normal_vector(PhiloxRng& rng, int d) {
  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z(i) = rng.next_normal();
  return z;
}

Eigen::MatrixXd normal_matrix(PhiloxRng& rng, int rows, int cols) {
  Eigen::MatrixXd g(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) g(i, j) = rng.next_normal();
  }
  return g;
}

// vec of X in row-major order: entry u*q + l is X(u, l).
Eigen::VectorXd flatten_rm(const Eigen::MatrixXd& x) {
  const int p = int(x.rows());
  const int q = int(x.cols());
  Eigen::VectorXd v(p * q);
  for (int u = 0; u < p; ++u) {
    for (int l = 0; l < q; ++l) v(u * q + l) = x(u, l);
  }
  return v;
}

}  // namespace

std::vector<int> independent_rows(const Eigen::MatrixXd& A, double tol) {
  std::vector<int> kept;
  std::vector<Eigen::VectorXd> basis;  // orthonormal span of kept rows
  for (int i = 0; i < A.rows(); ++i) {
    const Eigen::VectorXd row = A.row(i).transpose();
    Eigen::VectorXd residual = row;
    for (const auto& q : basis) residual -= q.dot(residual) * q;
    // Second orthogonalization pass stabilizes nearly-dependent rows.
    for (const auto& q : basis) residual -= q.dot(residual) * q;
    if (residual.norm() > tol * std::max(1.0, row.norm())) {
      kept.push_back(i);
      basis.push_back(residual.normalized());
    }
  }
  return kept;
}

LinearConstraint drop_dependent_rows(const LinearConstraint& constraint,
                                     double tol) {
  const int r = int(constraint.A.rows());
  const int d = int(constraint.A.cols());
  if (constraint.b.size() != r) {
    throw ConfigError("constraint right-hand side length does not match A");
  }

  const std::vector<int> kept = independent_rows(constraint.A, tol);
  LinearConstraint reduced;
  reduced.A.resize(int(kept.size()), d);
  reduced.b.resize(int(kept.size()));
  for (size_t j = 0; j < kept.size(); ++j) {
    reduced.A.row(int(j)) = constraint.A.row(kept[j]);
    reduced.b(int(j)) = constraint.b(kept[j]);
  }

  // Every dropped row must agree with the combination of kept rows it
  // depends on, or the system is infeasible.
  size_t next_kept = 0;
  for (int i = 0; i < r; ++i) {
    if (next_kept < kept.size() && kept[next_kept] == i) {
      ++next_kept;
      continue;
    }
    if (kept.empty()) {
      if (std::abs(constraint.b(i)) > 1e-8) {
        throw SingularConstraintError(
            "zero constraint row with nonzero right-hand side");
      }
      continue;
    }
    const Eigen::VectorXd coeffs =
        reduced.A.transpose().colPivHouseholderQr().solve(
            constraint.A.row(i).transpose());
    const double implied = coeffs.dot(reduced.b);
    if (std::abs(implied - constraint.b(i)) >
        1e-8 * (1.0 + std::abs(constraint.b(i)))) {
      throw SingularConstraintError(
          "constraint row " + std::to_string(i) +
          " contradicts the rows it depends on");
    }
  }
  return reduced;
}

Eigen::MatrixXd kronecker_cross(const Eigen::MatrixXd& Sigma_S,
                                const Eigen::MatrixXd& Sigma_T,
                                const Eigen::MatrixXd& A) {
  const int p = int(Sigma_S.rows());
  const int q = int(Sigma_T.rows());
  if (A.cols() != p * q) {
    throw ConfigError("constraint width does not match p*q");
  }
  Eigen::MatrixXd SAt(p * q, int(A.rows()));
  for (int k = 0; k < A.rows(); ++k) {
    Eigen::MatrixXd M(p, q);
    for (int u = 0; u < p; ++u) {
      for (int l = 0; l < q; ++l) M(u, l) = A(k, u * q + l);
    }
    SAt.col(k) = flatten_rm(Sigma_S * M * Sigma_T);
  }
  return SAt;
}

Eigen::MatrixXd projection_gain(const Eigen::MatrixXd& SAt,
                                const Eigen::MatrixXd& A) {
  const Eigen::MatrixXd C = A * SAt;
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success) {
    throw SingularConstraintError(
        "constraint covariance A Sigma A^T is singular");
  }
  return llt.solve(SAt.transpose()).transpose();
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& Sigma,
                                  bool allow_repair, bool* repaired) {
  if (repaired != nullptr) *repaired = false;
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  if (!allow_repair) {
    throw NotPsdError("covariance is not positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Sigma);
  if (eig.info() != Eigen::Success) {
    throw NotPsdError("covariance eigendecomposition failed");
  }
  Eigen::VectorXd clipped = eig.eigenvalues();
  for (int i = 0; i < clipped.size(); ++i) {
    clipped(i) = clipped(i) < 1e-10 ? 0.0 : clipped(i);
  }
  if (repaired != nullptr) *repaired = true;
  return eig.eigenvectors() * clipped.cwiseSqrt().asDiagonal();
}

Eigen::MatrixXd sample_mvn(const Eigen::MatrixXd& Sigma, int m,
                           std::uint64_t seed, std::uint64_t stream_begin,
                           bool allow_repair, bool* repaired) {
  const int d = int(Sigma.rows());
  const Eigen::MatrixXd L = covariance_factor(Sigma, allow_repair, repaired);
  Eigen::MatrixXd out(m, d);
  for (int i = 0; i < m; ++i) {
    PhiloxRng rng(seed, stream_begin + std::uint64_t(i));
    out.row(i) = (L * normal_vector(rng, d)).transpose();
  }
  return out;
}

Eigen::MatrixXd sample_kronecker(const Eigen::MatrixXd& Sigma_S,
                                 const Eigen::MatrixXd& Sigma_T, int m,
                                 std::uint64_t seed,
                                 std::uint64_t stream_begin,
                                 bool allow_repair) {
  const int p = int(Sigma_S.rows());
  const int q = int(Sigma_T.rows());
  const Eigen::MatrixXd Ls = covariance_factor(Sigma_S, allow_repair);
  const Eigen::MatrixXd Lt = covariance_factor(Sigma_T, allow_repair);
  Eigen::MatrixXd out(m, p * q);
  for (int i = 0; i < m; ++i) {
    PhiloxRng rng(seed, stream_begin + std::uint64_t(i));
    const Eigen::MatrixXd draw =
        Ls * normal_matrix(rng, p, q) * Lt.transpose();
    out.row(i) = flatten_rm(draw).transpose();
  }
  return out;
}

ConditionedGaussian condition_on_linear(const Eigen::MatrixXd& Sigma,
                                        const LinearConstraint& constraint) {
  const int d = int(Sigma.rows());
  const LinearConstraint reduced = drop_dependent_rows(constraint);
  if (reduced.A.rows() == 0) {
    return ConditionedGaussian{Eigen::VectorXd::Zero(d), Sigma};
  }
  const Eigen::MatrixXd SAt = Sigma * reduced.A.transpose();
  const Eigen::MatrixXd K = projection_gain(SAt, reduced.A);
  ConditionedGaussian out;
  out.mu = K * reduced.b;
  out.Sigma = Sigma - K * SAt.transpose();
  out.Sigma = 0.5 * (out.Sigma + out.Sigma.transpose()).eval();
  return out;
}

Eigen::MatrixXd sample_conditional(const Eigen::MatrixXd& Sigma,
                                   const LinearConstraint& constraint, int m,
                                   std::uint64_t seed,
                                   std::uint64_t stream_begin) {
  const int d = int(Sigma.rows());
  const LinearConstraint reduced = drop_dependent_rows(constraint);
  if (reduced.A.rows() == 0) {
    return sample_mvn(Sigma, m, seed, stream_begin);
  }
  const Eigen::MatrixXd L = covariance_factor(Sigma);
  const Eigen::MatrixXd SAt = Sigma * reduced.A.transpose();
  const Eigen::MatrixXd K = projection_gain(SAt, reduced.A);

  Eigen::MatrixXd out(m, d);
  for (int i = 0; i < m; ++i) {
    PhiloxRng rng(seed, stream_begin + std::uint64_t(i));
    const Eigen::VectorXd x = L * normal_vector(rng, d);
    out.row(i) = (x - K * (reduced.A * x - reduced.b)).transpose();
  }
  return out;
}

Eigen::MatrixXd sample_conditional_kronecker(
    const Eigen::MatrixXd& Sigma_S, const Eigen::MatrixXd& Sigma_T,
    const LinearConstraint& constraint, int m, std::uint64_t seed,
    std::uint64_t stream_begin) {
  const int p = int(Sigma_S.rows());
  const int q = int(Sigma_T.rows());
  const int d = p * q;
  if (constraint.A.cols() != d) {
    throw ConfigError("constraint width does not match p*q");
  }
  const LinearConstraint reduced = drop_dependent_rows(constraint);
  if (reduced.A.rows() == 0) {
    return sample_kronecker(Sigma_S, Sigma_T, m, seed, stream_begin);
  }
  const Eigen::MatrixXd Ls = covariance_factor(Sigma_S);
  const Eigen::MatrixXd Lt = covariance_factor(Sigma_T);
  const Eigen::MatrixXd SAt = kronecker_cross(Sigma_S, Sigma_T, reduced.A);
  const Eigen::MatrixXd K = projection_gain(SAt, reduced.A);

  Eigen::MatrixXd out(m, d);
  for (int i = 0; i < m; ++i) {
    PhiloxRng rng(seed, stream_begin + std::uint64_t(i));
    const Eigen::VectorXd x =
        flatten_rm(Ls * normal_matrix(rng, p, q) * Lt.transpose());
    out.row(i) = (x - K * (reduced.A * x - reduced.b)).transpose();
  }
  return out;
}

}  // namespace scengen
