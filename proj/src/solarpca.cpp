#include "scengen/solarpca.hpp"

#include <cmath>
#include <string>

#include "scengen/errors.hpp"

namespace scengen {

namespace {

constexpr int kHours = 24;

}  // namespace

int choose_k(const Eigen::VectorXd& explained, double threshold) {
  if (threshold <= 0.0 || threshold > 1.0) {
    throw ConfigError("variance threshold must lie in (0, 1]");
  }
  const double total = explained.sum();
  if (total <= 0.0) return 1;
  double cumulative = 0.0;
  for (int i = 0; i < explained.size(); ++i) {
    cumulative += explained(i);
    if (cumulative >= threshold * total) return i + 1;
  }
  return int(explained.size());
}

SolarPcaModel fit_pca(const Eigen::MatrixXd& pool, double variance_threshold) {
  if (pool.cols() != kHours) {
    throw DataError("solar pool must have 24 hourly columns, got " +
                    std::to_string(pool.cols()));
  }
  const int n = int(pool.rows());
  if (n < kHours) {
    throw DataError("solar pool needs at least 24 rows, got " +
                    std::to_string(n));
  }

  SolarPcaModel model;
  model.center = pool.colwise().mean();
  const Eigen::MatrixXd centered = pool.rowwise() - model.center.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / double(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw DataError("eigendecomposition of the pooled covariance failed");
  }

  // Eigen returns ascending eigenvalues; flip to decreasing and clip the
  // tiny negatives that the solver can produce for rank-deficient pools.
  model.loadings.resize(kHours, kHours);
  model.explained.resize(kHours);
  for (int i = 0; i < kHours; ++i) {
    model.explained(i) = std::max(eig.eigenvalues()(kHours - 1 - i), 0.0);
    Eigen::VectorXd column = eig.eigenvectors().col(kHours - 1 - i);
    int peak = 0;
    column.cwiseAbs().maxCoeff(&peak);
    if (column(peak) < 0.0) column = -column;
    model.loadings.col(i) = column;
  }

  int near_zero = 0;
  for (int i = 0; i < kHours; ++i) {
    if (model.explained(i) < 1e-12) ++near_zero;
  }
  if (near_zero > 0) {
    model.warnings.push_back(
        "pooled covariance is rank deficient: " + std::to_string(near_zero) +
        " of 24 components carry no variance (normal when night hours are "
        "constant)");
  }

  model.k = choose_k(model.explained, variance_threshold);

  // Score statistics over the fitting pool. The mean is zero by construction
  // (the pool is centered); the sd feeds the standardization in project().
  const Eigen::MatrixXd scores = centered * model.loadings.leftCols(model.k);
  model.component_mean = scores.colwise().mean();
  model.component_sd.resize(model.k);
  for (int j = 0; j < model.k; ++j) {
    const double var =
        (scores.col(j).array() - model.component_mean(j)).square().sum() /
        double(n - 1);
    model.component_sd(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return model;
}

Eigen::MatrixXd project(const Eigen::MatrixXd& curves,
                        const SolarPcaModel& model) {
  if (curves.cols() != kHours) {
    throw DataError("curves must have 24 hourly columns");
  }
  Eigen::MatrixXd scores = (curves.rowwise() - model.center.transpose()) *
                           model.loadings.leftCols(model.k);
  for (int j = 0; j < model.k; ++j) {
    scores.col(j) =
        (scores.col(j).array() - model.component_mean(j)) /
        model.component_sd(j);
  }
  return scores;
}

Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& scores,
                            const SolarPcaModel& model) {
  if (scores.cols() != model.k) {
    throw DataError("score matrix has " + std::to_string(scores.cols()) +
                    " columns, model retains " + std::to_string(model.k));
  }
  Eigen::MatrixXd raw = scores;
  for (int j = 0; j < model.k; ++j) {
    raw.col(j) = raw.col(j).array() * model.component_sd(j) +
                 model.component_mean(j);
  }
  Eigen::MatrixXd curves = raw * model.loadings.leftCols(model.k).transpose();
  curves.rowwise() += model.center.transpose();
  return curves;
}

}  // namespace scengen
