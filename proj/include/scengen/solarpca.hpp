#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scengen/precision.hpp"

namespace scengen {

// Principal-component basis for 24-hour solar deviation curves, fitted on the
// pooled (assets * days) x 24 matrix of gaussianized deviations. Truncating to
// the leading k components is what keeps sampled curves flat over the night
// hours: a column with no pooled variance is orthogonal to every retained
// loading and always reconstructs to its center value.
struct SolarPcaModel {
  Eigen::MatrixXd loadings;   // 24 x 24 orthonormal, decreasing variance
  Eigen::VectorXd explained;  // variance captured by each column of loadings
  Eigen::VectorXd center;     // per-hour mean of the fitting pool
  int k = 0;                  // retained components, 1..24
  Eigen::VectorXd component_mean;  // score stats over the fitting pool,
  Eigen::VectorXd component_sd;    // used to standardize projections
  SeparableGaussianModel separable;  // (asset x component) dependence model
  std::vector<std::string> warnings;
};

// Smallest k whose cumulative explained fraction reaches the threshold.
int choose_k(const Eigen::VectorXd& explained, double threshold = 0.95);

// Eigendecomposition of the pooled hour-by-hour covariance. Columns of the
// pool are hours; rows are asset-days. Sign convention: every loading has its
// largest-magnitude entry positive, so refits are bit-for-bit reproducible.
// The separable field is left empty; the caller fits it on the score panel.
SolarPcaModel fit_pca(const Eigen::MatrixXd& pool,
                      double variance_threshold = 0.95);

// Standardized scores of curves (m x 24) against the retained components.
Eigen::MatrixXd project(const Eigen::MatrixXd& curves,
                        const SolarPcaModel& model);

// Inverse of project: de-standardize, expand through the retained loadings,
// and restore the center curve.
Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& scores,
                            const SolarPcaModel& model);

}  // namespace scengen
