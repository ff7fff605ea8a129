#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace scengen {

// One L1-penalized inverse-covariance problem. Lambda penalizes entries
// elementwise, so a scalar broadcast and a distance-proportional matrix are
// handled identically; the diagonal is conventionally unpenalized.
struct PenalizedProblem {
  Eigen::MatrixXd S;       // sample correlation, symmetric, unit diagonal
  Eigen::MatrixXd Lambda;  // symmetric, nonnegative
  double tol = 1e-8;
  int max_iter = 1000;
};

struct PrecisionEstimate {
  Eigen::MatrixXd Theta;  // sparse precision matrix, positive definite
  Eigen::MatrixXd Sigma;  // estimated covariance (the glasso dual variable W)
  std::vector<double> objective;  // penalized log-likelihood per sweep
  bool converged = true;
  std::vector<std::string> notes;
};

// Kronecker-separable model: the implied joint covariance of a vectorized
// p x q observation is Sigma_spatial (x) Sigma_temporal. Both factors are
// normalized to correlation matrices; overall scale lives in the marginals.
struct SeparableGaussianModel {
  PrecisionEstimate spatial;
  PrecisionEstimate temporal;
  std::vector<std::string> unit_order;
  std::vector<std::string> lag_order;
};

struct DependencyGraph {
  struct Edge {
    int a = 0;
    int b = 0;
    double weight = 0.0;  // partial correlation -Theta_ab / sqrt(...)
  };
  std::vector<std::string> nodes;
  std::vector<Edge> edges;

  bool has_edge(int a, int b) const;
  std::string to_edge_csv() const;
  std::string to_dot() const;
};

struct ColumnStats {
  std::vector<double> mean;
  std::vector<double> sd;  // population convention (1/N)
};

// Standardizes columns of X in place to mean 0, variance 1.
// Throws ZeroVariance naming the first constant column.
ColumnStats standardize_columns(Eigen::MatrixXd& X);

// S = X_std^T X_std / N after column standardization; unit diagonal.
Eigen::MatrixXd sample_correlation(Eigen::MatrixXd X);

// Scalar lambda broadcast to all off-diagonal entries.
Eigen::MatrixXd scalar_penalty(int p, double lambda);

// Block coordinate descent over the dual covariance W (Friedman, Hastie &
// Tibshirani), one lasso subproblem per column, warm-started across sweeps.
PrecisionEstimate glasso(const PenalizedProblem& problem);

// Penalized log-likelihood log det Theta - tr(S Theta) - sum Lambda|Theta|.
double penalized_loglik(const Eigen::MatrixXd& S, const Eigen::MatrixXd& Lambda,
                        const Eigen::MatrixXd& Theta);

// Largest violation of the glasso stationarity conditions:
//   |Sigma_ij - S_ij| <= Lambda_ij, with equality of matching sign where
//   Theta_ij != 0, and Sigma_ii = S_ii + Lambda_ii.
double kkt_violation(const PenalizedProblem& problem,
                     const PrecisionEstimate& estimate,
                     double zero_tol = 1e-8);

// Correlation-normalized row (p x p) and column (q x q) Gram matrices of
// matrix-variate samples: the inputs to the two gemini glasso problems,
// exposed so penalty selection can score them without refitting.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gemini_grams(
    const std::vector<Eigen::MatrixXd>& days);

// Separable precision estimation: glasso on the correlation-normalized row
// Gram matrix (averaging over columns and days) and column Gram matrix
// (averaging over rows and days) of matrix-variate samples.
SeparableGaussianModel gemini(const std::vector<Eigen::MatrixXd>& days,
                              const Eigen::MatrixXd& spatial_penalty,
                              const Eigen::MatrixXd& temporal_penalty,
                              double tol = 1e-8, int max_iter = 1000);

// Lambda_ij = base * dist(i, j) / mean pairwise distance, zero diagonal.
Eigen::MatrixXd distance_penalty(
    const std::vector<std::string>& units,
    const std::map<std::string, std::pair<double, double>>& coordinates,
    double base);

DependencyGraph dependency_graph(const PrecisionEstimate& estimate,
                                 const std::vector<std::string>& labels,
                                 double threshold = 0.01);

struct PenaltySelection {
  double lambda = 0.0;
  std::vector<double> grid;
  std::vector<double> ebic;
};

// Extended BIC over a lambda grid (Foygel & Drton, gamma in [0, 1]):
//   eBIC = -n_eff (log det Theta - tr(S Theta)) + |E| log n_eff
//          + 4 gamma |E| log p.
// build_penalty maps a grid value to the full penalty matrix, so scalar and
// distance-proportional penalties share the selector.
PenaltySelection select_penalty(
    const Eigen::MatrixXd& S, double n_eff, std::span<const double> grid,
    double gamma,
    const std::function<Eigen::MatrixXd(double)>& build_penalty,
    double tol = 1e-8, int max_iter = 1000);

}  // namespace scengen
