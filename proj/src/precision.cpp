#include "scengen/precision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "scengen/errors.hpp"

namespace scengen {

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

double mean_offdiag_abs(const Eigen::MatrixXd& m) {
  const int p = int(m.rows());
  if (p < 2) return 0.0;
  double sum = 0.0;
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      if (i != j) sum += std::abs(m(i, j));
    }
  }
  return sum / double(p * (p - 1));
}

void validate_problem(const PenalizedProblem& prob) {
  const int p = int(prob.S.rows());
  if (p < 1 || prob.S.cols() != p) throw ConfigError("S must be square");
  if (prob.Lambda.rows() != p || prob.Lambda.cols() != p) {
    throw ConfigError("Lambda must match the shape of S");
  }
  if ((prob.S - prob.S.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw DataError("S is not symmetric");
  }
  if ((prob.Lambda - prob.Lambda.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("Lambda is not symmetric");
  }
  if (prob.Lambda.minCoeff() < 0.0) {
    throw ConfigError("Lambda entries must be nonnegative");
  }
  if (!(prob.tol > 0.0) || prob.max_iter < 1) {
    throw ConfigError("tol must be positive and max_iter at least 1");
  }
}

// Penalized log-likelihood at the precision iterate recovered from the
// current dual state; -inf when the iterate is not yet positive definite.
double objective_at(const Eigen::MatrixXd& S, const Eigen::MatrixXd& Lambda,
                    const Eigen::MatrixXd& Theta) {
  const Eigen::LLT<Eigen::MatrixXd> llt(Theta);
  if (llt.info() != Eigen::Success) {
    return -std::numeric_limits<double>::infinity();
  }
  double log_det = 0.0;
  for (int i = 0; i < Theta.rows(); ++i) {
    log_det += 2.0 * std::log(llt.matrixL()(i, i));
  }
  return log_det - (S * Theta).trace() -
         Lambda.cwiseProduct(Theta.cwiseAbs()).sum();
}

// Recovers Theta from the dual covariance W and the per-column lasso
// coefficients: theta_jj = 1 / (w_jj - w12' beta), theta_.j = -beta theta_jj.
Eigen::MatrixXd recover_theta(const Eigen::MatrixXd& W,
                              const Eigen::MatrixXd& B) {
  const int p = int(W.rows());
  Eigen::MatrixXd Theta(p, p);
  for (int j = 0; j < p; ++j) {
    double cross = 0.0;
    for (int i = 0; i < p; ++i) {
      if (i != j) cross += W(i, j) * B(i, j);
    }
    const double theta_jj = 1.0 / (W(j, j) - cross);
    Theta(j, j) = theta_jj;
    for (int i = 0; i < p; ++i) {
      if (i != j) Theta(i, j) = -B(i, j) * theta_jj;
    }
  }
  return 0.5 * (Theta + Theta.transpose());
}

}  // namespace

double penalized_loglik(const Eigen::MatrixXd& S, const Eigen::MatrixXd& Lambda,
                        const Eigen::MatrixXd& Theta) {
  return objective_at(S, Lambda, Theta);
}

PrecisionEstimate glasso(const PenalizedProblem& problem) {
  validate_problem(problem);
  PenalizedProblem prob = problem;
  const int p = int(prob.S.rows());
  PrecisionEstimate est;

  if (p == 1) {
    const double w = prob.S(0, 0) + prob.Lambda(0, 0);
    est.Theta = Eigen::MatrixXd::Constant(1, 1, 1.0 / w);
    est.Sigma = Eigen::MatrixXd::Constant(1, 1, w);
    est.objective.push_back(penalized_loglik(prob.S, prob.Lambda, est.Theta));
    return est;
  }

  {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(prob.S);
    const double max_eig = eig.eigenvalues().maxCoeff();
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < -1e-8 * std::max(1.0, max_eig)) {
      throw NotPsdError("S has a negative eigenvalue (" +
                        std::to_string(min_eig) + ")");
    }
    if (min_eig <= 1e-10 * std::max(1.0, max_eig)) {
      double min_offdiag_penalty = std::numeric_limits<double>::infinity();
      for (int j = 0; j < p; ++j) {
        for (int i = 0; i < p; ++i) {
          if (i != j) {
            min_offdiag_penalty = std::min(min_offdiag_penalty,
                                           prob.Lambda(i, j));
          }
        }
      }
      if (prob.Lambda.cwiseAbs().maxCoeff() == 0.0) {
        prob.S.diagonal().array() += 1e-10;
        est.notes.push_back(
            "S is numerically singular with no penalty; "
            "added 1e-10 diagonal jitter");
      } else if (min_offdiag_penalty <= 0.0) {
        throw NotPsdError(
            "singular S needs strictly positive off-diagonal penalties");
      }
    }
  }

  Eigen::MatrixXd W = prob.S;
  W.diagonal() += prob.Lambda.diagonal();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, p);  // warm-started lasso betas

  const double scale = mean_offdiag_abs(prob.S);
  const double thr = prob.tol * (scale > 0.0 ? scale : 1.0);
  const double inner_thr = std::max(0.1 * thr, 1e-14);
  const int max_inner = 10000;

  est.converged = false;
  Eigen::MatrixXd W_prev(p, p);
  Eigen::VectorXd t(p);
  for (int sweep = 0; sweep < prob.max_iter; ++sweep) {
    W_prev = W;
    for (int j = 0; j < p; ++j) {
      // t_i = sum_{k != j} W_ik beta_k, maintained across coordinate moves.
      t.setZero();
      for (int k = 0; k < p; ++k) {
        if (k != j && B(k, j) != 0.0) t += W.col(k) * B(k, j);
      }
      for (int pass = 0; pass < max_inner; ++pass) {
        double max_move = 0.0;
        for (int i = 0; i < p; ++i) {
          if (i == j) continue;
          const double beta_old = B(i, j);
          const double gradient = prob.S(i, j) - (t(i) - W(i, i) * beta_old);
          const double beta_new =
              soft_threshold(gradient, prob.Lambda(i, j)) / W(i, i);
          const double move = beta_new - beta_old;
          if (move != 0.0) {
            B(i, j) = beta_new;
            t += W.col(i) * move;
            max_move = std::max(max_move, std::abs(move));
          }
        }
        if (max_move <= inner_thr) break;
      }
      for (int i = 0; i < p; ++i) {
        if (i != j) {
          W(i, j) = t(i);
          W(j, i) = t(i);
        }
      }
    }
    est.objective.push_back(
        penalized_loglik(prob.S, prob.Lambda, recover_theta(W, B)));
    const double delta = mean_offdiag_abs(W - W_prev);
    if (delta <= thr) {
      est.converged = true;
      break;
    }
  }
  if (!est.converged) {
    est.notes.push_back("stopped after " + std::to_string(prob.max_iter) +
                        " sweeps without reaching tolerance; "
                        "returning the best iterate");
  }

  est.Sigma = W;
  est.Theta = recover_theta(W, B);
  return est;
}

double kkt_violation(const PenalizedProblem& problem,
                     const PrecisionEstimate& estimate, double zero_tol) {
  const int p = int(problem.S.rows());
  const Eigen::MatrixXd delta = estimate.Sigma - problem.S;
  double worst = 0.0;
  for (int j = 0; j < p; ++j) {
    worst = std::max(worst, std::abs(delta(j, j) - problem.Lambda(j, j)));
    for (int i = 0; i < p; ++i) {
      if (i == j) continue;
      const double lam = problem.Lambda(i, j);
      const double theta = estimate.Theta(i, j);
      if (std::abs(theta) > zero_tol) {
        worst = std::max(
            worst, std::abs(delta(i, j) - lam * (theta > 0.0 ? 1.0 : -1.0)));
      } else {
        worst = std::max(worst, std::abs(delta(i, j)) - lam);
      }
    }
  }
  return worst;
}

ColumnStats standardize_columns(Eigen::MatrixXd& X) {
  const int n = int(X.rows());
  const int p = int(X.cols());
  if (n < 2) throw DataError("need at least 2 rows to standardize");
  ColumnStats stats;
  stats.mean.resize(p);
  stats.sd.resize(p);
  for (int j = 0; j < p; ++j) {
    const double mean = X.col(j).mean();
    const double var = (X.col(j).array() - mean).square().sum() / double(n);
    if (!(var > 0.0)) {
      throw ZeroVarianceError("column " + std::to_string(j) +
                              " has zero variance");
    }
    const double sd = std::sqrt(var);
    X.col(j) = (X.col(j).array() - mean) / sd;
    stats.mean[j] = mean;
    stats.sd[j] = sd;
  }
  return stats;
}

Eigen::MatrixXd sample_correlation(Eigen::MatrixXd X) {
  standardize_columns(X);
  Eigen::MatrixXd S = X.transpose() * X / double(X.rows());
  S = 0.5 * (S + S.transpose());
  S.diagonal().setOnes();
  return S;
}

Eigen::MatrixXd scalar_penalty(int p, double lambda) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Constant(p, p, lambda);
  L.diagonal().setZero();
  return L;
}

namespace {

Eigen::MatrixXd to_correlation(Eigen::MatrixXd gram, const char* which) {
  const int p = int(gram.rows());
  Eigen::VectorXd d(p);
  for (int i = 0; i < p; ++i) {
    if (!(gram(i, i) > 0.0)) {
      throw ZeroVarianceError(std::string(which) + " index " +
                              std::to_string(i) + " has zero variance");
    }
    d(i) = 1.0 / std::sqrt(gram(i, i));
  }
  gram = d.asDiagonal() * gram * d.asDiagonal();
  gram = 0.5 * (gram + gram.transpose());
  gram.diagonal().setOnes();
  return gram;
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gemini_grams(
    const std::vector<Eigen::MatrixXd>& days) {
  if (days.size() < 2) throw DataError("gemini needs at least 2 days");
  const int p = int(days.front().rows());
  const int q = int(days.front().cols());
  Eigen::MatrixXd row_gram = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd col_gram = Eigen::MatrixXd::Zero(q, q);
  for (const auto& day : days) {
    if (day.rows() != p || day.cols() != q) {
      throw DataError("gemini days differ in shape");
    }
    row_gram += day * day.transpose();
    col_gram += day.transpose() * day;
  }
  const double n = double(days.size());
  row_gram /= n * double(q);
  col_gram /= n * double(p);
  return {to_correlation(row_gram, "unit"), to_correlation(col_gram, "lag")};
}

SeparableGaussianModel gemini(const std::vector<Eigen::MatrixXd>& days,
                              const Eigen::MatrixXd& spatial_penalty,
                              const Eigen::MatrixXd& temporal_penalty,
                              double tol, int max_iter) {
  const auto grams = gemini_grams(days);
  SeparableGaussianModel model;
  model.spatial =
      glasso(PenalizedProblem{grams.first, spatial_penalty, tol, max_iter});
  model.temporal =
      glasso(PenalizedProblem{grams.second, temporal_penalty, tol, max_iter});
  return model;
}

Eigen::MatrixXd distance_penalty(
    const std::vector<std::string>& units,
    const std::map<std::string, std::pair<double, double>>& coordinates,
    double base) {
  const int p = int(units.size());
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(p, p);
  double total = 0.0;
  int pairs = 0;
  for (int i = 0; i < p; ++i) {
    const auto it_i = coordinates.find(units[i]);
    if (it_i == coordinates.end()) {
      throw MissingCoordinatesError("no coordinates for unit '" + units[i] +
                                    "'");
    }
    for (int j = i + 1; j < p; ++j) {
      const auto it_j = coordinates.find(units[j]);
      if (it_j == coordinates.end()) {
        throw MissingCoordinatesError("no coordinates for unit '" + units[j] +
                                      "'");
      }
      const double dx = it_i->second.first - it_j->second.first;
      const double dy = it_i->second.second - it_j->second.second;
      const double d = std::sqrt(dx * dx + dy * dy);
      dist(i, j) = d;
      dist(j, i) = d;
      total += d;
      ++pairs;
    }
  }
  if (pairs == 0 || total == 0.0) return Eigen::MatrixXd::Zero(p, p);
  return dist * (base / (total / double(pairs)));
}

bool DependencyGraph::has_edge(int a, int b) const {
  for (const auto& e : edges) {
    if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return true;
  }
  return false;
}

std::string DependencyGraph::to_edge_csv() const {
  std::ostringstream out;
  out << "node_a,node_b,weight\n";
  for (const auto& e : edges) {
    out << nodes[e.a] << ',' << nodes[e.b] << ',' << e.weight << '\n';
  }
  return out.str();
}

std::string DependencyGraph::to_dot() const {
  std::ostringstream out;
  out << "graph dependencies {\n";
  for (const auto& node : nodes) {
    out << "  \"" << node << "\";\n";
  }
  for (const auto& e : edges) {
    out << "  \"" << nodes[e.a] << "\" -- \"" << nodes[e.b] << "\" [weight="
        << e.weight << "];\n";
  }
  out << "}\n";
  return out.str();
}

DependencyGraph dependency_graph(const PrecisionEstimate& estimate,
                                 const std::vector<std::string>& labels,
                                 double threshold) {
  const int p = int(estimate.Theta.rows());
  if (int(labels.size()) != p) {
    throw ConfigError("label count does not match matrix size");
  }
  DependencyGraph graph;
  graph.nodes = labels;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const double w = -estimate.Theta(i, j) /
                       std::sqrt(estimate.Theta(i, i) * estimate.Theta(j, j));
      if (std::abs(w) > threshold) {
        graph.edges.push_back(DependencyGraph::Edge{i, j, w});
      }
    }
  }
  return graph;
}

PenaltySelection select_penalty(
    const Eigen::MatrixXd& S, double n_eff, std::span<const double> grid,
    double gamma, const std::function<Eigen::MatrixXd(double)>& build_penalty,
    double tol, int max_iter) {
  if (grid.empty()) throw ConfigError("penalty grid is empty");
  const int p = int(S.rows());
  PenaltySelection sel;
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    const auto est = glasso(
        PenalizedProblem{S, build_penalty(lambda), tol, max_iter});
    int edges = 0;
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        if (std::abs(est.Theta(i, j)) > 1e-8) ++edges;
      }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(est.Theta);
    double log_det = 0.0;
    for (int i = 0; i < p; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
    const double fit = log_det - (S * est.Theta).trace();
    const double ebic = -n_eff * fit + double(edges) * std::log(n_eff) +
                        4.0 * gamma * double(edges) * std::log(double(p));
    sel.grid.push_back(lambda);
    sel.ebic.push_back(ebic);
    if (ebic < best) {
      best = ebic;
      sel.lambda = lambda;
    }
  }
  return sel;
}

}  // namespace scengen
