#pragma once

// Independent reference implementations used only by tests: a proximal
// gradient solver for the penalized likelihood, analytic AR(1) precision
// matrices, and matrix-normal simulation helpers. These deliberately share no
// code with the library so they can serve as oracles.

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "scengen/rng.hpp"

namespace oracle {

// Objective in minimization form: -log det Theta + tr(S Theta) + |Lambda o Theta|.
inline double penalized_objective(const Eigen::MatrixXd& S,
                                  const Eigen::MatrixXd& Lambda,
                                  const Eigen::MatrixXd& Theta) {
  const Eigen::LLT<Eigen::MatrixXd> llt(Theta);
  if (llt.info() != Eigen::Success) {
    return std::numeric_limits<double>::infinity();
  }
  double log_det = 0.0;
  for (int i = 0; i < Theta.rows(); ++i) {
    log_det += 2.0 * std::log(llt.matrixL()(i, i));
  }
  return -log_det + (S * Theta).trace() +
         Lambda.cwiseProduct(Theta.cwiseAbs()).sum();
}

inline Eigen::MatrixXd soft(const Eigen::MatrixXd& X,
                            const Eigen::MatrixXd& T) {
  Eigen::MatrixXd out = X;
  for (int j = 0; j < X.cols(); ++j) {
    for (int i = 0; i < X.rows(); ++i) {
      const double t = T(i, j);
      if (out(i, j) > t) {
        out(i, j) -= t;
      } else if (out(i, j) < -t) {
        out(i, j) += t;
      } else {
        out(i, j) = 0.0;
      }
    }
  }
  return out;
}

// Proximal gradient (ISTA) with backtracking line search. Slow but simple;
// each accepted step provably decreases the objective.
inline Eigen::MatrixXd ista_glasso(const Eigen::MatrixXd& S,
                                   const Eigen::MatrixXd& Lambda,
                                   int max_iter = 200000,
                                   double move_tol = 1e-12) {
  const int p = int(S.rows());
  Eigen::MatrixXd Theta = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) Theta(i, i) = 1.0 / (S(i, i) + Lambda(i, i));
  double f = penalized_objective(S, Lambda, Theta);
  double eta = 1.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::MatrixXd inv =
        Eigen::LLT<Eigen::MatrixXd>(Theta).solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd grad = S - inv;
    Eigen::MatrixXd cand;
    double fc = std::numeric_limits<double>::infinity();
    while (true) {
      cand = soft(Theta - eta * grad, eta * Lambda);
      cand = 0.5 * (cand + cand.transpose()).eval();
      fc = penalized_objective(S, Lambda, cand);
      if (fc <= f) break;
      eta *= 0.5;
      if (eta < 1e-14) return Theta;  // cannot improve further
    }
    const double move = (cand - Theta).cwiseAbs().maxCoeff();
    Theta = cand;
    f = fc;
    eta = std::min(eta * 1.25, 1.0);
    if (move < move_tol) break;
  }
  return Theta;
}

// Precision matrix of a stationary AR(1) process with coefficient rho:
// tridiagonal with corners 1/(1-rho^2), interior (1+rho^2)/(1-rho^2), and
// off-diagonal -rho/(1-rho^2). Its inverse is the correlation rho^|i-j|.
inline Eigen::MatrixXd ar1_precision(int n, double rho) {
  const double c = 1.0 / (1.0 - rho * rho);
  Eigen::MatrixXd Theta = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    Theta(i, i) = (i == 0 || i == n - 1) ? c : (1.0 + rho * rho) * c;
    if (i + 1 < n) {
      Theta(i, i + 1) = -rho * c;
      Theta(i + 1, i) = -rho * c;
    }
  }
  return Theta;
}

inline Eigen::MatrixXd ar1_correlation(int n, double rho) {
  Eigen::MatrixXd S(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) S(i, j) = std::pow(rho, std::abs(i - j));
  }
  return S;
}

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& A,
                            const Eigen::MatrixXd& B) {
  Eigen::MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) {
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return out;
}

// One p x q matrix-variate normal draw whose row-major vectorization has
// covariance Sigma_row (x) Sigma_col.
inline Eigen::MatrixXd matrix_normal_draw(const Eigen::MatrixXd& chol_row,
                                          const Eigen::MatrixXd& chol_col,
                                          scengen::PhiloxRng& rng) {
  Eigen::MatrixXd G(chol_row.rows(), chol_col.rows());
  for (int i = 0; i < G.rows(); ++i) {
    for (int j = 0; j < G.cols(); ++j) G(i, j) = rng.next_normal();
  }
  return chol_row * G * chol_col.transpose();
}

}  // namespace oracle
