#include "scengen/precision.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "scengen/errors.hpp"
#include "scengen/rng.hpp"

using namespace scengen;

namespace {

Eigen::MatrixXd random_spd(int p, std::uint64_t seed, double base_corr = 0.0) {
  PhiloxRng rng(seed, 0);
  Eigen::MatrixXd A(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) A(i, j) = rng.next_normal();
  }
  Eigen::MatrixXd S = A * A.transpose() / double(p) +
                      base_corr * Eigen::MatrixXd::Ones(p, p);
  S.diagonal().array() += 0.5;
  // Normalize to a correlation matrix, the shape glasso sees in production.
  Eigen::VectorXd d = S.diagonal().cwiseSqrt().cwiseInverse();
  S = d.asDiagonal() * S * d.asDiagonal();
  return 0.5 * (S + S.transpose());
}

Eigen::MatrixXd gaussian_data(int n, int p, std::uint64_t seed) {
  PhiloxRng rng(seed, 0);
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) X(i, j) = rng.next_normal();
  }
  return X;
}

}  // namespace

TEST_CASE("sample correlation basics") {
  SUBCASE("identical columns are perfectly correlated") {
    Eigen::MatrixXd X = gaussian_data(50, 1, 1);
    Eigen::MatrixXd X2(50, 2);
    X2.col(0) = X.col(0);
    X2.col(1) = X.col(0);
    const auto S = sample_correlation(X2);
    CHECK(S(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(S(0, 0) == doctest::Approx(1.0));
  }

  SUBCASE("independent columns decorrelate at large N") {
    const auto S = sample_correlation(gaussian_data(10000, 5, 2));
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        if (i != j) CHECK(std::abs(S(i, j)) < 0.05);
      }
    }
  }

  SUBCASE("single column gives the scalar 1") {
    const auto S = sample_correlation(gaussian_data(100, 1, 3));
    REQUIRE(S.rows() == 1);
    CHECK(S(0, 0) == doctest::Approx(1.0));
  }

  SUBCASE("constant columns are rejected by name") {
    Eigen::MatrixXd X = gaussian_data(100, 3, 4);
    X.col(1).setConstant(7.0);
    try {
      sample_correlation(X);
      FAIL("expected ZeroVarianceError");
    } catch (const ZeroVarianceError& e) {
      CHECK(std::string(e.what()).find("column 1") != std::string::npos);
    }
  }
}

TEST_CASE("unpenalized glasso equals direct inversion") {
  const auto S = random_spd(3, 11);
  const auto est = glasso(PenalizedProblem{S, scalar_penalty(3, 0.0)});
  CHECK(est.converged);
  const Eigen::MatrixXd direct = S.inverse();
  CHECK((est.Theta - direct).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("full shrinkage produces a diagonal precision") {
  const auto S = random_spd(5, 12, 0.3);
  const double lam = S.cwiseAbs().maxCoeff();  // >= max |S_ij|
  const auto est = glasso(PenalizedProblem{S, scalar_penalty(5, lam)});
  CHECK(est.converged);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i != j) {
        CHECK(est.Theta(i, j) == 0.0);
      } else {
        CHECK(est.Theta(i, i) == doctest::Approx(1.0 / S(i, i)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("glasso matches the proximal-gradient oracle") {
  const auto S = random_spd(4, 21, 0.2);
  const auto Lambda = scalar_penalty(4, 0.1);
  const auto est = glasso(PenalizedProblem{S, Lambda});
  REQUIRE(est.converged);
  const auto theta_oracle = oracle::ista_glasso(S, Lambda);
  const double ours = oracle::penalized_objective(S, Lambda, est.Theta);
  const double theirs = oracle::penalized_objective(S, Lambda, theta_oracle);
  CHECK(std::abs(ours - theirs) < 1e-6);
}

TEST_CASE("glasso satisfies its stationarity conditions") {
  for (std::uint64_t seed = 100; seed < 106; ++seed) {
    const int p = 3 + int(seed % 6);
    const auto S = random_spd(p, seed, 0.25);
    for (double lam : {0.0, 0.05, 0.2}) {
      const PenalizedProblem prob{S, scalar_penalty(p, lam)};
      const auto est = glasso(prob);
      REQUIRE(est.converged);
      CHECK(kkt_violation(prob, est) < 1e-6);

      // Theta is positive definite and actually inverts Sigma.
      const Eigen::LLT<Eigen::MatrixXd> llt(est.Theta);
      CHECK(llt.info() == Eigen::Success);
      const Eigen::MatrixXd resid =
          est.Sigma * est.Theta - Eigen::MatrixXd::Identity(p, p);
      CHECK(resid.operatorNorm() < 1e-6);
    }
  }
}

TEST_CASE("the objective trace never decreases") {
  for (std::uint64_t seed = 200; seed < 204; ++seed) {
    const auto S = random_spd(6, seed, 0.3);
    const auto est = glasso(PenalizedProblem{S, scalar_penalty(6, 0.05)});
    REQUIRE(est.objective.size() >= 1);
    for (std::size_t k = 1; k < est.objective.size(); ++k) {
      CHECK(est.objective[k] >=
            est.objective[k - 1] - 1e-8 * std::abs(est.objective[k - 1]));
    }
  }
}

TEST_CASE("a sweep cap returns the best iterate flagged as unconverged") {
  const auto S = random_spd(8, 31, 0.4);
  const auto est = glasso(PenalizedProblem{S, scalar_penalty(8, 0.01), 1e-12, 1});
  CHECK(!est.converged);
  REQUIRE(!est.notes.empty());
  CHECK(est.Theta.allFinite());
}

TEST_CASE("singular input is only accepted with a usable penalty") {
  // Rank-deficient correlation: two identical coordinates.
  Eigen::MatrixXd X = gaussian_data(200, 1, 41);
  Eigen::MatrixXd X3(200, 3);
  X3.col(0) = X.col(0);
  X3.col(1) = X.col(0);
  X3.col(2) = gaussian_data(200, 1, 42).col(0);
  const auto S = sample_correlation(X3);

  SUBCASE("positive penalties make the problem well posed") {
    const auto est = glasso(PenalizedProblem{S, scalar_penalty(3, 0.1)});
    CHECK(est.converged);
    CHECK(Eigen::LLT<Eigen::MatrixXd>(est.Theta).info() == Eigen::Success);
  }

  SUBCASE("no penalty at all gets diagonal jitter and a note") {
    const auto est = glasso(PenalizedProblem{S, scalar_penalty(3, 0.0)});
    bool noted = false;
    for (const auto& n : est.notes) {
      noted |= n.find("jitter") != std::string::npos;
    }
    CHECK(noted);
    CHECK(est.Theta.allFinite());
  }

  SUBCASE("a mix of zero and positive penalties is rejected") {
    Eigen::MatrixXd Lambda = scalar_penalty(3, 0.1);
    Lambda(0, 1) = Lambda(1, 0) = 0.0;
    CHECK_THROWS_AS(glasso(PenalizedProblem{S, Lambda}), NotPsdError);
  }

  SUBCASE("indefinite input is rejected") {
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
    bad(0, 1) = bad(1, 0) = 2.0;  // eigenvalues {3, 1, -1}
    CHECK_THROWS_AS(glasso(PenalizedProblem{bad, scalar_penalty(3, 0.1)}),
                    NotPsdError);
  }
}

TEST_CASE("malformed problems are rejected") {
  const auto S = random_spd(3, 51);
  Eigen::MatrixXd asym = S;
  asym(0, 1) += 1e-6;
  CHECK_THROWS_AS(glasso(PenalizedProblem{asym, scalar_penalty(3, 0.1)}),
                  DataError);
  Eigen::MatrixXd negative = scalar_penalty(3, 0.1);
  negative(0, 1) = negative(1, 0) = -0.1;
  CHECK_THROWS_AS(glasso(PenalizedProblem{S, negative}), ConfigError);
  CHECK_THROWS_AS(glasso(PenalizedProblem{S, scalar_penalty(4, 0.1)}),
                  ConfigError);
}

TEST_CASE("scalar glasso reduces to the closed form") {
  Eigen::MatrixXd S = Eigen::MatrixXd::Constant(1, 1, 2.5);
  Eigen::MatrixXd L = Eigen::MatrixXd::Constant(1, 1, 0.3);
  const auto est = glasso(PenalizedProblem{S, L});
  CHECK(est.Theta(0, 0) == doctest::Approx(1.0 / 2.8));
  CHECK(est.Sigma(0, 0) == doctest::Approx(2.8));
}

TEST_CASE("gemini recovers known Kronecker factors") {
  const int p = 4;
  const int q = 6;
  // Chain coupling is kept moderate: at rho near 0.6 the lasso bias leaves
  // small spurious distance-2 partial correlations no matter the penalty, so
  // exact support is only identifiable in this weaker regime.
  const auto sigma_s = oracle::ar1_correlation(p, 0.4);
  const auto sigma_t = oracle::ar1_correlation(q, 0.3);
  const Eigen::MatrixXd chol_s = sigma_s.llt().matrixL();
  const Eigen::MatrixXd chol_t = sigma_t.llt().matrixL();

  PhiloxRng rng(71, 0);
  std::vector<Eigen::MatrixXd> days;
  for (int d = 0; d < 2000; ++d) {
    days.push_back(oracle::matrix_normal_draw(chol_s, chol_t, rng));
  }
  const auto model =
      gemini(days, scalar_penalty(p, 0.05), scalar_penalty(q, 0.05));
  REQUIRE(model.spatial.converged);
  REQUIRE(model.temporal.converged);

  CHECK((model.spatial.Sigma - sigma_s).cwiseAbs().maxCoeff() < 0.1);
  CHECK((model.temporal.Sigma - sigma_t).cwiseAbs().maxCoeff() < 0.1);

  // AR(1) truth has chain support: exactly the |i-j| = 1 edges.
  const auto gs = dependency_graph(model.spatial, {"a", "b", "c", "d"});
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      CHECK(gs.has_edge(i, j) == (j - i == 1));
    }
  }
}

TEST_CASE("gemini on iid noise finds near-identity factors") {
  PhiloxRng rng(72, 0);
  std::vector<Eigen::MatrixXd> days;
  for (int d = 0; d < 2000; ++d) {
    Eigen::MatrixXd day(4, 6);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 6; ++j) day(i, j) = rng.next_normal();
    }
    days.push_back(day);
  }
  const auto model =
      gemini(days, scalar_penalty(4, 0.05), scalar_penalty(6, 0.05));
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i != j) CHECK(std::abs(model.spatial.Sigma(i, j)) < 0.05);
    }
  }
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (i != j) CHECK(std::abs(model.temporal.Sigma(i, j)) < 0.05);
    }
  }
}

TEST_CASE("gemini with one row degenerates to plain glasso") {
  const int q = 5;
  const auto sigma_t = oracle::ar1_correlation(q, 0.5);
  const Eigen::MatrixXd chol_t = sigma_t.llt().matrixL();
  PhiloxRng rng(73, 0);
  std::vector<Eigen::MatrixXd> days;
  Eigen::MatrixXd X(2000, q);
  for (int d = 0; d < 2000; ++d) {
    Eigen::MatrixXd g(q, 1);
    for (int i = 0; i < q; ++i) g(i, 0) = rng.next_normal();
    Eigen::MatrixXd row = (chol_t * g).transpose();  // 1 x q
    days.push_back(row);
    X.row(d) = row;
  }
  const auto model =
      gemini(days, scalar_penalty(1, 0.05), scalar_penalty(q, 0.05));
  CHECK(model.spatial.Sigma(0, 0) == doctest::Approx(1.0));
  CHECK(model.spatial.Theta(0, 0) == doctest::Approx(1.0));

  const auto plain =
      glasso(PenalizedProblem{sample_correlation(X), scalar_penalty(q, 0.05)});
  CHECK((model.temporal.Theta - plain.Theta).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("transposing the panel swaps the gemini factors") {
  PhiloxRng rng(74, 0);
  std::vector<Eigen::MatrixXd> days;
  std::vector<Eigen::MatrixXd> transposed;
  for (int d = 0; d < 50; ++d) {
    Eigen::MatrixXd day(3, 7);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 7; ++j) day(i, j) = rng.next_normal();
    }
    days.push_back(day);
    transposed.push_back(day.transpose());
  }
  const auto a = gemini(days, scalar_penalty(3, 0.1), scalar_penalty(7, 0.1));
  const auto b =
      gemini(transposed, scalar_penalty(7, 0.1), scalar_penalty(3, 0.1));
  CHECK((a.spatial.Theta - b.temporal.Theta).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.temporal.Theta - b.spatial.Theta).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("distance penalties scale with pairwise distance") {
  const std::vector<std::string> units = {"w1", "w2", "w3"};
  std::map<std::string, std::pair<double, double>> coords = {
      {"w1", {0.0, 0.0}}, {"w2", {1.0, 0.0}}, {"w3", {2.0, 0.0}}};
  const auto L = distance_penalty(units, coords, 0.1);
  CHECK(L(0, 0) == 0.0);
  CHECK(L(0, 2) == doctest::Approx(2.0 * L(0, 1)).epsilon(1e-12));
  // Mean pairwise distance is (1 + 1 + 2)/3 = 4/3.
  CHECK(L(0, 1) == doctest::Approx(0.1 * 1.0 / (4.0 / 3.0)).epsilon(1e-12));

  SUBCASE("rescaling coordinates changes nothing") {
    for (auto& [unit, xy] : coords) {
      xy.first *= 2.0;
      xy.second *= 2.0;
    }
    const auto L2 = distance_penalty(units, coords, 0.1);
    CHECK((L - L2).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("coincident units carry no penalty between them") {
    coords["w2"] = coords["w1"];
    const auto L3 = distance_penalty(units, coords, 0.1);
    CHECK(L3(0, 1) == 0.0);
    CHECK(L3(0, 2) > 0.0);
  }

  SUBCASE("missing coordinates are an error") {
    coords.erase("w3");
    CHECK_THROWS_AS(distance_penalty(units, coords, 0.1),
                    MissingCoordinatesError);
  }
}

TEST_CASE("dependency graphs read edges off the precision matrix") {
  SUBCASE("diagonal precision has no edges") {
    PrecisionEstimate est;
    est.Theta = Eigen::MatrixXd::Identity(4, 4) * 2.0;
    const auto g = dependency_graph(est, {"a", "b", "c", "d"});
    CHECK(g.edges.empty());
  }

  SUBCASE("AR(1) precision gives the chain graph") {
    PrecisionEstimate est;
    est.Theta = oracle::ar1_precision(6, 0.5);
    const auto g =
        dependency_graph(est, {"l0", "l1", "l2", "l3", "l4", "l5"});
    CHECK(g.edges.size() == 5);
    for (const auto& e : g.edges) {
      CHECK(e.b - e.a == 1);
      CHECK(e.weight > 0.0);  // positive partial correlation along the chain
      CHECK(std::abs(e.weight) < 1.0);
    }
  }

  SUBCASE("an impossible threshold empties the graph") {
    PrecisionEstimate est;
    est.Theta = oracle::ar1_precision(6, 0.5);
    const auto g = dependency_graph(
        est, {"l0", "l1", "l2", "l3", "l4", "l5"}, 1.0);
    CHECK(g.edges.empty());
  }

  SUBCASE("exports name nodes and weights") {
    PrecisionEstimate est;
    est.Theta = oracle::ar1_precision(3, 0.5);
    const auto g = dependency_graph(est, {"x", "y", "z"});
    const auto csv = g.to_edge_csv();
    CHECK(csv.find("node_a,node_b,weight") != std::string::npos);
    CHECK(csv.find("x,y,") != std::string::npos);
    const auto dot = g.to_dot();
    CHECK(dot.find("graph dependencies {") != std::string::npos);
    CHECK(dot.find("\"x\" -- \"y\"") != std::string::npos);
  }
}

TEST_CASE("extended BIC picks a sparsity-recovering penalty") {
  // Data from a sparse chain precision; the selected lambda should neither
  // wash out the chain nor invent a dense graph.
  const int p = 6;
  const auto sigma = oracle::ar1_correlation(p, 0.6);
  const Eigen::MatrixXd chol = sigma.llt().matrixL();
  PhiloxRng rng(81, 0);
  Eigen::MatrixXd X(800, p);
  for (int i = 0; i < 800; ++i) {
    Eigen::VectorXd g(p);
    for (int j = 0; j < p; ++j) g(j) = rng.next_normal();
    X.row(i) = (chol * g).transpose();
  }
  const auto S = sample_correlation(X);
  const std::vector<double> grid = {0.01, 0.05, 0.1, 0.2};
  const auto sel = select_penalty(S, 800.0, grid, 0.5, [&](double lam) {
    return scalar_penalty(p, lam);
  });
  REQUIRE(sel.ebic.size() == grid.size());
  CHECK(std::find(grid.begin(), grid.end(), sel.lambda) != grid.end());

  const auto est =
      glasso(PenalizedProblem{S, scalar_penalty(p, sel.lambda)});
  const auto g = dependency_graph(
      est, {"l0", "l1", "l2", "l3", "l4", "l5"});
  for (int i = 0; i + 1 < p; ++i) CHECK(g.has_edge(i, i + 1));
}
