#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "vacalc/rng.hpp"
#include "vacalc/solver.hpp"

using namespace vacalc;

namespace {

// Random column-stochastic design: each column is a distribution over n
// profiles, like a tabulated conditional.
Eigen::MatrixXd random_design(int n, int J, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd X(n, J);
  for (int j = 0; j < J; ++j) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      X(i, j) = unif(rng);
      sum += X(i, j);
    }
    X.col(j) /= sum;
  }
  return X;
}

Eigen::VectorXd random_distribution(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd y(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    y(i) = unif(rng);
    sum += y(i);
  }
  return y / sum;
}

// Lagrangian oracle for min ||Y - X b||^2 s.t. sum(b) = c: solve the KKT
// system [2X'X, 1; 1', 0] [b; lambda] = [2X'Y; c] directly.
Eigen::VectorXd kkt_oracle(const Eigen::VectorXd& Y, const Eigen::MatrixXd& X, double c) {
  const int J = static_cast<int>(X.cols());
  Eigen::MatrixXd K(J + 1, J + 1);
  K.topLeftCorner(J, J) = 2.0 * X.transpose() * X;
  K.topRightCorner(J, 1) = Eigen::VectorXd::Ones(J);
  K.bottomLeftCorner(1, J) = Eigen::RowVectorXd::Ones(J);
  K(J, J) = 0.0;
  Eigen::VectorXd rhs(J + 1);
  rhs.head(J) = 2.0 * X.transpose() * Y;
  rhs(J) = c;
  Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
  return sol.head(J);
}

}  // namespace

TEST_CASE("basis for J=2 matches hand Gram-Schmidt") {
  ReparamBasis b = build_basis(2, ConstraintSpec{});
  CHECK(b.C(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(b.C(1) == doctest::Approx(1.0).epsilon(1e-15));
  // e1 minus its projection on (1,1)/sqrt(2), normalized: (1, -1)/sqrt(2).
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(b.A(0, 0)) == doctest::Approx(r).epsilon(1e-12));
  CHECK(std::abs(b.A(0, 1)) == doctest::Approx(r).epsilon(1e-12));
  CHECK(b.A(0, 0) * b.A(0, 1) < 0.0);  // opposite signs
}

TEST_CASE("basis scales the constraint row by 1/c") {
  ConstraintSpec spec;
  spec.total = 0.5;
  ReparamBasis b = build_basis(3, spec);
  for (int j = 0; j < 3; ++j) CHECK(b.C(j) == doctest::Approx(2.0).epsilon(1e-15));
  // C beta = 1 whenever the entries sum to c.
  Eigen::VectorXd beta(3);
  beta << 0.2, 0.1, 0.2;
  CHECK(b.C.dot(beta) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("basis rows orthogonal across J and c") {
  for (int J = 2; J <= 20; ++J) {
    for (double c : {1.0, 0.5, 0.9}) {
      ConstraintSpec spec;
      spec.total = c;
      ReparamBasis b = build_basis(J, spec);
      CHECK((b.C * b.A.transpose()).cwiseAbs().maxCoeff() < 1e-10);
      Eigen::MatrixXd AAt = b.A * b.A.transpose();
      CHECK((AAt - Eigen::MatrixXd::Identity(J - 1, J - 1)).cwiseAbs().maxCoeff() < 1e-10);
      // The inverse really inverts.
      Eigen::MatrixXd GG = b.G * b.G_inv;
      CHECK((GG - Eigen::MatrixXd::Identity(J, J)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("equality solve recovers coefficients in the column space") {
  auto rng = make_rng(1);
  Eigen::MatrixXd X = random_design(8, 2, rng);
  Eigen::VectorXd beta0(2);
  beta0 << 0.3, 0.7;
  Eigen::VectorXd Y = X * beta0;
  auto r = solve_equality(Y, X, build_basis(2, ConstraintSpec{}));
  CHECK(r.beta(0) == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(r.beta(1) == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(r.sigma2 == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("equality solve matches the KKT oracle") {
  auto rng = make_rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    int J = 2 + static_cast<int>(rng() % 4);
    int n = J + 3 + static_cast<int>(rng() % 10);
    Eigen::MatrixXd X = random_design(n, J, rng);
    Eigen::VectorXd Y = random_distribution(n, rng);
    auto r = solve_equality(Y, X, build_basis(J, ConstraintSpec{}));
    Eigen::VectorXd oracle = kkt_oracle(Y, X, 1.0);
    CHECK((r.beta - oracle).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(r.beta.sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("equality covariance is null-basis independent") {
  auto rng = make_rng(3);
  const int J = 4, n = 12;
  Eigen::MatrixXd X = random_design(n, J, rng);
  Eigen::VectorXd Y = random_distribution(n, rng);
  auto r = solve_equality(Y, X, build_basis(J, ConstraintSpec{}));

  // Oracle: Cov = sigma2 * N (N' X'X N)^-1 N' for any null basis N of the
  // ones row; use the LU kernel instead of Gram-Schmidt.
  Eigen::MatrixXd ones_row = Eigen::MatrixXd::Ones(1, J);
  Eigen::MatrixXd N = Eigen::FullPivLU<Eigen::MatrixXd>(ones_row).kernel();
  Eigen::MatrixXd inner = (N.transpose() * X.transpose() * X * N).inverse();
  Eigen::MatrixXd oracle = r.sigma2 * N * inner * N.transpose();
  CHECK((r.covariance - oracle).cwiseAbs().maxCoeff() < 1e-10);

  // The constraint direction carries no variance.
  CHECK((r.covariance * Eigen::VectorXd::Ones(J)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("equality solve rejects deficient inputs") {
  auto rng = make_rng(4);
  SUBCASE("duplicate columns are singular") {
    Eigen::MatrixXd X = random_design(6, 3, rng);
    X.col(2) = X.col(1);
    Eigen::VectorXd Y = random_distribution(6, rng);
    CHECK_THROWS_AS(solve_equality(Y, X, build_basis(3, ConstraintSpec{})), NumericError);
  }
  SUBCASE("fewer profiles than free parameters") {
    Eigen::MatrixXd X = random_design(2, 4, rng);
    Eigen::VectorXd Y = random_distribution(2, rng);
    CHECK_THROWS_AS(solve_equality(Y, X, build_basis(4, ConstraintSpec{})), NumericError);
  }
}

TEST_CASE("simplex solve leaves interior solutions alone") {
  auto rng = make_rng(5);
  Eigen::MatrixXd X = random_design(10, 3, rng);
  Eigen::VectorXd beta0(3);
  beta0 << 0.2, 0.5, 0.3;
  Eigen::VectorXd Y = X * beta0;
  SolveResult r = solve_simplex(Y, X);
  CHECK(r.iterations == 0);
  CHECK(r.active_zero_set.empty());
  for (int j = 0; j < 3; ++j)
    CHECK(r.beta[j] == doctest::Approx(beta0(j)).epsilon(1e-9));
  CHECK(r.objective < 1e-18);
}

TEST_CASE("coerced zeros are exact") {
  auto rng = make_rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd X = random_design(12, 4, rng);
    Eigen::VectorXd Y = random_distribution(12, rng);
    SolveResult r = solve_simplex(Y, X);
    for (int j : r.active_zero_set) CHECK(r.beta[j] == 0.0);
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) {
      CHECK(r.beta[j] >= 0.0);
      sum += r.beta[j];
    }
    CHECK(std::abs(sum - 1.0) < kConstraintTolerance);
  }
}

TEST_CASE("simplex solve matches the grid oracle") {
  auto rng = make_rng(7);
  int boundary_hits = 0;
  int solved = 0;
  for (int trial = 0; solved < 150 && trial < 600; ++trial) {
    int J = 2 + static_cast<int>(rng() % 3);
    int n = J + 4 + static_cast<int>(rng() % 8);
    Eigen::MatrixXd X = random_design(n, J, rng);
    Eigen::VectorXd Y = random_distribution(n, rng);
    SolveResult r;
    try {
      r = solve_simplex(Y, X);
    } catch (const NumericError&) {
      continue;  // deletion cascaded below 2 free causes; by contract an error
    }
    ++solved;
    double resolution = J <= 3 ? 1e-3 : 1e-2;
    Eigen::VectorXd grid = brute_force_simplex(Y, X, ConstraintSpec{}, resolution);
    double grid_objective = (Y - X * grid).squaredNorm();
    CHECK(r.objective <= grid_objective + 1e-6);
    if (!r.active_zero_set.empty()) boundary_hits++;
  }
  CHECK(solved == 150);
  // The instance mix genuinely exercises the deletion path.
  CHECK(boundary_hits > 10);
}

TEST_CASE("column permutation permutes the solution") {
  auto rng = make_rng(8);
  Eigen::MatrixXd X = random_design(10, 4, rng);
  Eigen::VectorXd Y = random_distribution(10, rng);
  SolveResult r = solve_simplex(Y, X);

  std::vector<int> perm = {2, 0, 3, 1};
  Eigen::MatrixXd Xp(10, 4);
  for (int j = 0; j < 4; ++j) Xp.col(j) = X.col(perm[j]);
  SolveResult rp = solve_simplex(Y, Xp);
  for (int j = 0; j < 4; ++j)
    CHECK(rp.beta[j] == doctest::Approx(r.beta[perm[j]]).epsilon(1e-9));
}

TEST_CASE("fixed causes are passed through and the rest still solve") {
  auto rng = make_rng(9);
  Eigen::MatrixXd X = random_design(12, 4, rng);
  Eigen::VectorXd beta0(4);
  beta0 << 0.2, 0.4, 0.3, 0.1;
  Eigen::VectorXd Y = X * beta0;
  ConstraintSpec spec = ConstraintSpec::with_fixed({{0, 0.2}});
  SolveResult r = solve_simplex(Y, X, spec);
  CHECK(r.beta[0] == 0.2);
  for (int j = 1; j < 4; ++j) CHECK(r.beta[j] == doctest::Approx(beta0(j)).epsilon(1e-8));

  // Against the grid with the same fixed cause.
  Eigen::VectorXd Y2 = random_distribution(12, rng);
  SolveResult r2 = solve_simplex(Y2, X, spec);
  Eigen::VectorXd grid = brute_force_simplex(Y2, X, spec, 1e-3);
  CHECK(r2.objective <= (Y2 - X * grid).squaredNorm() + 1e-6);
  CHECK(r2.beta[0] == 0.2);
}

TEST_CASE("constraint spec validation") {
  ConstraintSpec ok = ConstraintSpec::with_fixed({{1, 0.3}});
  CHECK(ok.total == doctest::Approx(0.7));
  CHECK_NOTHROW(ok.validate(4));
  CHECK_THROWS_AS(ok.validate(1), DataError);   // index out of range
  ConstraintSpec crowded = ConstraintSpec::with_fixed({{0, 0.2}, {1, 0.3}});
  CHECK_THROWS_AS(crowded.validate(3), DataError);  // < 2 free causes
  ConstraintSpec wrong;
  wrong.total = 0.5;  // claims 0.5 with nothing fixed
  CHECK_THROWS_AS(wrong.validate(3), DataError);
}

TEST_CASE("cascading deletion below two free causes throws") {
  auto rng = make_rng(10);
  Eigen::MatrixXd X = random_design(6, 2, rng);
  // Y forces beta = (1.5, -0.5): the negative column is deleted, leaving one.
  Eigen::VectorXd Y = 1.5 * X.col(0) - 0.5 * X.col(1);
  CHECK_THROWS_AS(solve_simplex(Y, X), NumericError);
}

TEST_CASE("grid oracle basics") {
  // Identity design: the grid minimizer is the projection of Y on the lattice.
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd Y(2);
  Y << 0.28, 0.72;
  Eigen::VectorXd g = brute_force_simplex(Y, X, ConstraintSpec{}, 0.1);
  CHECK(g(0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(g(1) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK_THROWS_AS(brute_force_simplex(Y, X, ConstraintSpec{}, 1e-12), DataError);
}
