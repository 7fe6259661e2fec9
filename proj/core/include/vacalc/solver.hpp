#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "vacalc/dataset.hpp"

namespace vacalc {

/// Sum constraint on the free coefficients, with optional causes fixed at
/// known proportions from another source.
struct ConstraintSpec {
  double total = 1.0;                 // c = 1 - sum of fixed values
  std::map<int, double> fixed;        // cause index -> known proportion

  void validate(int J) const;
  static ConstraintSpec with_fixed(std::map<int, double> fixed);
};

/// Row-orthogonal reparameterization of the sum constraint: first row C is
/// the constraint normal scaled to C*beta = 1, rows of A are orthonormal and
/// orthogonal to C.
struct ReparamBasis {
  Eigen::RowVectorXd C;  // 1 x J, entries 1/c
  Eigen::MatrixXd A;     // (J-1) x J
  Eigen::MatrixXd G;     // J x J stacked (C; A)
  Eigen::MatrixXd G_inv;
};

struct SolveResult {
  SimplexVector beta;                  // scaled to sum 1 with fixed causes inserted
  std::vector<int> active_zero_set;    // causes coerced to zero, ascending
  Eigen::MatrixXd covariance;          // J x J, Cov(beta_hat)
  int iterations = 0;                  // deletion steps taken
  double objective = 0.0;              // ||Y - X beta||^2 at the solution
};

ReparamBasis build_basis(int J, const ConstraintSpec& spec);

/// Equality-constrained least squares min ||Y - X beta||^2 s.t. sum(beta) = c.
/// beta may be negative. Throws NumericError on a singular system
/// (reciprocal condition of Z'Z below 1e-12).
struct EqualityResult {
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;
  double sigma2 = 0.0;
};
EqualityResult solve_equality(const Eigen::VectorXd& Y, const Eigen::MatrixXd& X,
                              const ReparamBasis& basis);

/// Full simplex solve: equality-constrained reparameterization plus stepwise
/// deletion of the most significantly negative coefficient.
SolveResult solve_simplex(const Eigen::VectorXd& Y, const Eigen::MatrixXd& X,
                          const ConstraintSpec& spec = ConstraintSpec{});

/// Grid-search minimizer over the rational simplex lattice; verification
/// oracle only. Throws DataError when the lattice would exceed cell_limit.
Eigen::VectorXd brute_force_simplex(const Eigen::VectorXd& Y, const Eigen::MatrixXd& X,
                                    const ConstraintSpec& spec, double resolution,
                                    std::int64_t cell_limit = 500'000'000);

constexpr double kConstraintTolerance = 1e-10;
constexpr double kRcondThreshold = 1e-12;

}  // namespace vacalc
