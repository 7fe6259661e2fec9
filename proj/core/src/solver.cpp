#include "vacalc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vacalc {

void ConstraintSpec::validate(int J) const {
  if (!(total > 0.0 && total <= 1.0)) throw DataError("constraint total must be in (0, 1]");
  double fixed_sum = 0.0;
  for (const auto& [idx, value] : fixed) {
    if (idx < 0 || idx >= J) throw DataError("fixed cause index out of range");
    if (!(value >= 0.0 && value < 1.0)) throw DataError("fixed proportion must be in [0, 1)");
    fixed_sum += value;
  }
  if (std::abs(total - (1.0 - fixed_sum)) > 1e-8)
    throw DataError("constraint total must equal 1 minus the fixed proportions");
  if (static_cast<int>(fixed.size()) > J - 2)
    throw DataError("at least 2 causes must remain free");
}

ConstraintSpec ConstraintSpec::with_fixed(std::map<int, double> fixed) {
  ConstraintSpec spec;
  spec.fixed = std::move(fixed);
  double fixed_sum = 0.0;
  for (const auto& [idx, value] : spec.fixed) fixed_sum += value;
  spec.total = 1.0 - fixed_sum;
  return spec;
}

ReparamBasis build_basis(int J, const ConstraintSpec& spec) {
  if (J < 2) throw DataError("build_basis requires J >= 2");
  double c = spec.total;
  if (!(c > 0.0 && c <= 1.0)) throw DataError("constraint total must be in (0, 1]");

  ReparamBasis basis;
  basis.C = Eigen::RowVectorXd::Constant(J, 1.0 / c);

  // Gram-Schmidt of the standard basis against the constraint direction;
  // rows of A come out orthonormal and orthogonal to C.
  Eigen::RowVectorXd u0 = basis.C / basis.C.norm();
  basis.A.resize(J - 1, J);
  int rows = 0;
  for (int k = 0; k < J && rows < J - 1; ++k) {
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(J);
    v(k) = 1.0;
    v -= (v.dot(u0)) * u0;
    for (int r = 0; r < rows; ++r) v -= (v.dot(basis.A.row(r))) * basis.A.row(r);
    double norm = v.norm();
    if (norm < 1e-8) continue;
    basis.A.row(rows++) = v / norm;
  }
  if (rows != J - 1) throw NumericError("Gram-Schmidt failed to produce J-1 rows");

  basis.G.resize(J, J);
  basis.G.row(0) = basis.C;
  basis.G.bottomRows(J - 1) = basis.A;

  // G has orthogonal rows, so G^-1 = G^T diag(1/|C|^2, 1, ..., 1).
  basis.G_inv = basis.G.transpose();
  basis.G_inv.col(0) /= basis.C.squaredNorm();
  return basis;
}

EqualityResult solve_equality(const Eigen::VectorXd& Y, const Eigen::MatrixXd& X,
                              const ReparamBasis& basis) {
  const int n = static_cast<int>(X.rows());
  const int J = static_cast<int>(X.cols());
  if (basis.G.rows() != J) throw DataError("basis dimension does not match X");
  if (n < J - 1) throw NumericError("fewer profiles than free parameters");

  // X = (W, Z) G with G row-orthogonal, so (W, Z) = X G^-1.
  Eigen::MatrixXd WZ = X * basis.G_inv;
  Eigen::VectorXd W = WZ.col(0);
  Eigen::MatrixXd Z = WZ.rightCols(J - 1);

  Eigen::MatrixXd M = Z.transpose() * Z;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
  double lo = eig.eigenvalues().minCoeff();
  double hi = eig.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || lo / hi < kRcondThreshold)
    throw NumericError("singular system: Z'Z is rank deficient");

  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  Eigen::VectorXd gamma = ldlt.solve(Z.transpose() * (Y - W));

  Eigen::VectorXd residual = Y - W - Z * gamma;
  int dof = n - (J - 1);
  double sigma2 = dof > 0 ? residual.squaredNorm() / dof : 0.0;

  Eigen::VectorXd gamma_star(J);
  gamma_star(0) = 1.0;
  gamma_star.tail(J - 1) = gamma;

  EqualityResult result;
  result.beta = basis.G_inv * gamma_star;
  result.sigma2 = sigma2;

  // Cov(beta) = G^-1 Cov(gamma*) G^-T with Cov(gamma*) zero in the first
  // row/column (gamma*_0 is the constant 1).
  Eigen::MatrixXd cov_gamma = sigma2 * ldlt.solve(Eigen::MatrixXd::Identity(J - 1, J - 1));
  Eigen::MatrixXd Ginv_rest = basis.G_inv.rightCols(J - 1);
  result.covariance = Ginv_rest * cov_gamma * Ginv_rest.transpose();
  return result;
}

namespace {

constexpr double kNegativeTolerance = 1e-12;

}  // namespace

SolveResult solve_simplex(const Eigen::VectorXd& Y, const Eigen::MatrixXd& X,
                          const ConstraintSpec& spec) {
  const int J = static_cast<int>(X.cols());
  spec.validate(J);

  // Fixed causes leave the regression; their contribution moves to the left
  // side and they are re-inserted at the end.
  Eigen::VectorXd Y_adj = Y;
  std::vector<int> free_indices;
  for (int j = 0; j < J; ++j) {
    auto it = spec.fixed.find(j);
    if (it != spec.fixed.end())
      Y_adj -= it->second * X.col(j);
    else
      free_indices.push_back(j);
  }

  std::vector<int> active = free_indices;  // ascending original indices
  std::vector<int> zero_set;
  int iterations = 0;
  EqualityResult eq;

  for (;;) {
    if (static_cast<int>(active.size()) < 2)
      throw NumericError("degenerate solution: fewer than 2 free causes remain");
    Eigen::MatrixXd X_active(X.rows(), active.size());
    for (size_t a = 0; a < active.size(); ++a) X_active.col(a) = X.col(active[a]);

    ReparamBasis basis = build_basis(static_cast<int>(active.size()), spec);
    eq = solve_equality(Y_adj, X_active, basis);

    // Most significantly negative coefficient leaves; zero standard errors
    // rank as infinitely significant. Ties break to the lower cause index.
    int worst = -1;
    double worst_t = -1.0;
    for (size_t a = 0; a < active.size(); ++a) {
      if (eq.beta(a) >= -kNegativeTolerance) continue;
      double se = std::sqrt(std::max(eq.covariance(a, a), 0.0));
      double t = se > 0.0 ? std::abs(eq.beta(a)) / se : std::numeric_limits<double>::infinity();
      if (t > worst_t) {
        worst_t = t;
        worst = static_cast<int>(a);
      }
    }
    if (worst < 0) break;
    zero_set.push_back(active[worst]);
    active.erase(active.begin() + worst);
    ++iterations;
  }

  std::sort(zero_set.begin(), zero_set.end());

  std::vector<double> beta_full(J, 0.0);
  for (const auto& [idx, value] : spec.fixed) beta_full[idx] = value;
  for (size_t a = 0; a < active.size(); ++a)
    beta_full[active[a]] = std::clamp(eq.beta(a), 0.0, 1.0);

  SolveResult result;
  result.active_zero_set = zero_set;
  result.iterations = iterations;

  result.covariance = Eigen::MatrixXd::Zero(J, J);
  for (size_t a = 0; a < active.size(); ++a)
    for (size_t b = 0; b < active.size(); ++b)
      result.covariance(active[a], active[b]) = eq.covariance(a, b);

  Eigen::Map<const Eigen::VectorXd> beta_vec(beta_full.data(), J);
  result.objective = (Y - X * beta_vec).squaredNorm();
  result.beta = SimplexVector(beta_full);
  return result;
}

Eigen::VectorXd brute_force_simplex(const Eigen::VectorXd& Y, const Eigen::MatrixXd& X,
                                    const ConstraintSpec& spec, double resolution,
                                    std::int64_t cell_limit) {
  const int J = static_cast<int>(X.cols());
  spec.validate(J);
  if (!(resolution > 0.0)) throw DataError("resolution must be positive");

  Eigen::VectorXd Y_adj = Y;
  std::vector<int> free_indices;
  for (int j = 0; j < J; ++j) {
    auto it = spec.fixed.find(j);
    if (it != spec.fixed.end())
      Y_adj -= it->second * X.col(j);
    else
      free_indices.push_back(j);
  }
  const int F = static_cast<int>(free_indices.size());
  const std::int64_t steps_wide = std::max<std::int64_t>(1, std::llround(spec.total / resolution));
  if (steps_wide > cell_limit) throw DataError("grid too large for this J/resolution");
  const int steps = static_cast<int>(steps_wide);

  // Lattice size C(steps + F - 1, F - 1); refuse absurd grids.
  double cells = 1.0;
  for (int i = 1; i < F; ++i) cells *= static_cast<double>(steps + i) / i;
  if (cells > static_cast<double>(cell_limit))
    throw DataError("grid too large for this J/resolution");

  Eigen::MatrixXd X_free(X.rows(), F);
  for (int a = 0; a < F; ++a) X_free.col(a) = X.col(free_indices[a]);
  Eigen::MatrixXd XtX = X_free.transpose() * X_free;
  Eigen::VectorXd Xty = X_free.transpose() * Y_adj;
  const double step = spec.total / steps;

  std::vector<int> counts(F, 0);
  std::vector<int> best_counts(F, 0);
  double best = std::numeric_limits<double>::infinity();

  // Enumerate compositions of `steps` into F parts.
  auto recurse = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == F - 1) {
      counts[pos] = remaining;
      Eigen::VectorXd b(F);
      for (int a = 0; a < F; ++a) b(a) = counts[a] * step;
      double objective = b.dot(XtX * b) - 2.0 * b.dot(Xty);
      if (objective < best) {
        best = objective;
        best_counts = counts;
      }
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      counts[pos] = k;
      self(self, pos + 1, remaining - k);
    }
  };
  recurse(recurse, 0, steps);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(J);
  for (const auto& [idx, value] : spec.fixed) beta(idx) = value;
  for (int a = 0; a < F; ++a) beta(free_indices[a]) = best_counts[a] * step;
  return beta;
}

}  // namespace vacalc
