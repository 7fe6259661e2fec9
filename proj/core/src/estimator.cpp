#include "vacalc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <ostream>

#include "vacalc/density.hpp"
#include "vacalc/parallel.hpp"
#include "vacalc/rng.hpp"

namespace vacalc {

namespace {

SymptomSubset draw_subset(int K, int B, std::mt19937_64& rng) {
  // Floyd's algorithm: B distinct indices, uniform without replacement.
  std::vector<int> picked;
  picked.reserve(B);
  for (int j = K - B; j < K; ++j) {
    std::uniform_int_distribution<int> dist(0, j);
    int t = dist(rng);
    if (std::find(picked.begin(), picked.end(), t) == picked.end())
      picked.push_back(t);
    else
      picked.push_back(j);
  }
  std::sort(picked.begin(), picked.end());
  return SymptomSubset{std::move(picked)};
}

Dataset resample(const Dataset& d, std::mt19937_64& rng) {
  Dataset out = d;
  out.records.clear();
  out.sites.clear();
  std::uniform_int_distribution<int> dist(0, d.size() - 1);
  for (int i = 0; i < d.size(); ++i) {
    int pick = dist(rng);
    out.records.push_back(d.records[pick]);
    if (!d.sites.empty()) out.sites.push_back(d.sites[pick]);
  }
  return out;
}

struct PointResult {
  std::vector<double> point;
  SkipStats skipped;
  int retained = 0;
  std::vector<std::vector<double>> subset_estimates;
};

// One full pass of the subset-averaging pipeline. Subset draws are keyed to
// (seed, stream_salt + draw index), never to data order, so shuffling records
// or changing thread counts cannot move them.
PointResult point_estimate(const Dataset& hospital, const Dataset& population,
                           const EstimatorConfig& cfg, int B,
                           std::uint64_t stream_salt, bool keep_estimates) {
  const int J = hospital.cause_set.size();
  const int min_profiles = cfg.min_profiles > 0 ? cfg.min_profiles : J + 1;

  std::vector<SymptomSubset> subsets(cfg.n_subsets);
  for (int i = 0; i < cfg.n_subsets; ++i) {
    auto rng = make_rng(cfg.seed, stream_salt + static_cast<std::uint64_t>(i));
    subsets[i] = draw_subset(hospital.symptom_count, B, rng);
  }

  enum class Outcome { Ok, RankRisky, Singular, Degenerate };
  std::vector<Outcome> outcomes(cfg.n_subsets, Outcome::RankRisky);
  std::vector<std::vector<double>> betas(cfg.n_subsets);

  ConstraintSpec spec = ConstraintSpec::with_fixed(cfg.fixed);
  parallel_for(cfg.n_subsets, cfg.threads, [&](int i) {
    ProfileTable table = align(tabulate_marginal(population, subsets[i]),
                               tabulate_conditional(hospital, subsets[i], hospital.cause_set));
    if (table.rank_risky || table.profile_count() < min_profiles) {
      outcomes[i] = Outcome::RankRisky;
      return;
    }
    Eigen::VectorXd Y = Eigen::Map<const Eigen::VectorXd>(table.y.data(), table.y.size());
    Eigen::MatrixXd X(table.profile_count(), J);
    for (int r = 0; r < table.profile_count(); ++r)
      for (int j = 0; j < J; ++j) X(r, j) = table.x[r][j];
    try {
      SolveResult solved = solve_simplex(Y, X, spec);
      betas[i] = solved.beta.values();
      outcomes[i] = Outcome::Ok;
    } catch (const NumericError& e) {
      outcomes[i] = std::string(e.what()).find("degenerate") != std::string::npos
                        ? Outcome::Degenerate
                        : Outcome::Singular;
    }
  });

  PointResult result;
  std::vector<double> sum(J, 0.0);
  double weight_sum = 0.0;
  for (int i = 0; i < cfg.n_subsets; ++i) {
    switch (outcomes[i]) {
      case Outcome::RankRisky: result.skipped.rank_risky++; continue;
      case Outcome::Singular: result.skipped.singular++; continue;
      case Outcome::Degenerate: result.skipped.degenerate++; continue;
      case Outcome::Ok: break;
    }
    double w = cfg.weights.empty() ? 1.0 : cfg.weights[i];
    for (int j = 0; j < J; ++j) sum[j] += w * betas[i][j];
    weight_sum += w;
    result.retained++;
    if (keep_estimates) result.subset_estimates.push_back(betas[i]);
  }
  if (result.retained == 0) throw NumericError("all subset draws were skipped; lower B");
  if (result.skipped.total() * 2 > cfg.n_subsets)
    throw NumericError("more than half the subset draws were skipped; lower B or raise n");

  if (!(weight_sum > 0.0)) throw NumericError("retained subsets carry zero total weight");
  double total = 0.0;
  for (double v : sum) total += v;
  result.point.resize(J);
  for (int j = 0; j < J; ++j) result.point[j] = sum[j] / total;
  return result;
}

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  double pos = q * (values.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  size_t hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - lo;
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

int EstimatorConfig::resolved_subset_size(int symptom_count) const {
  if (subset_size > 0) return subset_size;
  return symptom_count >= 18 ? 16 : std::max(1, symptom_count / 2);
}

void EstimatorConfig::validate(int symptom_count) const {
  int B = resolved_subset_size(symptom_count);
  if (B < 1 || B >= symptom_count) throw DataError("subset size must satisfy 1 <= B < K");
  if (n_subsets < 1) throw DataError("n_subsets must be at least 1");
  if (!weights.empty() && static_cast<int>(weights.size()) != n_subsets)
    throw DataError("weights length must equal n_subsets");
  for (double w : weights)
    if (!(w >= 0.0)) throw DataError("subset weights must be nonnegative");
  if (n_bootstrap != 0 && n_bootstrap < 50)
    throw DataError("n_bootstrap must be 0 or at least 50 for percentile intervals");
}

EstimateReport estimate(const Dataset& hospital, const Dataset& population,
                        const EstimatorConfig& cfg) {
  if (hospital.kind != DatasetKind::Labeled) throw DataError("hospital dataset must be labeled");
  if (hospital.symptom_count != population.symptom_count)
    throw DataError("hospital and population disagree on K");
  cfg.validate(hospital.symptom_count);

  const int J = hospital.cause_set.size();
  std::vector<int> present(J, 0);
  for (const auto& r : hospital.records) present[r.cause.value()] = 1;
  for (int j = 0; j < J; ++j)
    if (!present[j])
      throw DataError("cause '" + hospital.cause_set.label(j) + "' absent from hospital data");

  const int B = cfg.resolved_subset_size(hospital.symptom_count);
  PointResult point = point_estimate(hospital, population, cfg, B, 0,
                                     cfg.keep_subset_estimates);

  EstimateReport report;
  report.config = cfg;
  report.subset_size_used = B;
  report.point = SimplexVector(point.point);
  report.skipped = point.skipped;
  report.retained_subsets = point.retained;
  report.subset_estimates = std::move(point.subset_estimates);

  if (cfg.n_bootstrap > 0) {
    if (cfg.n_bootstrap < 200)
      std::cerr << "warning: fewer than 200 bootstrap replicates; percentile "
                   "intervals may be unstable\n";
    std::vector<std::vector<double>> replicates(cfg.n_bootstrap);
    std::vector<char> failed(cfg.n_bootstrap, 0);

    EstimatorConfig replicate_cfg = cfg;
    replicate_cfg.threads = 1;
    parallel_for(cfg.n_bootstrap, cfg.threads, [&](int r) {
      auto rng = make_rng(cfg.seed, 0x8000000000000000ull + static_cast<std::uint64_t>(r));
      Dataset h = resample(hospital, rng);
      Dataset p = resample(population, rng);
      try {
        std::uint64_t salt = static_cast<std::uint64_t>(r + 1) * 1000003ull;
        replicates[r] = point_estimate(h, p, replicate_cfg, B, salt, false).point;
      } catch (const Error&) {
        failed[r] = 1;
      }
    });

    int failures = std::accumulate(failed.begin(), failed.end(), 0);
    report.bootstrap_failures = failures;
    if (failures * 5 > cfg.n_bootstrap)
      throw NumericError("bootstrap replicate failure rate exceeds 20%");

    report.ci_lower.resize(J);
    report.ci_upper.resize(J);
    report.bootstrap_se.resize(J);
    for (int j = 0; j < J; ++j) {
      std::vector<double> values;
      values.reserve(cfg.n_bootstrap);
      for (int r = 0; r < cfg.n_bootstrap; ++r)
        if (!failed[r]) values.push_back(replicates[r][j]);
      double lo = percentile(values, 0.025);
      double hi = percentile(values, 0.975);
      // Percentile intervals widened, if needed, to contain the point.
      report.ci_lower[j] = std::min(lo, report.point[j]);
      report.ci_upper[j] = std::max(hi, report.point[j]);
      double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      report.bootstrap_se[j] = values.size() > 1 ? std::sqrt(var / (values.size() - 1)) : 0.0;
    }
  }
  return report;
}

BSelection select_B(const Dataset& hospital, const std::vector<int>& candidates,
                    int folds, std::uint64_t seed, const EstimatorConfig& base) {
  if (candidates.empty()) throw DataError("no candidate subset sizes");
  if (folds < 1) throw DataError("folds must be at least 1");
  for (int B : candidates)
    if (B < 1 || B >= hospital.symptom_count)
      throw DataError("candidate B out of range [1, K)");

  std::vector<int> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  BSelection selection;
  selection.chosen = -1;
  double best_score = std::numeric_limits<double>::infinity();

  for (int B : sorted) {
    std::vector<double> fold_errors;
    for (int f = 0; f < folds; ++f) {
      auto [pseudo_h, pseudo_p] = split_random(hospital, 0.5, seed + 7919ull * f);
      EstimatorConfig cfg = base;
      cfg.subset_size = B;
      cfg.n_bootstrap = 0;
      cfg.seed = seed + 104729ull * (f + 1);
      try {
        EstimateReport rep = estimate(pseudo_h, pseudo_p, cfg);
        SimplexVector truth = empirical_cause_distribution(pseudo_p);
        double mae = 0.0;
        for (int j = 0; j < truth.size(); ++j) mae += std::abs(rep.point[j] - truth[j]);
        fold_errors.push_back(mae / truth.size());
      } catch (const Error&) {
        // infeasible on this fold
      }
    }
    BSelectionRow row{B, std::numeric_limits<double>::quiet_NaN(), 0.0,
                      static_cast<int>(fold_errors.size())};
    if (!fold_errors.empty()) {
      double mean = std::accumulate(fold_errors.begin(), fold_errors.end(), 0.0) /
                    fold_errors.size();
      double var = 0.0;
      for (double e : fold_errors) var += (e - mean) * (e - mean);
      row.mean_abs_error = mean;
      row.fold_sd = fold_errors.size() > 1 ? std::sqrt(var / (fold_errors.size() - 1)) : 0.0;
      if (mean < best_score) {  // ties keep the smaller B
        best_score = mean;
        selection.chosen = B;
      }
    }
    selection.scores.push_back(row);
  }
  if (selection.chosen < 0)
    throw NumericError("every candidate subset size was infeasible on every fold");
  return selection;
}

void write_estimate_report(const EstimateReport& report, const CauseSet& causes,
                           std::ostream& out) {
  out << "subset_size = " << report.subset_size_used << "\n";
  out << "n_subsets = " << report.config.n_subsets << "\n";
  out << "n_bootstrap = " << report.config.n_bootstrap << "\n";
  out << "seed = " << report.config.seed << "\n";
  out << "retained_subsets = " << report.retained_subsets << "\n";
  out << "skipped_rank_risky = " << report.skipped.rank_risky << "\n";
  out << "skipped_singular = " << report.skipped.singular << "\n";
  out << "skipped_degenerate = " << report.skipped.degenerate << "\n";
  out << "bootstrap_failures = " << report.bootstrap_failures << "\n";
  out << "\n";
  bool has_ci = !report.ci_lower.empty();
  out << "cause\tpoint";
  if (has_ci) out << "\tci_lower\tci_upper\tbootstrap_se";
  out << "\n";
  for (int j = 0; j < report.point.size(); ++j) {
    out << causes.label(j) << "\t" << fmt(report.point[j]);
    if (has_ci)
      out << "\t" << fmt(report.ci_lower[j]) << "\t" << fmt(report.ci_upper[j]) << "\t"
          << fmt(report.bootstrap_se[j]);
    out << "\n";
  }
}

void write_estimate_table(const EstimateReport& report, const CauseSet& causes,
                          std::ostream& out, char delimiter) {
  bool has_ci = !report.ci_lower.empty();
  out << "cause" << delimiter << "point";
  if (has_ci) out << delimiter << "ci_lower" << delimiter << "ci_upper";
  out << "\n";
  for (int j = 0; j < report.point.size(); ++j) {
    out << causes.label(j) << delimiter << fmt(report.point[j]);
    if (has_ci)
      out << delimiter << fmt(report.ci_lower[j]) << delimiter << fmt(report.ci_upper[j]);
    out << "\n";
  }
}

}  // namespace vacalc
