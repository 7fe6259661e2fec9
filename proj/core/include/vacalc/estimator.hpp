#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vacalc/dataset.hpp"
#include "vacalc/solver.hpp"

namespace vacalc {

struct EstimatorConfig {
  int subset_size = 0;        // B; 0 = default (16 when K >= 18, else K/2)
  int n_subsets = 300;
  std::uint64_t seed = 0;
  int n_bootstrap = 0;        // 0 = point estimate only
  int min_profiles = 0;       // minimum retained profiles per subset; 0 = J+1
  std::map<int, double> fixed;  // cause index -> known proportion
  std::vector<double> weights;  // optional per-subset prior weights
  int threads = 1;
  bool keep_subset_estimates = false;

  int resolved_subset_size(int symptom_count) const;
  void validate(int symptom_count) const;
};

struct SkipStats {
  int rank_risky = 0;
  int singular = 0;
  int degenerate = 0;
  int total() const { return rank_risky + singular + degenerate; }
};

struct EstimateReport {
  SimplexVector point;
  std::vector<double> ci_lower;  // empty unless bootstrap run
  std::vector<double> ci_upper;
  std::vector<double> bootstrap_se;
  std::vector<std::vector<double>> subset_estimates;  // retained per-draw beta
  SkipStats skipped;
  int retained_subsets = 0;
  int bootstrap_failures = 0;
  EstimatorConfig config;
  int subset_size_used = 0;
};

/// Headline P(D) estimator: draw subsets, tabulate, align, solve on the
/// simplex, average; percentile bootstrap over the whole pipeline for CIs.
EstimateReport estimate(const Dataset& hospital, const Dataset& population,
                        const EstimatorConfig& cfg);

struct BSelectionRow {
  int subset_size;
  double mean_abs_error;
  double fold_sd;
  int feasible_folds;
};
struct BSelection {
  int chosen;
  std::vector<BSelectionRow> scores;
};

/// Cross-validates the subset size on hospital data alone by repeatedly
/// splitting it into pseudo-hospital and pseudo-population folds.
BSelection select_B(const Dataset& hospital, const std::vector<int>& candidates,
                    int folds, std::uint64_t seed, const EstimatorConfig& base = {});

void write_estimate_report(const EstimateReport& report, const CauseSet& causes,
                           std::ostream& out);
void write_estimate_table(const EstimateReport& report, const CauseSet& causes,
                          std::ostream& out, char delimiter = ',');

}  // namespace vacalc
