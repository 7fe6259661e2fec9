#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "vacalc/dataset.hpp"

namespace vacalc {

struct PosteriorRecord {
  int record_index = 0;
  std::vector<double> posterior;  // on the simplex
  int map_cause = 0;              // argmax, ties to the lowest index
  bool fallback = false;          // no member had hospital support for this record
};

struct CommitteeConfig {
  int subset_size = 0;    // 0 = same default rule as the estimator
  int n_members = 50;
  std::uint64_t seed = 0;
  double smoothing = 0.5;       // additive pseudo-count for the conditionals
  bool joint_tabulation = false;  // joint profile counts instead of the product
  // Aggregate posteriors are rescaled to match the target P(D) estimate.
  bool rescale_to_target = true;
  double rescale_tolerance = 1e-8;
  int rescale_max_iterations = 500;
  int threads = 1;
};

/// Per-cause likelihood of a packed subset profile, with additive smoothing.
/// Product of per-symptom Bernoulli conditionals by default; joint tabulation
/// when requested.
struct ConditionalLikelihood {
  SymptomSubset subset;
  int cause_count = 0;
  // likelihood(j, bits, active_mask): mask restricts to non-missing symptoms.
  std::function<double(int, std::uint64_t, std::uint64_t)> likelihood;
};

ConditionalLikelihood conditional_likelihood(const Dataset& hospital,
                                             const SymptomSubset& subset,
                                             double smoothing,
                                             bool joint_tabulation = false);

/// Bayes committee classification with the aggregate constrained to p_hat.
std::vector<PosteriorRecord> classify(const Dataset& hospital, const Dataset& population,
                                      const SimplexVector& p_hat,
                                      const CommitteeConfig& cfg);

void write_posteriors(const std::vector<PosteriorRecord>& posteriors,
                      const CauseSet& causes, std::ostream& out, char delimiter = ',');

}  // namespace vacalc
