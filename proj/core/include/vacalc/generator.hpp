#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vacalc/dataset.hpp"

namespace vacalc {

/// Synthetic two-sample generator: causes from each sample's P(D), symptoms
/// independent Bernoulli given cause, shared conditionals up to an optional
/// violation of magnitude epsilon on the population side.
struct GeneratorSpec {
  int cause_count = 5;    // J
  int symptom_count = 20;  // K
  int n_hospital = 3000;
  int n_population = 3000;
  std::vector<double> hospital_pd;
  std::vector<double> population_pd;
  std::vector<std::vector<double>> conditionals;  // J x K, P(S_k = 1 | D = j)
  double missing_rate = 0.0;
  double violation = 0.0;  // epsilon perturbation of population conditionals
  int site_count = 1;      // > 1 stamps site tags with per-site perturbations
  double site_violation = 0.0;
  std::vector<std::string> cause_labels;  // optional; default cause1..causeJ

  void validate() const;
  // Random conditionals in [lo, hi] plus the spec's marginals; convenience
  // for simulation setups.
  static GeneratorSpec random(int J, int K, int n_hospital, int n_population,
                              std::uint64_t seed, double lo = 0.1, double hi = 0.9);
  static GeneratorSpec from_config(const std::string& path);
};

/// Hospital (labeled) and population (unlabeled, hidden truth) samples.
std::pair<Dataset, Dataset> generate(const GeneratorSpec& spec, std::uint64_t seed);

/// Deterministic in-sample mixture: the population replicates hospital
/// records per cause so its profile distribution is exactly the hospital
/// conditionals mixed at new_weights. Used to exercise exact recovery.
Dataset resample_population_exact(const Dataset& hospital, const SimplexVector& new_weights,
                                  int copies_scale = 1);

}  // namespace vacalc
