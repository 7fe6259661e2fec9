#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vacalc/classifier.hpp"
#include "vacalc/dataset.hpp"
#include "vacalc/estimator.hpp"
#include "vacalc/generator.hpp"

namespace vacalc {

struct ValidationCause {
  std::string cause;
  double truth = 0.0;       // direct sample estimate on the held-out half
  double truth_se = 0.0;    // binomial SE of the direct estimate
  double estimate = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double difference = 0.0;          // estimate - truth
  double difference_lower = 0.0;    // 95% CI of the difference
  double difference_upper = 0.0;
  bool difference_covers_zero = false;
  bool ci_covers_truth = false;
};

struct ValidationReport {
  std::vector<ValidationCause> causes;
  double mean_abs_error = 0.0;
  double max_abs_error = 0.0;
  double coverage_rate = 0.0;        // fraction of causes whose CI covers truth
  double mean_ci_width = 0.0;        // bootstrap CI width, averaged
  double mean_direct_ci_width = 0.0; // 2 * 1.96 * binomial SE, averaged
  bool small_population_warning = false;
  EstimateReport estimate_report;
};

ValidationReport score_against_truth(const EstimateReport& estimate_report,
                                     const Dataset& truth_population,
                                     const CauseSet& causes);

/// Random-split protocol: split labeled data, estimate on the hidden half,
/// score against its direct sample estimate.
ValidationReport run_split_validation(const Dataset& d, const EstimatorConfig& cfg,
                                      double fraction, std::uint64_t seed);

/// Cross-site protocol: site tags below `holdout_site` train, the rest play
/// population.
ValidationReport run_site_validation(const Dataset& d, const EstimatorConfig& cfg,
                                     int holdout_site);

struct ClassifierExperiment {
  double accuracy_estimated_prior = 0.0;  // committee with the estimated p_hat
  double accuracy_hospital_prior = 0.0;   // same committee, hospital prior
  std::vector<double> truth_pd;
  std::vector<double> estimated_pd;
  std::vector<double> hospital_pd;
  // Aggregate mean posterior per cause under each prior (Fig.-style payload).
  std::vector<double> aggregate_estimated;
  std::vector<double> aggregate_hospital;
  std::vector<std::string> cause_labels;
};

/// Generates data from the spec, estimates P(D), and compares the committee
/// classifier under the estimated prior vs the hospital prior.
ClassifierExperiment run_classifier_experiment(const GeneratorSpec& spec,
                                               const CommitteeConfig& committee,
                                               const EstimatorConfig& estimator_cfg,
                                               std::uint64_t seed);

void write_validation_report(const ValidationReport& report, std::ostream& out,
                             char delimiter = ',');
void write_classifier_experiment(const ClassifierExperiment& e, std::ostream& out,
                                 char delimiter = ',');

}  // namespace vacalc
