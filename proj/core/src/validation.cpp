#include "vacalc/validation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace vacalc {

namespace {

constexpr double kZ95 = 1.959963984540054;

}  // namespace

ValidationReport score_against_truth(const EstimateReport& estimate_report,
                                     const Dataset& truth_population,
                                     const CauseSet& causes) {
  SimplexVector truth = empirical_cause_distribution(truth_population);
  const int J = causes.size();
  const double n = static_cast<double>(truth_population.size());
  const bool has_ci = !estimate_report.ci_lower.empty();

  ValidationReport report;
  report.estimate_report = estimate_report;
  double covered = 0.0, zero_covered = 0.0;
  for (int j = 0; j < J; ++j) {
    ValidationCause row;
    row.cause = causes.label(j);
    row.truth = truth[j];
    row.truth_se = std::sqrt(truth[j] * (1.0 - truth[j]) / n);
    row.estimate = estimate_report.point[j];
    row.difference = row.estimate - row.truth;
    if (has_ci) {
      row.ci_lower = estimate_report.ci_lower[j];
      row.ci_upper = estimate_report.ci_upper[j];
      row.ci_covers_truth = row.truth >= row.ci_lower && row.truth <= row.ci_upper;
      // Both sides are measured with error: the difference CI combines the
      // bootstrap SE with the binomial SE of the direct estimate.
      double se_boot = estimate_report.bootstrap_se.empty() ? 0.0
                                                            : estimate_report.bootstrap_se[j];
      double se_diff = std::sqrt(se_boot * se_boot + row.truth_se * row.truth_se);
      row.difference_lower = row.difference - kZ95 * se_diff;
      row.difference_upper = row.difference + kZ95 * se_diff;
      row.difference_covers_zero =
          row.difference_lower <= 0.0 && 0.0 <= row.difference_upper;
      covered += row.ci_covers_truth ? 1.0 : 0.0;
      zero_covered += row.difference_covers_zero ? 1.0 : 0.0;
      report.mean_ci_width += (row.ci_upper - row.ci_lower) / J;
    }
    report.mean_direct_ci_width += 2.0 * kZ95 * row.truth_se / J;
    report.mean_abs_error += std::abs(row.difference) / J;
    report.max_abs_error = std::max(report.max_abs_error, std::abs(row.difference));
    report.causes.push_back(row);
  }
  if (has_ci) report.coverage_rate = covered / J;
  report.small_population_warning = truth_population.size() < 30 * J;
  return report;
}

ValidationReport run_split_validation(const Dataset& d, const EstimatorConfig& cfg,
                                      double fraction, std::uint64_t seed) {
  auto [hospital, population] = split_random(d, fraction, seed);
  EstimateReport est = estimate(hospital, population, cfg);
  return score_against_truth(est, population, d.cause_set);
}

ValidationReport run_site_validation(const Dataset& d, const EstimatorConfig& cfg,
                                     int holdout_site) {
  if (d.sites.empty()) throw DataError("dataset has no site tags");
  Dataset hospital = d, population = d;
  hospital.records.clear();
  hospital.sites.clear();
  population.records.clear();
  population.sites.clear();
  population.kind = DatasetKind::Unlabeled;
  population.causes_hidden = true;
  for (int i = 0; i < d.size(); ++i) {
    bool held_out = d.sites[i] == holdout_site;
    Dataset& target = held_out ? population : hospital;
    target.records.push_back(d.records[i]);
    target.sites.push_back(d.sites[i]);
  }
  if (hospital.records.empty() || population.records.empty())
    throw DataError("holdout site leaves one side empty");
  EstimateReport est = estimate(hospital, population, cfg);
  return score_against_truth(est, population, d.cause_set);
}

ClassifierExperiment run_classifier_experiment(const GeneratorSpec& spec,
                                               const CommitteeConfig& committee,
                                               const EstimatorConfig& estimator_cfg,
                                               std::uint64_t seed) {
  auto [hospital, population] = generate(spec, seed);
  const int J = hospital.cause_set.size();

  EstimatorConfig est_cfg = estimator_cfg;
  est_cfg.n_bootstrap = 0;
  EstimateReport est = estimate(hospital, population, est_cfg);
  SimplexVector hospital_prior = empirical_cause_distribution(hospital);

  auto accuracy = [&](const std::vector<PosteriorRecord>& posteriors) {
    int correct = 0;
    for (const auto& p : posteriors)
      if (p.map_cause == population.records[p.record_index].cause.value()) correct++;
    return static_cast<double>(correct) / population.size();
  };
  auto aggregate = [&](const std::vector<PosteriorRecord>& posteriors) {
    std::vector<double> mean(J, 0.0);
    for (const auto& p : posteriors)
      for (int j = 0; j < J; ++j) mean[j] += p.posterior[j] / population.size();
    return mean;
  };

  auto with_estimated = classify(hospital, population, est.point, committee);
  // Hospital-prior run keeps its aggregate at the hospital prior: the
  // joint-distribution-assuming baseline.
  CommitteeConfig hospital_committee = committee;
  auto with_hospital = classify(hospital, population, hospital_prior, hospital_committee);

  ClassifierExperiment e;
  e.accuracy_estimated_prior = accuracy(with_estimated);
  e.accuracy_hospital_prior = accuracy(with_hospital);
  e.truth_pd = empirical_cause_distribution(population).values();
  e.estimated_pd = est.point.values();
  e.hospital_pd = hospital_prior.values();
  e.aggregate_estimated = aggregate(with_estimated);
  e.aggregate_hospital = aggregate(with_hospital);
  e.cause_labels = hospital.cause_set.labels();
  return e;
}

void write_validation_report(const ValidationReport& report, std::ostream& out,
                             char delimiter) {
  out << "cause" << delimiter << "truth" << delimiter << "estimate" << delimiter
      << "ci_lower" << delimiter << "ci_upper" << delimiter << "difference" << delimiter
      << "diff_ci_lower" << delimiter << "diff_ci_upper" << delimiter << "covers_zero"
      << delimiter << "covers_truth\n";
  for (const auto& row : report.causes) {
    out << row.cause << delimiter << row.truth << delimiter << row.estimate << delimiter
        << row.ci_lower << delimiter << row.ci_upper << delimiter << row.difference
        << delimiter << row.difference_lower << delimiter << row.difference_upper
        << delimiter << (row.difference_covers_zero ? 1 : 0) << delimiter
        << (row.ci_covers_truth ? 1 : 0) << "\n";
  }
  out << "# mean_abs_error" << delimiter << report.mean_abs_error << "\n";
  out << "# max_abs_error" << delimiter << report.max_abs_error << "\n";
  out << "# coverage_rate" << delimiter << report.coverage_rate << "\n";
  out << "# mean_ci_width" << delimiter << report.mean_ci_width << "\n";
  out << "# mean_direct_ci_width" << delimiter << report.mean_direct_ci_width << "\n";
  if (report.small_population_warning)
    out << "# warning" << delimiter << "small population half; intervals are wide\n";
}

void write_classifier_experiment(const ClassifierExperiment& e, std::ostream& out,
                                 char delimiter) {
  out << "accuracy_estimated_prior" << delimiter << e.accuracy_estimated_prior << "\n";
  out << "accuracy_hospital_prior" << delimiter << e.accuracy_hospital_prior << "\n";
  out << "cause" << delimiter << "truth" << delimiter << "estimated_pd" << delimiter
      << "hospital_pd" << delimiter << "aggregate_estimated" << delimiter
      << "aggregate_hospital\n";
  for (size_t j = 0; j < e.cause_labels.size(); ++j) {
    out << e.cause_labels[j] << delimiter << e.truth_pd[j] << delimiter << e.estimated_pd[j]
        << delimiter << e.hospital_pd[j] << delimiter << e.aggregate_estimated[j]
        << delimiter << e.aggregate_hospital[j] << "\n";
  }
}

}  // namespace vacalc
