#include "vacalc/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "vacalc/rng.hpp"

namespace vacalc {

PredictorFamily reference_predictor_family(double smoothing) {
  return [smoothing](const Dataset& training, int target_cause) {
    const int K = training.symptom_count;
    std::int64_t n_target = 0, n_rest = 0;
    // Per-symptom present counts among non-missing cells, target vs rest.
    std::vector<std::int64_t> present_target(K, 0), seen_target(K, 0);
    std::vector<std::int64_t> present_rest(K, 0), seen_rest(K, 0);
    for (const auto& r : training.records) {
      bool is_target = r.cause.value() == target_cause;
      (is_target ? n_target : n_rest)++;
      for (int k = 0; k < K; ++k) {
        if (r.symptoms[k] == Symptom::Missing) continue;
        auto& seen = is_target ? seen_target : seen_rest;
        auto& present = is_target ? present_target : present_rest;
        seen[k]++;
        if (r.symptoms[k] == Symptom::Present) present[k]++;
      }
    }
    if (n_target == 0) throw DataError("target cause absent from training data");

    std::vector<double> p_target(K), p_rest(K);
    for (int k = 0; k < K; ++k) {
      p_target[k] = (present_target[k] + smoothing) / (seen_target[k] + 2.0 * smoothing);
      p_rest[k] = (present_rest[k] + smoothing) / (seen_rest[k] + 2.0 * smoothing);
    }
    double log_prior_target = std::log(static_cast<double>(n_target));
    double log_prior_rest = std::log(static_cast<double>(std::max<std::int64_t>(n_rest, 1)));

    DichotomousPredictor pred;
    pred.target_cause = target_cause;
    pred.predict = [=](const SymptomRecord& rec) {
      double score_target = log_prior_target, score_rest = log_prior_rest;
      for (int k = 0; k < K; ++k) {
        if (rec.symptoms[k] == Symptom::Missing) continue;
        bool present = rec.symptoms[k] == Symptom::Present;
        score_target += std::log(present ? p_target[k] : 1.0 - p_target[k]);
        score_rest += std::log(present ? p_rest[k] : 1.0 - p_rest[k]);
      }
      // Posterior > 0.5 <=> target score exceeds the rest score.
      return score_target > score_rest;
    };
    return pred;
  };
}

std::int64_t ConfusionSummary::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

ConfusionSummary ConfusionSummary::from_counts(std::int64_t tp, std::int64_t fn,
                                               std::int64_t fp, std::int64_t tn) {
  ConfusionSummary c;
  c.counts[1][1] = tp;
  c.counts[1][0] = fn;
  c.counts[0][1] = fp;
  c.counts[0][0] = tn;
  c.sensitivity = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  c.specificity = fp + tn > 0 ? static_cast<double>(tn) / (fp + tn) : 0.0;
  return c;
}

double crude_prevalence(const DichotomousPredictor& pred, const Dataset& population) {
  if (population.records.empty()) throw DataError("empty population dataset");
  std::int64_t hits = 0;
  for (const auto& r : population.records)
    if (pred.predict(r)) hits++;
  return static_cast<double>(hits) / population.size();
}

ConfusionSummary cv_confusion(const PredictorFamily& family, const Dataset& hospital,
                              int target_cause, int folds, std::uint64_t seed) {
  if (folds < 2) throw DataError("cross-validation needs at least 2 folds");
  if (hospital.kind != DatasetKind::Labeled) throw DataError("cv_confusion needs labeled data");
  const int n = hospital.size();
  if (folds > n) throw DataError("more folds than records");

  // Stratified fold assignment: shuffle within each cause, deal round-robin.
  std::vector<int> fold_of(n, -1);
  auto rng = make_rng(seed);
  for (int j = 0; j < hospital.cause_set.size(); ++j) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (hospital.records[i].cause.value() == j) members.push_back(i);
    std::shuffle(members.begin(), members.end(), rng);
    for (size_t m = 0; m < members.size(); ++m)
      fold_of[members[m]] = static_cast<int>(m % folds);
  }

  std::int64_t tp = 0, fn = 0, fp = 0, tn = 0;
  for (int f = 0; f < folds; ++f) {
    Dataset training = hospital;
    training.records.clear();
    training.sites.clear();
    for (int i = 0; i < n; ++i)
      if (fold_of[i] != f) training.records.push_back(hospital.records[i]);
    bool has_target = std::any_of(training.records.begin(), training.records.end(),
                                  [&](const auto& r) { return r.cause.value() == target_cause; });
    if (!has_target) throw DataError("a training fold has no target-cause examples");

    DichotomousPredictor pred = family(training, target_cause);
    for (int i = 0; i < n; ++i) {
      if (fold_of[i] != f) continue;
      bool actual = hospital.records[i].cause.value() == target_cause;
      bool predicted = pred.predict(hospital.records[i]);
      if (actual && predicted) tp++;
      else if (actual) fn++;
      else if (predicted) fp++;
      else tn++;
    }
  }
  return ConfusionSummary::from_counts(tp, fn, fp, tn);
}

BackCalculation back_calculate(double crude, const ConfusionSummary& conf) {
  double denominator = conf.sensitivity - (1.0 - conf.specificity);
  if (std::abs(denominator) < 1e-9)
    throw NumericError("back-calculation denominator is degenerate (sens + spec = 1)");
  BackCalculation result;
  result.estimate = (crude - (1.0 - conf.specificity)) / denominator;
  result.impossible = result.estimate < 0.0 || result.estimate > 1.0;
  return result;
}

Eigen::Vector2d back_calculate_matrix(const Eigen::Vector2d& crude,
                                      const Eigen::Matrix2d& confusion) {
  for (int col = 0; col < 2; ++col) {
    double sum = confusion.col(col).sum();
    if (confusion.col(col).minCoeff() < 0.0 || std::abs(sum - 1.0) > 1e-8)
      throw DataError("confusion columns must be conditional distributions");
  }
  if (std::abs(confusion.determinant()) < 1e-9)
    throw NumericError("singular confusion matrix");
  // Square full-rank system: the least-squares solution is the exact solve.
  return confusion.colPivHouseholderQr().solve(crude);
}

double specificity_consistency_gap(const std::vector<double>& misclassification,
                                   const SimplexVector& hospital_pd,
                                   const SimplexVector& population_pd,
                                   int target_cause) {
  const int J = hospital_pd.size();
  if (static_cast<int>(misclassification.size()) != J || population_pd.size() != J)
    throw DataError("dimension mismatch in specificity gap inputs");
  if (target_cause < 0 || target_cause >= J) throw DataError("target cause out of range");

  double composite_h = 1.0 - hospital_pd[target_cause];
  double composite_p = 1.0 - population_pd[target_cause];
  if (composite_h <= 0.0 || composite_p <= 0.0)
    throw DataError("composite (not-target) category has zero mass");

  double lhs = 0.0, rhs = 0.0;
  for (int j = 0; j < J; ++j) {
    if (j == target_cause) continue;
    lhs += misclassification[j] * population_pd[j] / composite_p;
    rhs += misclassification[j] * hospital_pd[j] / composite_h;
  }
  return std::abs(lhs - rhs);
}

BaselineReport run_baseline(const PredictorFamily& family, const Dataset& hospital,
                            const Dataset& population, int folds, std::uint64_t seed) {
  BaselineReport report;
  for (int j = 0; j < hospital.cause_set.size(); ++j) {
    ConfusionSummary conf = cv_confusion(family, hospital, j, folds, seed);
    DichotomousPredictor pred = family(hospital, j);
    double crude = crude_prevalence(pred, population);
    BaselineRow row;
    row.cause = hospital.cause_set.label(j);
    row.crude = crude;
    row.sensitivity = conf.sensitivity;
    row.specificity = conf.specificity;
    try {
      BackCalculation bc = back_calculate(crude, conf);
      row.corrected = bc.estimate;
      row.impossible = bc.impossible;
    } catch (const NumericError&) {
      row.corrected = std::numeric_limits<double>::quiet_NaN();
      row.impossible = true;
    }
    if (std::isfinite(row.corrected)) report.estimate_sum += row.corrected;
    report.rows.push_back(row);
  }
  return report;
}

void write_baseline_report(const BaselineReport& report, std::ostream& out, char delimiter) {
  out << "cause" << delimiter << "crude" << delimiter << "sensitivity" << delimiter
      << "specificity" << delimiter << "corrected" << delimiter << "impossible\n";
  for (const auto& row : report.rows) {
    out << row.cause << delimiter << row.crude << delimiter << row.sensitivity << delimiter
        << row.specificity << delimiter << row.corrected << delimiter
        << (row.impossible ? 1 : 0) << "\n";
  }
  out << "# sum_of_estimates" << delimiter << report.estimate_sum << "\n";
}

}  // namespace vacalc
