#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "vacalc/dataset.hpp"

namespace vacalc {

/// A dichotomous target-vs-rest predictor. The factory fits on a training
/// dataset and returns a total function over records.
struct DichotomousPredictor {
  int target_cause = 0;
  std::function<bool(const SymptomRecord&)> predict;  // true = target
};
using PredictorFamily =
    std::function<DichotomousPredictor(const Dataset& training, int target_cause)>;

/// Reference predictor: per-symptom conditional-independence scorer with the
/// hospital prior, thresholded at posterior 0.5. Missing symptoms are skipped.
PredictorFamily reference_predictor_family(double smoothing = 0.5);

struct ConfusionSummary {
  double sensitivity = 0.0;  // P(pred target | target)
  double specificity = 0.0;  // P(pred not-target | not-target)
  // counts[actual is target][predicted is target]
  std::int64_t counts[2][2] = {{0, 0}, {0, 0}};

  std::int64_t total() const;
  static ConfusionSummary from_counts(std::int64_t tp, std::int64_t fn, std::int64_t fp,
                                      std::int64_t tn);
};

double crude_prevalence(const DichotomousPredictor& pred, const Dataset& population);

/// Out-of-fold 2x2 table from stratified cross-validation on hospital data.
ConfusionSummary cv_confusion(const PredictorFamily& family, const Dataset& hospital,
                              int target_cause, int folds, std::uint64_t seed);

struct BackCalculation {
  double estimate = 0.0;
  // Outside [0, 1]: returned unclamped, flagged as evidence the transport
  // assumption failed.
  bool impossible = false;
};

/// Classical correction (crude - (1 - spec)) / (sens - (1 - spec)).
BackCalculation back_calculate(double crude, const ConfusionSummary& conf);

/// Least-squares solve of the 2x2 matrix form; first element agrees with the
/// scalar correction to 1e-12.
Eigen::Vector2d back_calculate_matrix(const Eigen::Vector2d& crude,
                                      const Eigen::Matrix2d& confusion);

/// |LHS - RHS| of the composite-specificity transport condition: sums of
/// per-cause misclassification rates weighted by cause prevalence relative to
/// the composite (D != target) mass, hospital vs population.
double specificity_consistency_gap(const std::vector<double>& misclassification,
                                   const SimplexVector& hospital_pd,
                                   const SimplexVector& population_pd,
                                   int target_cause = 0);

struct BaselineRow {
  std::string cause;
  double crude = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double corrected = 0.0;
  bool impossible = false;
};
struct BaselineReport {
  std::vector<BaselineRow> rows;
  double estimate_sum = 0.0;  // generally != 1; reported, never renormalized
};

/// Runs the full current-practice pipeline for every cause.
BaselineReport run_baseline(const PredictorFamily& family, const Dataset& hospital,
                            const Dataset& population, int folds, std::uint64_t seed);

void write_baseline_report(const BaselineReport& report, std::ostream& out,
                           char delimiter = ',');

}  // namespace vacalc
