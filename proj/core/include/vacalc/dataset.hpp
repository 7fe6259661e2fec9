#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vacalc/errors.hpp"

namespace vacalc {

enum class Symptom : std::uint8_t { Absent = 0, Present = 1, Missing = 2 };

/// The ordered set of J cause-of-death labels shared by a dataset.
class CauseSet {
 public:
  CauseSet() = default;
  explicit CauseSet(std::vector<std::string> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& label(int j) const { return labels_.at(j); }
  const std::vector<std::string>& labels() const { return labels_; }

  // Index of a label, or -1 if unknown.
  int index_of(const std::string& label) const;

  bool operator==(const CauseSet&) const = default;

 private:
  std::vector<std::string> labels_;
};

/// One death: K ternary symptom indicators plus an optional cause index.
struct SymptomRecord {
  std::vector<Symptom> symptoms;
  std::optional<int> cause;
};

enum class DatasetKind { Labeled, Unlabeled };

/// Immutable after construction; safe to share across threads.
struct Dataset {
  DatasetKind kind = DatasetKind::Labeled;
  int symptom_count = 0;  // K
  CauseSet cause_set;
  std::vector<std::string> symptom_names;
  std::vector<SymptomRecord> records;
  // Validation-mode datasets keep their causes but mark them hidden so the
  // harness can score without re-joining files.
  bool causes_hidden = false;
  // Optional per-record site tags (cross-site validation); empty if unused.
  std::vector<int> sites;

  int size() const { return static_cast<int>(records.size()); }
  void validate() const;
};

/// Ordered list of B distinct symptom indices in [0, K).
struct SymptomSubset {
  std::vector<int> indices;  // strictly increasing

  int size() const { return static_cast<int>(indices.size()); }
  static SymptomSubset checked(std::vector<int> indices, int symptom_count);
};

/// J nonnegative proportions summing to 1 (within 1e-10).
class SimplexVector {
 public:
  SimplexVector() = default;
  // Throws DataError if the invariants do not hold.
  explicit SimplexVector(std::vector<double> values);

  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int j) const { return values_.at(j); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

constexpr double kSimplexTolerance = 1e-10;

/// Deterministic disjoint partition into a labeled "hospital" half and a
/// "population" half whose causes are marked hidden.
std::pair<Dataset, Dataset> split_random(const Dataset& d, double fraction,
                                         std::uint64_t seed);

/// Proportion of records dying from each cause, counted exactly.
SimplexVector empirical_cause_distribution(const Dataset& d);

}  // namespace vacalc
