#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "vacalc/dataset.hpp"

namespace vacalc {

// A symptom subprofile over a subset of B symptoms, packed little-endian:
// bit b set <=> subset symptom b present. B <= 63.
using ProfileBits = std::uint64_t;

std::string profile_to_string(ProfileBits bits, int subset_size);

/// Marginal tabulation of P(S_I(B)) from one dataset. Records with any
/// missing value among the subset symptoms are dropped (listwise within
/// subset).
struct MarginalTable {
  SymptomSubset subset;
  std::vector<ProfileBits> profiles;  // sorted ascending, distinct
  std::vector<double> frequencies;    // count / usable_count
  std::vector<std::int64_t> counts;
  std::int64_t usable_count = 0;
};

/// Per-cause conditional tabulation of P(S_I(B) | D = j) from labeled data.
struct ConditionalTable {
  SymptomSubset subset;
  std::vector<ProfileBits> profiles;                  // union support, sorted
  std::vector<std::vector<double>> frequencies;       // [profile][cause]
  std::vector<std::vector<std::int64_t>> counts;      // [profile][cause]
  std::vector<std::int64_t> usable_by_cause;          // usable records per cause
  // Causes with zero usable records after deletion; columns are undefined.
  std::vector<int> empty_causes;
};

/// Aligned regression inputs: Y (population marginal over the retained
/// profile set, renormalized) and X (hospital conditionals evaluated on that
/// set, zero where unobserved).
struct ProfileTable {
  SymptomSubset subset;
  std::vector<ProfileBits> profiles;             // retained = population support
  std::vector<double> y;                         // length n, sums to 1
  std::vector<std::vector<double>> x;            // n rows, J columns
  std::vector<std::int64_t> y_counts;
  std::vector<std::vector<std::int64_t>> x_counts;
  std::int64_t population_usable = 0;
  std::vector<std::int64_t> hospital_usable_by_cause;
  // Retained profile count below J, a cause without usable records, or all
  // zero hospital columns: the estimator skips this draw.
  bool rank_risky = false;

  int profile_count() const { return static_cast<int>(profiles.size()); }
  int cause_count() const { return x.empty() ? 0 : static_cast<int>(x[0].size()); }
};

MarginalTable tabulate_marginal(const Dataset& d, const SymptomSubset& s);

ConditionalTable tabulate_conditional(const Dataset& d, const SymptomSubset& s,
                                      const CauseSet& cause_set);

ProfileTable align(const MarginalTable& marginal, const ConditionalTable& conditional);

void dump_profile_table(const ProfileTable& t, std::ostream& out, char delimiter = '\t');

}  // namespace vacalc
