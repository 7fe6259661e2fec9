#include "vacalc/density.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <string>

namespace vacalc {

namespace {

// Packs the subset symptoms of a record; returns false when any is missing.
bool pack_profile(const SymptomRecord& rec, const SymptomSubset& s, ProfileBits* out) {
  ProfileBits bits = 0;
  for (int b = 0; b < s.size(); ++b) {
    Symptom v = rec.symptoms[s.indices[b]];
    if (v == Symptom::Missing) return false;
    if (v == Symptom::Present) bits |= (ProfileBits{1} << b);
  }
  *out = bits;
  return true;
}

void check_subset(const Dataset& d, const SymptomSubset& s) {
  if (s.size() < 1 || s.size() >= d.symptom_count)
    throw DataError("subset size must satisfy 1 <= B < K");
  if (s.size() > 63) throw DataError("subset size exceeds 63 symptoms");
  for (int idx : s.indices)
    if (idx < 0 || idx >= d.symptom_count) throw DataError("subset index out of range");
}

}  // namespace

std::string profile_to_string(ProfileBits bits, int subset_size) {
  std::string out(subset_size, '0');
  for (int b = 0; b < subset_size; ++b)
    if (bits & (ProfileBits{1} << b)) out[b] = '1';
  return out;
}

MarginalTable tabulate_marginal(const Dataset& d, const SymptomSubset& s) {
  check_subset(d, s);
  std::map<ProfileBits, std::int64_t> counts;
  std::int64_t usable = 0;
  for (const auto& rec : d.records) {
    ProfileBits bits;
    if (!pack_profile(rec, s, &bits)) continue;
    counts[bits]++;
    usable++;
  }
  if (usable == 0) throw DataError("no usable records in subset after listwise deletion");

  MarginalTable t;
  t.subset = s;
  t.usable_count = usable;
  for (const auto& [bits, c] : counts) {
    t.profiles.push_back(bits);
    t.counts.push_back(c);
    t.frequencies.push_back(static_cast<double>(c) / static_cast<double>(usable));
  }
  return t;
}

ConditionalTable tabulate_conditional(const Dataset& d, const SymptomSubset& s,
                                      const CauseSet& cause_set) {
  check_subset(d, s);
  if (d.kind != DatasetKind::Labeled && !d.causes_hidden)
    throw DataError("conditional tabulation needs labeled data");
  int J = cause_set.size();

  std::map<ProfileBits, std::vector<std::int64_t>> counts;
  std::vector<std::int64_t> usable(J, 0);
  for (const auto& rec : d.records) {
    if (!rec.cause) throw DataError("record without a cause label");
    ProfileBits bits;
    if (!pack_profile(rec, s, &bits)) continue;
    auto it = counts.find(bits);
    if (it == counts.end()) it = counts.emplace(bits, std::vector<std::int64_t>(J, 0)).first;
    it->second[*rec.cause]++;
    usable[*rec.cause]++;
  }

  ConditionalTable t;
  t.subset = s;
  t.usable_by_cause = usable;
  for (int j = 0; j < J; ++j)
    if (usable[j] == 0) t.empty_causes.push_back(j);
  for (const auto& [bits, per_cause] : counts) {
    t.profiles.push_back(bits);
    t.counts.push_back(per_cause);
    std::vector<double> freq(J, 0.0);
    for (int j = 0; j < J; ++j)
      if (usable[j] > 0) freq[j] = static_cast<double>(per_cause[j]) / static_cast<double>(usable[j]);
    t.frequencies.push_back(std::move(freq));
  }
  return t;
}

ProfileTable align(const MarginalTable& marginal, const ConditionalTable& conditional) {
  if (marginal.subset.indices != conditional.subset.indices)
    throw DataError("align: tables built on different subsets");
  int J = static_cast<int>(conditional.usable_by_cause.size());

  ProfileTable t;
  t.subset = marginal.subset;
  t.population_usable = marginal.usable_count;
  t.hospital_usable_by_cause = conditional.usable_by_cause;

  // Retained set = population support; hospital columns are evaluated there
  // and are zero for profiles the hospital never shows.
  double y_mass = 0.0;
  for (size_t i = 0; i < marginal.profiles.size(); ++i) {
    t.profiles.push_back(marginal.profiles[i]);
    t.y_counts.push_back(marginal.counts[i]);
    t.y.push_back(marginal.frequencies[i]);
    y_mass += marginal.frequencies[i];

    auto it = std::lower_bound(conditional.profiles.begin(), conditional.profiles.end(),
                               marginal.profiles[i]);
    if (it != conditional.profiles.end() && *it == marginal.profiles[i]) {
      size_t h = static_cast<size_t>(it - conditional.profiles.begin());
      t.x.push_back(conditional.frequencies[h]);
      t.x_counts.push_back(conditional.counts[h]);
    } else {
      t.x.push_back(std::vector<double>(J, 0.0));
      t.x_counts.push_back(std::vector<std::int64_t>(J, 0));
    }
  }
  // Renormalize y over the retained set so it stays a distribution.
  if (y_mass > 0.0)
    for (auto& v : t.y) v /= y_mass;

  bool any_x = false;
  for (const auto& row : t.x)
    for (double v : row)
      if (v != 0.0) any_x = true;
  t.rank_risky = t.profile_count() < J || !conditional.empty_causes.empty() || !any_x;
  return t;
}

void dump_profile_table(const ProfileTable& t, std::ostream& out, char delimiter) {
  out << "profile" << delimiter << "y" << delimiter << "y_count";
  for (int j = 0; j < t.cause_count(); ++j)
    out << delimiter << "x" << j + 1 << delimiter << "x" << j + 1 << "_count";
  out << "\n";
  for (int i = 0; i < t.profile_count(); ++i) {
    out << profile_to_string(t.profiles[i], t.subset.size()) << delimiter << t.y[i]
        << delimiter << t.y_counts[i];
    for (int j = 0; j < t.cause_count(); ++j)
      out << delimiter << t.x[i][j] << delimiter << t.x_counts[i][j];
    out << "\n";
  }
}

}  // namespace vacalc
