#include "vacalc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "vacalc/rng.hpp"

namespace vacalc {

CauseSet::CauseSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) throw DataError("cause set needs at least 2 causes");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw DataError("empty cause label");
    if (!seen.insert(l).second) throw DataError("duplicate cause label: " + l);
  }
}

int CauseSet::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
}

void Dataset::validate() const {
  for (const auto& r : records) {
    if (static_cast<int>(r.symptoms.size()) != symptom_count)
      throw DataError("record symptom vector length does not match dataset K");
    if (r.cause && (*r.cause < 0 || *r.cause >= cause_set.size()))
      throw DataError("record cause index out of range");
    if (kind == DatasetKind::Labeled && !r.cause)
      throw DataError("labeled dataset contains a record without a cause");
    if (kind == DatasetKind::Unlabeled && r.cause && !causes_hidden)
      throw DataError("unlabeled dataset contains a cause label (use validation mode)");
  }
  if (!sites.empty() && sites.size() != records.size())
    throw DataError("site tags do not match record count");
}

SymptomSubset SymptomSubset::checked(std::vector<int> indices, int symptom_count) {
  std::sort(indices.begin(), indices.end());
  if (indices.empty() || static_cast<int>(indices.size()) >= symptom_count)
    throw DataError("subset size must satisfy 1 <= B < K");
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= symptom_count)
      throw DataError("subset index out of range");
    if (i > 0 && indices[i] == indices[i - 1]) throw DataError("duplicate subset index");
  }
  return SymptomSubset{std::move(indices)};
}

SimplexVector::SimplexVector(std::vector<double> values) : values_(std::move(values)) {
  double sum = 0.0;
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("simplex entry outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance)
    throw DataError("simplex entries do not sum to 1");
}

std::pair<Dataset, Dataset> split_random(const Dataset& d, double fraction,
                                         std::uint64_t seed) {
  if (d.kind != DatasetKind::Labeled) throw DataError("split_random requires a labeled dataset");
  if (!(fraction > 0.0 && fraction < 1.0)) throw DataError("fraction must be in (0, 1)");
  int n = d.size();
  // The shuffle is cut at lround(min(p, 1-p) * n); which side of the cut plays
  // hospital depends on the fraction, so p and 1-p yield mirrored partitions.
  double small = std::min(fraction, 1.0 - fraction);
  int cut = static_cast<int>(std::lround(small * n));
  int n_hospital = fraction <= 0.5 ? cut : n - cut;
  if (n_hospital == 0 || n_hospital == n) throw DataError("fraction leaves one half empty");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::set<int> first_half;
  if (fraction <= 0.5)
    first_half.insert(order.begin(), order.begin() + cut);
  else
    first_half.insert(order.begin() + cut, order.end());

  Dataset hospital;
  hospital.kind = DatasetKind::Labeled;
  hospital.symptom_count = d.symptom_count;
  hospital.cause_set = d.cause_set;
  hospital.symptom_names = d.symptom_names;

  Dataset population;
  population.kind = DatasetKind::Unlabeled;
  population.symptom_count = d.symptom_count;
  population.cause_set = d.cause_set;
  population.symptom_names = d.symptom_names;
  population.causes_hidden = true;

  for (int i = 0; i < n; ++i) {
    bool in_first = first_half.count(i) > 0;
    Dataset& target = in_first ? hospital : population;
    target.records.push_back(d.records[i]);
    if (!d.sites.empty()) target.sites.push_back(d.sites[i]);
  }
  return {std::move(hospital), std::move(population)};
}

SimplexVector empirical_cause_distribution(const Dataset& d) {
  if (d.records.empty()) throw DataError("empty dataset");
  int J = d.cause_set.size();
  std::vector<std::int64_t> counts(J, 0);
  for (const auto& r : d.records) {
    if (!r.cause) throw DataError("record without a cause label");
    counts[*r.cause]++;
  }
  // Exact rational arithmetic by counts keeps the simplex invariant tight.
  std::vector<double> p(J);
  double n = static_cast<double>(d.size());
  for (int j = 0; j < J; ++j) p[j] = counts[j] / n;
  double sum = std::accumulate(p.begin(), p.end(), 0.0);
  p[J - 1] += 1.0 - sum;
  if (p[J - 1] < 0.0) p[J - 1] = 0.0;
  return SimplexVector(p);
}

}  // namespace vacalc
