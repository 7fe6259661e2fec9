#include "vacalc/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "vacalc/parallel.hpp"
#include "vacalc/rng.hpp"

namespace vacalc {

namespace {

SymptomSubset draw_subset(int K, int B, std::mt19937_64& rng) {
  std::vector<int> picked;
  picked.reserve(B);
  for (int j = K - B; j < K; ++j) {
    std::uniform_int_distribution<int> dist(0, j);
    int t = dist(rng);
    if (std::find(picked.begin(), picked.end(), t) == picked.end())
      picked.push_back(t);
    else
      picked.push_back(j);
  }
  std::sort(picked.begin(), picked.end());
  return SymptomSubset{std::move(picked)};
}

// Packs the subset symptoms; missing symptoms clear their mask bit.
void pack_with_mask(const SymptomRecord& rec, const SymptomSubset& s, std::uint64_t* bits,
                    std::uint64_t* mask) {
  *bits = 0;
  *mask = 0;
  for (int b = 0; b < s.size(); ++b) {
    Symptom v = rec.symptoms[s.indices[b]];
    if (v == Symptom::Missing) continue;
    *mask |= (std::uint64_t{1} << b);
    if (v == Symptom::Present) *bits |= (std::uint64_t{1} << b);
  }
}

}  // namespace

ConditionalLikelihood conditional_likelihood(const Dataset& hospital,
                                             const SymptomSubset& subset,
                                             double smoothing, bool joint_tabulation) {
  if (hospital.kind != DatasetKind::Labeled && !hospital.causes_hidden)
    throw DataError("conditional likelihood needs labeled data");
  if (!(smoothing >= 0.0)) throw DataError("smoothing pseudo-count must be nonnegative");
  const int J = hospital.cause_set.size();
  const int B = subset.size();

  std::vector<std::int64_t> n_by_cause(J, 0);
  for (const auto& r : hospital.records) n_by_cause[r.cause.value()]++;
  for (int j = 0; j < J; ++j)
    if (n_by_cause[j] == 0)
      throw DataError("cause '" + hospital.cause_set.label(j) + "' absent from hospital data");

  // Per-symptom Bernoulli conditionals, smoothed.
  std::vector<std::vector<double>> p_present(J, std::vector<double>(B));
  {
    std::vector<std::vector<std::int64_t>> present(J, std::vector<std::int64_t>(B, 0));
    std::vector<std::vector<std::int64_t>> seen(J, std::vector<std::int64_t>(B, 0));
    for (const auto& r : hospital.records) {
      int j = r.cause.value();
      for (int b = 0; b < B; ++b) {
        Symptom v = r.symptoms[subset.indices[b]];
        if (v == Symptom::Missing) continue;
        seen[j][b]++;
        if (v == Symptom::Present) present[j][b]++;
      }
    }
    for (int j = 0; j < J; ++j)
      for (int b = 0; b < B; ++b)
        p_present[j][b] = (present[j][b] + smoothing) / (seen[j][b] + 2.0 * smoothing);
  }

  std::uint64_t full_mask = B >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << B) - 1;

  // Joint tabulation over fully observed subset profiles.
  std::map<std::uint64_t, std::vector<std::int64_t>> joint;
  std::vector<std::int64_t> joint_n(J, 0);
  if (joint_tabulation) {
    for (const auto& r : hospital.records) {
      std::uint64_t bits, mask;
      pack_with_mask(r, subset, &bits, &mask);
      if (mask != full_mask) continue;
      auto it = joint.find(bits);
      if (it == joint.end()) it = joint.emplace(bits, std::vector<std::int64_t>(J, 0)).first;
      it->second[r.cause.value()]++;
      joint_n[r.cause.value()]++;
    }
  }
  double joint_cells = std::pow(2.0, B);

  ConditionalLikelihood cl;
  cl.subset = subset;
  cl.cause_count = J;
  cl.likelihood = [=](int j, std::uint64_t bits, std::uint64_t mask) -> double {
    if (joint_tabulation && mask == full_mask && joint_n[j] > 0) {
      auto it = joint.find(bits);
      std::int64_t count = it != joint.end() ? it->second[j] : 0;
      return (count + smoothing) / (joint_n[j] + smoothing * joint_cells);
    }
    // Product mode; records with missing symptoms always take this path.
    double lik = 1.0;
    for (int b = 0; b < B; ++b) {
      if (!(mask & (std::uint64_t{1} << b))) continue;
      bool present = bits & (std::uint64_t{1} << b);
      lik *= present ? p_present[j][b] : 1.0 - p_present[j][b];
    }
    return lik;
  };
  return cl;
}

std::vector<PosteriorRecord> classify(const Dataset& hospital, const Dataset& population,
                                      const SimplexVector& p_hat,
                                      const CommitteeConfig& cfg) {
  if (hospital.symptom_count != population.symptom_count)
    throw DataError("hospital and population disagree on K");
  const int J = hospital.cause_set.size();
  if (p_hat.size() != J) throw DataError("p_hat dimension does not match the cause set");
  if (cfg.n_members < 1) throw DataError("committee needs at least 1 member");
  int B = cfg.subset_size;
  if (B <= 0) B = hospital.symptom_count >= 18 ? 16 : std::max(1, hospital.symptom_count / 2);
  if (B >= hospital.symptom_count) throw DataError("subset size must satisfy 1 <= B < K");

  const int n = population.size();
  // Per-member slots, reduced serially in member order afterwards, so the
  // result is identical at any thread count.
  std::vector<std::vector<std::vector<double>>> member_posteriors(cfg.n_members);

  parallel_for(cfg.n_members, cfg.threads, [&](int m) {
    auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(m));
    SymptomSubset subset = draw_subset(hospital.symptom_count, B, rng);
    ConditionalLikelihood cl =
        conditional_likelihood(hospital, subset, cfg.smoothing, cfg.joint_tabulation);

    std::vector<std::vector<double>> local(n);
    for (int i = 0; i < n; ++i) {
      std::uint64_t bits, mask;
      pack_with_mask(population.records[i], subset, &bits, &mask);
      std::vector<double> numerator(J);
      double mixture = 0.0;  // the profile marginal as the same mixture
      for (int j = 0; j < J; ++j) {
        numerator[j] = cl.likelihood(j, bits, mask) * p_hat[j];
        mixture += numerator[j];
      }
      if (mixture <= 0.0) continue;  // this member has no support for the record
      for (double& v : numerator) v /= mixture;
      local[i] = std::move(numerator);
    }
    member_posteriors[m] = std::move(local);
  });

  std::vector<std::vector<double>> accumulated(n, std::vector<double>(J, 0.0));
  std::vector<int> member_hits(n, 0);
  for (int m = 0; m < cfg.n_members; ++m) {
    for (int i = 0; i < n; ++i) {
      if (member_posteriors[m][i].empty()) continue;
      for (int j = 0; j < J; ++j) accumulated[i][j] += member_posteriors[m][i][j];
      member_hits[i]++;
    }
  }

  std::vector<PosteriorRecord> posteriors(n);
  for (int i = 0; i < n; ++i) {
    posteriors[i].record_index = i;
    if (member_hits[i] == 0) {
      posteriors[i].posterior = p_hat.values();
      posteriors[i].fallback = true;
    } else {
      posteriors[i].posterior.resize(J);
      for (int j = 0; j < J; ++j) posteriors[i].posterior[j] = accumulated[i][j] / member_hits[i];
    }
  }

  if (cfg.rescale_to_target) {
    // Multiplicative per-cause reweighting until the record-averaged
    // posterior matches p_hat.
    std::vector<double> weight(J, 1.0);
    for (int it = 0; it < cfg.rescale_max_iterations; ++it) {
      std::vector<double> mean(J, 0.0);
      for (int i = 0; i < n; ++i) {
        double norm = 0.0;
        for (int j = 0; j < J; ++j) norm += weight[j] * posteriors[i].posterior[j];
        for (int j = 0; j < J; ++j) mean[j] += weight[j] * posteriors[i].posterior[j] / norm;
      }
      double worst = 0.0;
      for (int j = 0; j < J; ++j) {
        mean[j] /= n;
        worst = std::max(worst, std::abs(mean[j] - p_hat[j]));
      }
      if (worst < cfg.rescale_tolerance) break;
      for (int j = 0; j < J; ++j)
        if (mean[j] > 0.0) weight[j] *= p_hat[j] / mean[j];
    }
    for (int i = 0; i < n; ++i) {
      double norm = 0.0;
      for (int j = 0; j < J; ++j) {
        posteriors[i].posterior[j] *= weight[j];
        norm += posteriors[i].posterior[j];
      }
      for (int j = 0; j < J; ++j) posteriors[i].posterior[j] /= norm;
    }
  }

  for (auto& p : posteriors) {
    int best = 0;
    for (int j = 1; j < J; ++j)
      if (p.posterior[j] > p.posterior[best]) best = j;
    p.map_cause = best;
  }
  return posteriors;
}

void write_posteriors(const std::vector<PosteriorRecord>& posteriors, const CauseSet& causes,
                      std::ostream& out, char delimiter) {
  out << "record";
  for (int j = 0; j < causes.size(); ++j) out << delimiter << "p_" << causes.label(j);
  out << delimiter << "map_cause" << delimiter << "fallback\n";
  for (const auto& p : posteriors) {
    out << p.record_index;
    for (double v : p.posterior) out << delimiter << v;
    out << delimiter << causes.label(p.map_cause) << delimiter << (p.fallback ? 1 : 0) << "\n";
  }
}

}  // namespace vacalc
