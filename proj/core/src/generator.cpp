#include "vacalc/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "vacalc/io.hpp"
#include "vacalc/rng.hpp"

namespace vacalc {

namespace {

void check_pd(const std::vector<double>& pd, int J, const char* name) {
  if (static_cast<int>(pd.size()) != J)
    throw DataError(std::string(name) + " length does not match cause count");
  double sum = 0.0;
  for (double v : pd) {
    if (!(v >= 0.0 && v <= 1.0)) throw DataError(std::string(name) + " entry outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-8) throw DataError(std::string(name) + " does not sum to 1");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
  return values;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (cause_count < 2) throw DataError("generator needs at least 2 causes");
  if (symptom_count < 2) throw DataError("generator needs at least 2 symptoms");
  if (n_hospital < 1 || n_population < 1) throw DataError("sample sizes must be positive");
  check_pd(hospital_pd, cause_count, "hospital_pd");
  check_pd(population_pd, cause_count, "population_pd");
  if (static_cast<int>(conditionals.size()) != cause_count)
    throw DataError("conditionals must have J rows");
  for (const auto& row : conditionals) {
    if (static_cast<int>(row.size()) != symptom_count)
      throw DataError("conditionals must have K columns");
    for (double p : row)
      if (!(p >= 0.0 && p <= 1.0)) throw DataError("Bernoulli parameter outside [0, 1]");
  }
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw DataError("bad missing rate");
  if (violation < 0.0 || site_violation < 0.0) throw DataError("violation must be nonnegative");
  if (site_count < 1) throw DataError("site count must be at least 1");
  if (!cause_labels.empty() && static_cast<int>(cause_labels.size()) != cause_count)
    throw DataError("cause_labels length does not match cause count");
}

GeneratorSpec GeneratorSpec::random(int J, int K, int n_hospital, int n_population,
                                    std::uint64_t seed, double lo, double hi) {
  GeneratorSpec spec;
  spec.cause_count = J;
  spec.symptom_count = K;
  spec.n_hospital = n_hospital;
  spec.n_population = n_population;
  spec.hospital_pd.assign(J, 1.0 / J);
  spec.hospital_pd[0] += 1.0 - std::accumulate(spec.hospital_pd.begin(),
                                               spec.hospital_pd.end(), 0.0);
  spec.population_pd = spec.hospital_pd;
  auto rng = make_rng(seed, 0xC01Dull);
  std::uniform_real_distribution<double> dist(lo, hi);
  spec.conditionals.assign(J, std::vector<double>(K));
  for (auto& row : spec.conditionals)
    for (auto& p : row) p = dist(rng);
  return spec;
}

GeneratorSpec GeneratorSpec::from_config(const std::string& path) {
  auto kv = read_key_value_file(path);
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  GeneratorSpec spec;
  if (auto* v = get("cause_count")) spec.cause_count = std::stoi(*v);
  if (auto* v = get("symptom_count")) spec.symptom_count = std::stoi(*v);
  if (auto* v = get("n_hospital")) spec.n_hospital = std::stoi(*v);
  if (auto* v = get("n_population")) spec.n_population = std::stoi(*v);
  if (auto* v = get("missing_rate")) spec.missing_rate = std::stod(*v);
  if (auto* v = get("violation")) spec.violation = std::stod(*v);
  if (auto* v = get("site_count")) spec.site_count = std::stoi(*v);
  if (auto* v = get("site_violation")) spec.site_violation = std::stod(*v);

  if (auto* v = get("hospital_pd")) spec.hospital_pd = parse_list(*v);
  else spec.hospital_pd.assign(spec.cause_count, 1.0 / spec.cause_count);
  if (auto* v = get("population_pd")) spec.population_pd = parse_list(*v);
  else spec.population_pd.assign(spec.cause_count, 1.0 / spec.cause_count);

  double lo = 0.1, hi = 0.9;
  std::uint64_t cond_seed = 12345;
  if (auto* v = get("conditionals_lo")) lo = std::stod(*v);
  if (auto* v = get("conditionals_hi")) hi = std::stod(*v);
  if (auto* v = get("conditionals_seed")) cond_seed = std::stoull(*v);
  GeneratorSpec filler = random(spec.cause_count, spec.symptom_count, 1, 1, cond_seed, lo, hi);
  spec.conditionals = filler.conditionals;

  if (auto* v = get("cause_labels")) {
    std::stringstream ss(*v);
    std::string cell;
    while (std::getline(ss, cell, ',')) spec.cause_labels.push_back(cell);
  }
  spec.validate();
  return spec;
}

std::pair<Dataset, Dataset> generate(const GeneratorSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int J = spec.cause_count;
  const int K = spec.symptom_count;

  std::vector<std::string> labels = spec.cause_labels;
  if (labels.empty())
    for (int j = 0; j < J; ++j) labels.push_back("cause" + std::to_string(j + 1));
  CauseSet cause_set(labels);

  // Deterministic sign pattern for the violation and per-site perturbations.
  auto sign_rng = make_rng(seed, 0x51Cull);
  std::vector<std::vector<double>> signs(J, std::vector<double>(K));
  for (auto& row : signs)
    for (auto& s : row) s = (sign_rng() & 1) ? 1.0 : -1.0;
  std::vector<std::vector<std::vector<double>>> site_signs(
      spec.site_count, std::vector<std::vector<double>>(J, std::vector<double>(K)));
  for (auto& site : site_signs)
    for (auto& row : site)
      for (auto& s : row) s = (sign_rng() & 1) ? 1.0 : -1.0;

  auto sample = [&](bool hospital_side, int n, std::uint64_t stream) {
    Dataset d;
    d.symptom_count = K;
    d.cause_set = cause_set;
    for (int k = 0; k < K; ++k) d.symptom_names.push_back("s" + std::to_string(k + 1));
    d.kind = hospital_side ? DatasetKind::Labeled : DatasetKind::Unlabeled;
    d.causes_hidden = !hospital_side;

    const auto& pd = hospital_side ? spec.hospital_pd : spec.population_pd;
    auto rng = make_rng(seed, stream);
    std::discrete_distribution<int> cause_dist(pd.begin(), pd.end());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> site_dist(0, spec.site_count - 1);

    for (int i = 0; i < n; ++i) {
      int j = cause_dist(rng);
      int site = spec.site_count > 1 ? site_dist(rng) : 0;
      SymptomRecord rec;
      rec.symptoms.resize(K);
      for (int k = 0; k < K; ++k) {
        double p = spec.conditionals[j][k];
        if (!hospital_side && spec.violation > 0.0)
          p += spec.violation * signs[j][k];
        if (spec.site_count > 1 && spec.site_violation > 0.0)
          p += spec.site_violation * site_signs[site][j][k];
        p = std::clamp(p, 0.0, 1.0);
        rec.symptoms[k] = unif(rng) < p ? Symptom::Present : Symptom::Absent;
        if (spec.missing_rate > 0.0 && unif(rng) < spec.missing_rate)
          rec.symptoms[k] = Symptom::Missing;
      }
      rec.cause = j;
      d.records.push_back(std::move(rec));
      if (spec.site_count > 1) d.sites.push_back(site);
    }
    d.validate();
    return d;
  };

  Dataset hospital = sample(true, spec.n_hospital, 0x4051ull);
  Dataset population = sample(false, spec.n_population, 0x4052ull);
  return {std::move(hospital), std::move(population)};
}

Dataset resample_population_exact(const Dataset& hospital, const SimplexVector& new_weights,
                                  int copies_scale) {
  if (hospital.kind != DatasetKind::Labeled) throw DataError("needs a labeled hospital dataset");
  const int J = hospital.cause_set.size();
  if (new_weights.size() != J) throw DataError("weight dimension mismatch");

  std::vector<std::int64_t> n_by_cause(J, 0);
  for (const auto& r : hospital.records) n_by_cause[r.cause.value()]++;
  for (int j = 0; j < J; ++j)
    if (n_by_cause[j] == 0 && new_weights[j] > 0.0)
      throw DataError("positive weight on a cause absent from hospital data");

  // Find the smallest scale S with w_j * S / n_j integral for every cause, so
  // the replicated population realizes the mixture exactly.
  std::vector<std::int64_t> copies(J, 0);
  bool found = false;
  for (std::int64_t S = 1; S <= 1000000 && !found; ++S) {
    found = true;
    for (int j = 0; j < J; ++j) {
      if (new_weights[j] == 0.0) { copies[j] = 0; continue; }
      double exact = new_weights[j] * static_cast<double>(S) / n_by_cause[j];
      double rounded = std::llround(exact);
      if (std::abs(exact - rounded) > 1e-9 || rounded < 1.0) { found = false; break; }
      copies[j] = static_cast<std::int64_t>(rounded);
    }
  }
  if (!found) throw DataError("weights not commensurable with hospital cause counts");

  Dataset population;
  population.kind = DatasetKind::Unlabeled;
  population.symptom_count = hospital.symptom_count;
  population.cause_set = hospital.cause_set;
  population.symptom_names = hospital.symptom_names;
  population.causes_hidden = true;
  for (const auto& r : hospital.records) {
    std::int64_t reps = copies[r.cause.value()] * copies_scale;
    for (std::int64_t c = 0; c < reps; ++c) population.records.push_back(r);
  }
  if (population.records.empty()) throw DataError("resampled population is empty");
  return population;
}

}  // namespace vacalc
