#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vacalc/classifier.hpp"
#include "vacalc/generator.hpp"

using namespace vacalc;

namespace {

SymptomRecord rec(std::initializer_list<int> symptoms, int cause = -1) {
  SymptomRecord r;
  for (int v : symptoms) r.symptoms.push_back(static_cast<Symptom>(v));
  if (cause >= 0) r.cause = cause;
  return r;
}

Dataset base(int K, DatasetKind kind, std::vector<std::string> labels = {"a", "b"}) {
  Dataset d;
  d.kind = kind;
  d.symptom_count = K;
  d.cause_set = CauseSet(std::move(labels));
  for (int k = 0; k < K; ++k) d.symptom_names.push_back("s" + std::to_string(k + 1));
  return d;
}

}  // namespace

TEST_CASE("smoothed per-symptom conditionals: hand arithmetic") {
  Dataset hospital = base(3, DatasetKind::Labeled);
  // Cause a: symptom 1 absent in both records -> smoothed P(present|a) =
  // (0 + 0.5) / (2 + 1) = 1/6.
  hospital.records = {rec({0, 1, 0}, 0), rec({0, 0, 1}, 0), rec({1, 1, 1}, 1)};
  auto cl = conditional_likelihood(hospital, SymptomSubset::checked({0}, 3), 0.5);
  CHECK(cl.likelihood(0, 1, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(cl.likelihood(0, 0, 1) == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
  // Cause b: one record, present -> (1 + 0.5) / (1 + 1) = 3/4.
  CHECK(cl.likelihood(1, 1, 1) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("joint tabulation smoothing: hand arithmetic") {
  Dataset hospital = base(3, DatasetKind::Labeled);
  hospital.records = {rec({0, 0, 0}, 0), rec({0, 0, 1}, 0), rec({1, 1, 0}, 1)};
  auto cl = conditional_likelihood(hospital, SymptomSubset::checked({0, 1}, 3), 0.5, true);
  // Cause a holds 2 usable records, both profile 00; 2^B = 4 cells.
  // P(00|a) = (2 + 0.5) / (2 + 0.5*4) = 2.5/4.
  CHECK(cl.likelihood(0, 0b00, 0b11) == doctest::Approx(2.5 / 4.0).epsilon(1e-14));
  CHECK(cl.likelihood(0, 0b11, 0b11) == doctest::Approx(0.5 / 4.0).epsilon(1e-14));
}

TEST_CASE("records with missing symptoms take the product path") {
  Dataset hospital = base(3, DatasetKind::Labeled);
  hospital.records = {rec({0, 0, 0}, 0), rec({1, 1, 0}, 1)};
  auto joint = conditional_likelihood(hospital, SymptomSubset::checked({0, 1}, 3), 0.5, true);
  auto product = conditional_likelihood(hospital, SymptomSubset::checked({0, 1}, 3), 0.5, false);
  // Partially observed profile (mask drops symptom 1): both agree.
  CHECK(joint.likelihood(0, 0b00, 0b01) ==
        doctest::Approx(product.likelihood(0, 0b00, 0b01)).epsilon(1e-14));
}

TEST_CASE("perfectly separating symptoms give degenerate posteriors") {
  Dataset hospital = base(4, DatasetKind::Labeled);
  for (int i = 0; i < 30; ++i) {
    hospital.records.push_back(rec({1, 1, 1, 1}, 0));
    hospital.records.push_back(rec({0, 0, 0, 0}, 1));
  }
  Dataset population = base(4, DatasetKind::Unlabeled);
  population.records = {rec({1, 1, 1, 1}), rec({0, 0, 0, 0}), rec({1, 1, 1, 1})};

  CommitteeConfig cfg;
  cfg.subset_size = 2;
  cfg.n_members = 10;
  cfg.seed = 5;
  cfg.smoothing = 0.0;  // exact zeros allowed: posteriors collapse
  cfg.rescale_to_target = false;
  auto posteriors = classify(hospital, population, SimplexVector({0.5, 0.5}), cfg);
  REQUIRE(posteriors.size() == 3);
  CHECK(posteriors[0].posterior[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(posteriors[0].map_cause == 0);
  CHECK(posteriors[1].posterior[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(posteriors[1].map_cause == 1);
  CHECK(!posteriors[0].fallback);
}

TEST_CASE("uninformative symptoms return the prior") {
  Dataset hospital = base(4, DatasetKind::Labeled);
  for (int i = 0; i < 20; ++i) {
    hospital.records.push_back(rec({0, 0, 0, 0}, 0));
    hospital.records.push_back(rec({0, 0, 0, 0}, 1));
  }
  Dataset population = base(4, DatasetKind::Unlabeled);
  population.records = {rec({0, 0, 0, 0}), rec({0, 0, 0, 0})};

  CommitteeConfig cfg;
  cfg.subset_size = 2;
  cfg.n_members = 8;
  cfg.seed = 6;
  SimplexVector prior({0.3, 0.7});
  auto posteriors = classify(hospital, population, prior, cfg);
  for (const auto& p : posteriors) {
    CHECK(p.posterior[0] == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(p.posterior[1] == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(p.map_cause == 1);
  }
}

TEST_CASE("no hospital support anywhere falls back to the prior, flagged") {
  Dataset hospital = base(4, DatasetKind::Labeled);
  for (int i = 0; i < 10; ++i) {
    hospital.records.push_back(rec({0, 0, 0, 0}, 0));
    hospital.records.push_back(rec({0, 0, 0, 0}, 1));
  }
  Dataset population = base(4, DatasetKind::Unlabeled);
  population.records = {rec({1, 1, 1, 1})};  // impossible under smoothing 0

  CommitteeConfig cfg;
  cfg.subset_size = 2;
  cfg.n_members = 5;
  cfg.seed = 7;
  cfg.smoothing = 0.0;
  cfg.rescale_to_target = false;
  SimplexVector prior({0.6, 0.4});
  auto posteriors = classify(hospital, population, prior, cfg);
  CHECK(posteriors[0].fallback);
  CHECK(posteriors[0].posterior == prior.values());
}

TEST_CASE("posteriors normalize and aggregate to the target distribution") {
  GeneratorSpec spec = GeneratorSpec::random(3, 10, 600, 400, 91);
  spec.population_pd = {0.2, 0.3, 0.5};
  auto [hospital, population] = generate(spec, 41);
  SimplexVector p_hat = empirical_cause_distribution(population);

  CommitteeConfig cfg;
  cfg.subset_size = 5;
  cfg.n_members = 25;
  cfg.seed = 8;
  auto posteriors = classify(hospital, population, p_hat, cfg);
  REQUIRE(static_cast<int>(posteriors.size()) == population.size());

  std::vector<double> mean(3, 0.0);
  for (const auto& p : posteriors) {
    double sum = 0.0;
    for (int j = 0; j < 3; ++j) {
      CHECK(p.posterior[j] >= 0.0);
      sum += p.posterior[j];
      mean[j] += p.posterior[j] / population.size();
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }
  // The rescaling loop pins the record-averaged posterior to p_hat.
  for (int j = 0; j < 3; ++j) CHECK(std::abs(mean[j] - p_hat[j]) < 1e-6);
}

TEST_CASE("classification is deterministic across thread counts") {
  GeneratorSpec spec = GeneratorSpec::random(3, 10, 400, 200, 92);
  auto [hospital, population] = generate(spec, 42);
  SimplexVector p_hat = empirical_cause_distribution(population);

  CommitteeConfig cfg;
  cfg.subset_size = 5;
  cfg.n_members = 12;
  cfg.seed = 9;
  auto a = classify(hospital, population, p_hat, cfg);
  cfg.threads = 3;
  auto b = classify(hospital, population, p_hat, cfg);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].posterior == b[i].posterior);  // bit-for-bit
    CHECK(a[i].map_cause == b[i].map_cause);
  }
}

TEST_CASE("map ties break to the lowest cause index") {
  Dataset hospital = base(3, DatasetKind::Labeled);
  for (int i = 0; i < 10; ++i) {
    hospital.records.push_back(rec({0, 0, 0}, 0));
    hospital.records.push_back(rec({0, 0, 0}, 1));
  }
  Dataset population = base(3, DatasetKind::Unlabeled);
  population.records = {rec({0, 0, 0})};
  CommitteeConfig cfg;
  cfg.subset_size = 1;
  cfg.n_members = 4;
  cfg.seed = 10;
  auto posteriors = classify(hospital, population, SimplexVector({0.5, 0.5}), cfg);
  CHECK(posteriors[0].posterior[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(posteriors[0].map_cause == 0);
}

TEST_CASE("input validation") {
  GeneratorSpec spec = GeneratorSpec::random(3, 8, 100, 50, 93);
  auto [hospital, population] = generate(spec, 43);
  SimplexVector p_hat({0.5, 0.5});  // wrong dimension for J=3
  CommitteeConfig cfg;
  cfg.subset_size = 4;
  CHECK_THROWS_AS(classify(hospital, population, p_hat, cfg), DataError);

  SimplexVector ok({0.3, 0.3, 0.4});
  cfg.subset_size = 8;  // B must be < K
  CHECK_THROWS_AS(classify(hospital, population, ok, cfg), DataError);
  cfg.subset_size = 4;
  cfg.n_members = 0;
  CHECK_THROWS_AS(classify(hospital, population, ok, cfg), DataError);
}

TEST_CASE("shifted-prior committee beats the hospital prior most of the time") {
  // Label shift with informative symptoms: using the population prior should
  // win the accuracy comparison on a clear majority of replications.
  int wins = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    GeneratorSpec spec = GeneratorSpec::random(3, 10, 400, 400, 100 + t);
    spec.hospital_pd = {0.6, 0.3, 0.1};
    spec.population_pd = {0.1, 0.3, 0.6};
    auto [hospital, population] = generate(spec, 200 + t);

    CommitteeConfig cfg;
    cfg.subset_size = 5;
    cfg.n_members = 15;
    cfg.seed = 300 + t;
    SimplexVector shifted = empirical_cause_distribution(population);
    SimplexVector hosp = empirical_cause_distribution(hospital);

    auto score = [&](const SimplexVector& prior) {
      auto posteriors = classify(hospital, population, prior, cfg);
      int correct = 0;
      for (const auto& p : posteriors)
        if (p.map_cause == population.records[p.record_index].cause.value()) correct++;
      return correct;
    };
    if (score(shifted) >= score(hosp)) wins++;
  }
  // One-sided sign test at 5%: >= 15 of 20.
  CHECK(wins >= 15);
}
