#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vacalc/baseline.hpp"
#include "vacalc/generator.hpp"
#include "vacalc/rng.hpp"

using namespace vacalc;

namespace {

Dataset separable_dataset(int n_per_cause) {
  // Symptom 0 identifies cause a perfectly; symptom 1 adds harmless noise-free
  // variety so predictors have something else to look at.
  Dataset d;
  d.kind = DatasetKind::Labeled;
  d.symptom_count = 3;
  d.cause_set = CauseSet({"a", "b"});
  d.symptom_names = {"s1", "s2", "s3"};
  for (int i = 0; i < n_per_cause; ++i) {
    SymptomRecord ra;
    ra.symptoms = {Symptom::Present, i % 2 ? Symptom::Present : Symptom::Absent,
                   Symptom::Absent};
    ra.cause = 0;
    d.records.push_back(ra);
    SymptomRecord rb;
    rb.symptoms = {Symptom::Absent, i % 2 ? Symptom::Present : Symptom::Absent,
                   Symptom::Present};
    rb.cause = 1;
    d.records.push_back(rb);
  }
  return d;
}

}  // namespace

TEST_CASE("confusion summary arithmetic") {
  ConfusionSummary c = ConfusionSummary::from_counts(40, 10, 20, 30);
  CHECK(c.sensitivity == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(c.specificity == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(c.total() == 100);
}

TEST_CASE("back-calculation hand arithmetic") {
  ConfusionSummary c = ConfusionSummary::from_counts(90, 10, 20, 80);  // sens .9, spec .8
  BackCalculation r = back_calculate(0.3, c);
  // (0.3 - 0.2) / (0.9 - 0.2) = 1/7.
  CHECK(r.estimate == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
  CHECK(!r.impossible);
}

TEST_CASE("impossible estimates are flagged, never clamped") {
  ConfusionSummary c = ConfusionSummary::from_counts(90, 10, 20, 80);
  BackCalculation low = back_calculate(0.13, c);
  CHECK(low.estimate == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(low.impossible);
  BackCalculation high = back_calculate(0.95, c);
  CHECK(high.estimate > 1.0);
  CHECK(high.impossible);
}

TEST_CASE("uninformative predictor breaks the correction") {
  // sens + spec = 1: denominator vanishes.
  ConfusionSummary c = ConfusionSummary::from_counts(30, 70, 30, 70);
  CHECK_THROWS_AS(back_calculate(0.4, c), NumericError);
}

TEST_CASE("scalar and matrix corrections agree over random inputs") {
  auto rng = make_rng(71);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int tried = 0;
  while (tried < 1000) {
    double sens = unif(rng), spec = unif(rng), crude = unif(rng);
    if (std::abs(sens - (1.0 - spec)) < 1e-6) continue;
    ++tried;
    ConfusionSummary c;
    c.sensitivity = sens;
    c.specificity = spec;
    double scalar = back_calculate(crude, c).estimate;

    Eigen::Matrix2d confusion;
    confusion << sens, 1.0 - spec, 1.0 - sens, spec;
    Eigen::Vector2d crude_vec(crude, 1.0 - crude);
    Eigen::Vector2d matrix = back_calculate_matrix(crude_vec, confusion);
    CHECK(std::abs(scalar - matrix(0)) < 1e-10);
    CHECK(std::abs(matrix(0) + matrix(1) - 1.0) < 1e-9);
  }
}

TEST_CASE("matrix correction input checks") {
  Eigen::Vector2d crude(0.4, 0.6);
  Eigen::Matrix2d bad;
  bad << 0.9, 0.3, 0.2, 0.7;  // first column sums to 1.1
  CHECK_THROWS_AS(back_calculate_matrix(crude, bad), DataError);
  Eigen::Matrix2d singular;
  singular << 0.5, 0.5, 0.5, 0.5;
  CHECK_THROWS_AS(back_calculate_matrix(crude, singular), NumericError);
}

TEST_CASE("specificity gap vanishes exactly when it should") {
  std::vector<double> m = {0.0, 0.1, 0.3};
  SUBCASE("matched distributions") {
    SimplexVector pd({0.5, 0.3, 0.2});
    CHECK(specificity_consistency_gap(m, pd, pd, 0) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("two causes only") {
    std::vector<double> m2 = {0.0, 0.2};
    SimplexVector h({0.7, 0.3}), p({0.2, 0.8});
    // The composite category is a single cause: its relative weight is 1 on
    // both sides no matter how the priors shift.
    CHECK(specificity_consistency_gap(m2, h, p, 0) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("generic shifted three-cause case") {
    SimplexVector h({0.5, 0.3, 0.2}), p({0.2, 0.3, 0.5});
    CHECK(specificity_consistency_gap(m, h, p, 0) > 1e-3);
  }
  SUBCASE("degenerate composite mass") {
    SimplexVector h({1.0, 0.0, 0.0}), p({0.2, 0.3, 0.5});
    CHECK_THROWS_AS(specificity_consistency_gap(m, h, p, 0), DataError);
  }
}

TEST_CASE("reference predictor separates a separable fixture") {
  Dataset hospital = separable_dataset(40);
  auto family = reference_predictor_family();
  ConfusionSummary c = cv_confusion(family, hospital, 0, 5, 3);
  CHECK(c.sensitivity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.specificity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.total() == hospital.size());  // every record scored exactly once

  // Population at 30/70: the crude prevalence is already exact, and the
  // correction leaves it alone.
  Dataset population;
  population.kind = DatasetKind::Unlabeled;
  population.symptom_count = 3;
  population.cause_set = hospital.cause_set;
  population.symptom_names = hospital.symptom_names;
  Dataset source = separable_dataset(70);
  int added_a = 0, added_b = 0;
  for (const auto& r : source.records) {
    bool is_a = r.cause == 0;
    if (is_a && added_a >= 30) continue;
    if (!is_a && added_b >= 70) continue;
    (is_a ? added_a : added_b)++;
    SymptomRecord copy = r;
    copy.cause.reset();
    population.records.push_back(copy);
  }
  REQUIRE(added_a == 30);
  double crude = crude_prevalence(family(hospital, 0), population);
  CHECK(crude == doctest::Approx(30.0 / (30 + added_b)).epsilon(1e-12));
  BackCalculation bc = back_calculate(crude, c);
  CHECK(bc.estimate == doctest::Approx(crude).epsilon(1e-12));
}

TEST_CASE("cross-validation errors") {
  Dataset hospital = separable_dataset(10);
  auto family = reference_predictor_family();
  CHECK_THROWS_AS(cv_confusion(family, hospital, 0, 1, 3), DataError);
  CHECK_THROWS_AS(cv_confusion(family, hospital, 0, 100, 3), DataError);

  // A cause with a single record starves one training fold.
  Dataset thin = separable_dataset(5);
  std::erase_if(thin.records, [](const SymptomRecord& r) { return r.cause == 1; });
  SymptomRecord lone;
  lone.symptoms = {Symptom::Absent, Symptom::Absent, Symptom::Present};
  lone.cause = 1;
  thin.records.push_back(lone);
  CHECK_THROWS_AS(cv_confusion(family, thin, 1, 2, 3), DataError);
}

TEST_CASE("constant predictor yields flagged rows") {
  PredictorFamily constant_no = [](const Dataset&, int target) {
    DichotomousPredictor p;
    p.target_cause = target;
    p.predict = [](const SymptomRecord&) { return false; };
    return p;
  };
  Dataset hospital = separable_dataset(20);
  Dataset population = hospital;
  population.kind = DatasetKind::Unlabeled;
  for (auto& r : population.records) r.cause.reset();

  BaselineReport report = run_baseline(constant_no, hospital, population, 4, 9);
  REQUIRE(report.rows.size() == 2);
  for (const auto& row : report.rows) {
    CHECK(row.impossible);                // sens 0, spec 1: degenerate denominator
    CHECK(!std::isfinite(row.corrected));
  }
  CHECK(report.estimate_sum == 0.0);
}

TEST_CASE("full baseline on generated data") {
  GeneratorSpec spec = GeneratorSpec::random(3, 12, 900, 900, 51);
  spec.hospital_pd = {0.5, 0.3, 0.2};
  spec.population_pd = {0.2, 0.3, 0.5};
  auto [hospital, population] = generate(spec, 61);

  BaselineReport report = run_baseline(reference_predictor_family(), hospital, population, 5, 7);
  REQUIRE(report.rows.size() == 3);
  double finite_sum = 0.0;
  for (const auto& row : report.rows) {
    CHECK(row.crude >= 0.0);
    CHECK(row.crude <= 1.0);
    CHECK(row.sensitivity >= 0.0);
    CHECK(row.specificity <= 1.0);
    if (std::isfinite(row.corrected)) finite_sum += row.corrected;
    // Flag semantics: impossible iff outside [0, 1] (or non-finite).
    if (std::isfinite(row.corrected))
      CHECK(row.impossible == (row.corrected < 0.0 || row.corrected > 1.0));
  }
  CHECK(report.estimate_sum == doctest::Approx(finite_sum).epsilon(1e-12));
}

TEST_CASE("forward mixing then back-calculation is the identity") {
  // If the crude rate truly equals sens*p + (1-spec)*(1-p), the correction
  // returns p for any usable sens/spec.
  auto rng = make_rng(81);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  for (int t = 0; t < 200; ++t) {
    double sens = unif(rng), spec = unif(rng), p = unif(rng);
    if (std::abs(sens - (1.0 - spec)) < 1e-3) continue;
    double crude = sens * p + (1.0 - spec) * (1.0 - p);
    ConfusionSummary c;
    c.sensitivity = sens;
    c.specificity = spec;
    CHECK(back_calculate(crude, c).estimate == doctest::Approx(p).epsilon(1e-10));
  }
}
