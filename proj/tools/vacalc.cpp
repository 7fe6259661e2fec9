// vacalc: cause-of-death distribution estimation from verbal-autopsy symptom
// data. Subcommands: estimate, baseline, classify, validate, simulate.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vacalc/baseline.hpp"
#include "vacalc/classifier.hpp"
#include "vacalc/estimator.hpp"
#include "vacalc/generator.hpp"
#include "vacalc/io.hpp"
#include "vacalc/parallel.hpp"
#include "vacalc/validation.hpp"

namespace fs = std::filesystem;
using namespace vacalc;

namespace {

constexpr const char* kVersion = "vacalc 0.1.0";

enum ExitCode { kOk = 0, kUsage = 2, kDataError = 3, kNumericError = 4, kInternal = 5 };

struct CommonOptions {
  std::string hospital_path;
  std::string population_path;
  std::string schema_path;
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool validation_mode = false;
};

// FNV-1a over file bytes; recorded in the manifest for traceability.
std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "-";
  std::uint64_t h = 1469598103934665603ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

void write_manifest(const CommonOptions& common, const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
  std::ofstream out(fs::path(common.out_dir) / "manifest.txt");
  std::vector<std::pair<std::string, std::string>> entries;
  entries.emplace_back("version", kVersion);
  entries.emplace_back("command", command);
  entries.emplace_back("seed", std::to_string(common.seed));
  if (!common.hospital_path.empty()) {
    entries.emplace_back("hospital", common.hospital_path);
    entries.emplace_back("hospital_hash", file_hash(common.hospital_path));
  }
  if (!common.population_path.empty()) {
    entries.emplace_back("population", common.population_path);
    entries.emplace_back("population_hash", file_hash(common.population_path));
  }
  if (!common.schema_path.empty()) entries.emplace_back("schema", common.schema_path);
  if (!common.config_path.empty()) entries.emplace_back("config", common.config_path);
  entries.emplace_back("validation_mode", common.validation_mode ? "1" : "0");
  for (const auto& e : extra) entries.push_back(e);
  write_key_value(entries, out);
}

Schema load_schema(const CommonOptions& common) {
  if (!common.schema_path.empty()) return Schema::from_config(common.schema_path);
  return Schema{};
}

Dataset load_population(const CommonOptions& common, const Schema& schema) {
  Dataset population = load_dataset_file(common.population_path, schema);
  if (population.kind == DatasetKind::Labeled) {
    if (!common.validation_mode)
      throw DataError(common.population_path +
                      ": population file has a cause column; pass --validation-mode "
                      "to keep the labels hidden for scoring");
    population.kind = DatasetKind::Unlabeled;
    population.causes_hidden = true;
  }
  return population;
}

std::map<int, double> parse_fixed(const std::vector<std::string>& specs,
                                  const CauseSet& causes) {
  std::map<int, double> fixed;
  for (const auto& s : specs) {
    size_t eq = s.find('=');
    if (eq == std::string::npos) throw DataError("--fix-cause expects NAME=P, got '" + s + "'");
    std::string name = s.substr(0, eq);
    int idx = causes.index_of(name);
    if (idx < 0) throw DataError("--fix-cause: unknown cause '" + name + "'");
    fixed[idx] = std::stod(s.substr(eq + 1));
  }
  return fixed;
}

void add_common(CLI::App* cmd, CommonOptions& common, bool needs_seed = true) {
  cmd->add_option("--schema", common.schema_path, "Column-role schema config file");
  cmd->add_option("--config", common.config_path, "Extra key-value config file");
  cmd->add_option("--out-dir", common.out_dir, "Output directory (created if absent)");
  auto* seed = cmd->add_option_function<std::uint64_t>(
      "--seed", [&common](std::uint64_t v) { common.seed = v; common.seed_set = true; },
      "RNG seed (required: every command is stochastic)");
  if (needs_seed) seed->required();
  cmd->add_option("--threads", common.threads,
                  "Worker threads (default: VACALC_THREADS or all cores)");
  cmd->add_flag("--validation-mode", common.validation_mode,
                "Allow a cause column in the population file; labels stay hidden");
}

struct EstimateFlags {
  int subset_size = 0;
  int n_subsets = 300;
  int n_bootstrap = 0;
  std::vector<std::string> fix_cause;
  std::string select_b_list;
};

void add_estimator_flags(CLI::App* cmd, EstimateFlags& flags) {
  cmd->add_option("--subset-size", flags.subset_size, "Symptoms per random subset (B)");
  cmd->add_option("--n-subsets", flags.n_subsets, "Number of subset draws");
  cmd->add_option("--bootstrap", flags.n_bootstrap, "Bootstrap replicates (0 = point only)");
  cmd->add_option("--fix-cause", flags.fix_cause,
                  "Pin a cause at a known proportion, NAME=P (repeatable)");
  cmd->add_option("--select-B", flags.select_b_list,
                  "Comma-separated candidate Bs; cross-validates on hospital data");
}

EstimatorConfig make_estimator_config(const CommonOptions& common, const EstimateFlags& flags,
                                      const CauseSet& causes) {
  EstimatorConfig cfg;
  cfg.subset_size = flags.subset_size;
  cfg.n_subsets = flags.n_subsets;
  cfg.n_bootstrap = flags.n_bootstrap;
  cfg.seed = common.seed;
  cfg.threads = resolve_threads(common.threads);
  cfg.fixed = parse_fixed(flags.fix_cause, causes);
  return cfg;
}

int run_estimate(const CommonOptions& common, const EstimateFlags& flags) {
  Schema schema = load_schema(common);
  Dataset hospital = load_dataset_file(common.hospital_path, schema);
  Dataset population = load_population(common, schema);

  EstimatorConfig cfg = make_estimator_config(common, flags, hospital.cause_set);

  std::vector<std::pair<std::string, std::string>> manifest_extra;
  if (!flags.select_b_list.empty()) {
    std::vector<int> candidates;
    std::stringstream ss(flags.select_b_list);
    std::string cell;
    while (std::getline(ss, cell, ',')) candidates.push_back(std::stoi(cell));
    BSelection sel = select_B(hospital, candidates, 5, common.seed, cfg);
    cfg.subset_size = sel.chosen;
    manifest_extra.emplace_back("selected_B", std::to_string(sel.chosen));
    std::ofstream scores(fs::path(common.out_dir) / "select_B.csv");
    scores << "B,mean_abs_error,fold_sd,feasible_folds\n";
    for (const auto& row : sel.scores)
      scores << row.subset_size << "," << row.mean_abs_error << "," << row.fold_sd << ","
             << row.feasible_folds << "\n";
  }

  EstimateReport report = estimate(hospital, population, cfg);

  {
    std::ofstream out(fs::path(common.out_dir) / "estimate.csv");
    write_estimate_table(report, hospital.cause_set, out);
  }
  {
    std::ofstream out(fs::path(common.out_dir) / "estimate_report.txt");
    write_estimate_report(report, hospital.cause_set, out);
  }
  manifest_extra.emplace_back("subset_size_used", std::to_string(report.subset_size_used));
  manifest_extra.emplace_back("n_subsets", std::to_string(cfg.n_subsets));
  manifest_extra.emplace_back("bootstrap", std::to_string(cfg.n_bootstrap));
  manifest_extra.emplace_back("retained_subsets", std::to_string(report.retained_subsets));
  manifest_extra.emplace_back("skipped_subsets", std::to_string(report.skipped.total()));
  for (const auto& f : flags.fix_cause) manifest_extra.emplace_back("fix_cause", f);
  write_manifest(common, "estimate", manifest_extra);
  return kOk;
}

int run_baseline_cmd(const CommonOptions& common, int folds) {
  Schema schema = load_schema(common);
  Dataset hospital = load_dataset_file(common.hospital_path, schema);
  Dataset population = load_population(common, schema);

  BaselineReport report = run_baseline(reference_predictor_family(), hospital, population,
                                       folds, common.seed);
  std::ofstream out(fs::path(common.out_dir) / "baseline.csv");
  write_baseline_report(report, out);
  write_manifest(common, "baseline", {{"folds", std::to_string(folds)}});
  return kOk;
}

int run_classify(const CommonOptions& common, const EstimateFlags& flags, int n_members,
                 double smoothing) {
  Schema schema = load_schema(common);
  Dataset hospital = load_dataset_file(common.hospital_path, schema);
  Dataset population = load_population(common, schema);

  EstimatorConfig est_cfg = make_estimator_config(common, flags, hospital.cause_set);
  est_cfg.n_bootstrap = 0;
  EstimateReport est = estimate(hospital, population, est_cfg);

  CommitteeConfig committee;
  committee.subset_size = flags.subset_size;
  committee.n_members = n_members;
  committee.seed = common.seed;
  committee.smoothing = smoothing;
  committee.threads = resolve_threads(common.threads);
  auto posteriors = classify(hospital, population, est.point, committee);

  {
    std::ofstream out(fs::path(common.out_dir) / "posteriors.csv");
    write_posteriors(posteriors, hospital.cause_set, out);
  }
  {
    std::ofstream out(fs::path(common.out_dir) / "estimate.csv");
    write_estimate_table(est, hospital.cause_set, out);
  }
  write_manifest(common, "classify",
                 {{"n_members", std::to_string(n_members)},
                  {"smoothing", std::to_string(smoothing)}});
  return kOk;
}

int run_validate(const CommonOptions& common, const EstimateFlags& flags,
                 const std::string& protocol, double fraction, int holdout_site) {
  Schema schema = load_schema(common);
  Dataset data = load_dataset_file(common.hospital_path, schema);
  if (data.kind != DatasetKind::Labeled)
    throw DataError("validate needs a labeled dataset (causes are unveiled for scoring)");

  EstimatorConfig cfg = make_estimator_config(common, flags, data.cause_set);

  ValidationReport report;
  if (protocol == "split") {
    report = run_split_validation(data, cfg, fraction, common.seed);
  } else if (protocol == "site") {
    report = run_site_validation(data, cfg, holdout_site);
  } else {
    throw DataError("unknown --protocol '" + protocol + "' (split | site)");
  }

  std::ofstream out(fs::path(common.out_dir) / "validation.csv");
  write_validation_report(report, out);
  write_manifest(common, "validate",
                 {{"protocol", protocol},
                  {"fraction", std::to_string(fraction)},
                  {"holdout_site", std::to_string(holdout_site)}});
  return kOk;
}

int run_simulate(const CommonOptions& common, const EstimateFlags& flags, int n_members) {
  if (common.config_path.empty())
    throw DataError("simulate needs --config with a generator spec");
  GeneratorSpec spec = GeneratorSpec::from_config(common.config_path);
  auto [hospital, population] = generate(spec, common.seed);

  write_dataset_file(hospital, (fs::path(common.out_dir) / "hospital.csv").string());
  write_dataset_file(population, (fs::path(common.out_dir) / "population.csv").string());

  // Marginal scatter payload: P(D) and per-symptom P(S_k = 1), labeled vs
  // unlabeled side by side.
  {
    std::ofstream out(fs::path(common.out_dir) / "marginals.csv");
    out << "kind,name,population,hospital\n";
    SimplexVector pop_pd = empirical_cause_distribution(population);
    SimplexVector hosp_pd = empirical_cause_distribution(hospital);
    for (int j = 0; j < hospital.cause_set.size(); ++j)
      out << "cause," << hospital.cause_set.label(j) << "," << pop_pd[j] << "," << hosp_pd[j]
          << "\n";
    for (int k = 0; k < hospital.symptom_count; ++k) {
      auto marginal = [&](const Dataset& d) {
        std::int64_t present = 0, seen = 0;
        for (const auto& r : d.records) {
          if (r.symptoms[k] == Symptom::Missing) continue;
          seen++;
          if (r.symptoms[k] == Symptom::Present) present++;
        }
        return seen > 0 ? static_cast<double>(present) / seen : 0.0;
      };
      out << "symptom," << hospital.symptom_names[k] << "," << marginal(population) << ","
          << marginal(hospital) << "\n";
    }
  }

  CommitteeConfig committee;
  committee.subset_size = flags.subset_size;
  committee.n_members = n_members;
  committee.seed = common.seed;
  committee.threads = resolve_threads(common.threads);
  EstimatorConfig est_cfg;
  est_cfg.subset_size = flags.subset_size;
  est_cfg.n_subsets = flags.n_subsets;
  est_cfg.seed = common.seed;
  est_cfg.threads = committee.threads;

  ClassifierExperiment experiment =
      run_classifier_experiment(spec, committee, est_cfg, common.seed);
  std::ofstream out(fs::path(common.out_dir) / "classifier_experiment.csv");
  write_classifier_experiment(experiment, out);
  write_manifest(common, "simulate", {{"n_members", std::to_string(n_members)}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cause-of-death distribution estimation from verbal-autopsy symptom data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.allow_extras(false);

  CommonOptions common;
  EstimateFlags flags;
  int folds = 5;
  int n_members = 50;
  double smoothing = 0.5;
  std::string protocol = "split";
  double fraction = 0.5;
  int holdout_site = 0;

  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate P(D) in the population");
  estimate_cmd->add_option("--hospital", common.hospital_path, "Labeled dataset")->required();
  estimate_cmd->add_option("--population", common.population_path, "Unlabeled dataset")
      ->required();
  add_common(estimate_cmd, common);
  add_estimator_flags(estimate_cmd, flags);

  auto* baseline_cmd =
      app.add_subcommand("baseline", "Back-calculation baseline over every cause");
  baseline_cmd->add_option("--hospital", common.hospital_path, "Labeled dataset")->required();
  baseline_cmd->add_option("--population", common.population_path, "Unlabeled dataset")
      ->required();
  baseline_cmd->add_option("--folds", folds, "Cross-validation folds");
  add_common(baseline_cmd, common);

  auto* classify_cmd =
      app.add_subcommand("classify", "Per-record cause posteriors (Bayes committee)");
  classify_cmd->add_option("--hospital", common.hospital_path, "Labeled dataset")->required();
  classify_cmd->add_option("--population", common.population_path, "Unlabeled dataset")
      ->required();
  classify_cmd->add_option("--n-members", n_members, "Committee members");
  classify_cmd->add_option("--smoothing", smoothing, "Additive pseudo-count");
  add_common(classify_cmd, common);
  add_estimator_flags(classify_cmd, flags);

  auto* validate_cmd =
      app.add_subcommand("validate", "Validation protocols on labeled data");
  validate_cmd->add_option("--hospital", common.hospital_path, "Labeled dataset")->required();
  validate_cmd->add_option("--protocol", protocol, "split | site");
  validate_cmd->add_option("--fraction", fraction, "Hospital fraction for split protocol");
  validate_cmd->add_option("--site", holdout_site, "Held-out site tag for site protocol");
  add_common(validate_cmd, common);
  add_estimator_flags(validate_cmd, flags);

  auto* simulate_cmd =
      app.add_subcommand("simulate", "Generate synthetic data and run the experiment suite");
  simulate_cmd->add_option("--n-members", n_members, "Committee members");
  add_common(simulate_cmd, common);
  add_estimator_flags(simulate_cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help/usage text
    return code == 0 ? kOk : kUsage;
  }

  try {
    fs::create_directories(common.out_dir);
    if (*estimate_cmd) return run_estimate(common, flags);
    if (*baseline_cmd) return run_baseline_cmd(common, folds);
    if (*classify_cmd) return run_classify(common, flags, n_members, smoothing);
    if (*validate_cmd) return run_validate(common, flags, protocol, fraction, holdout_site);
    if (*simulate_cmd) return run_simulate(common, flags, n_members);
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
