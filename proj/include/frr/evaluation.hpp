#pragma once

// k-fold evaluation and multi-dataset benchmarking.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frr/classifier.hpp"

namespace frr {

struct FoldReport {
  std::size_t fold = 0;
  std::uint64_t seed = 0;  // model seed used for this fold
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double accuracy = 0;
  double train_accuracy = 0;
  ComplexityReport complexity;
  std::size_t raw_rules = 0;  // rules before duplicate merging
  double fidelity = 0;        // share of test rows where the rule base agrees with the network
};

struct CvReport {
  std::vector<FoldReport> folds;
  double mean_accuracy = 0;
  double std_accuracy = 0;  // sample standard deviation over folds
  double mean_rules = 0;
  double mean_raw_rules = 0;
  double mean_conditions_per_rule = 0;
  double mean_rule_base_size = 0;
  double mean_unique_conditions = 0;
  double mean_fidelity = 0;
};

struct CvOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;  // fold assignment; fold f trains with seed + f
  int jobs = 1;
};

/// Partitions are rebuilt on each training split.
CvReport cross_validate(const TabularDataset& dataset, const FrrConfig& config, const CvOptions& options);

/// fold,seed,n_train,n_test,accuracy,train_accuracy,n_rules,raw_rules,
/// avg_conditions_per_rule,rule_base_size,unique_conditions,fidelity
void write_fold_csv(const CvReport& report, const std::filesystem::path& path);
nlohmann::json summary_json(const CvReport& report);

struct ManifestEntry {
  std::filesystem::path path;
  std::string target;
  std::string name;
};

/// CSV with columns path,target,name. Relative paths resolve against the
/// manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Loads a CSV, picking up "<stem>.schema.json" next to it when present.
TabularDataset load_dataset(const std::filesystem::path& path, const std::string& target);

struct Ablation {
  bool no_residual = false;
  std::optional<double> fixed_beta;
  bool root_norm = false;

  bool any() const { return no_residual || fixed_beta.has_value() || root_norm; }
  FrrConfig apply(FrrConfig config) const;
  std::string describe() const;
};

struct BenchmarkRow {
  std::string name;
  bool ok = false;
  std::string error;
  std::vector<double> seed_accuracy;           // mean CV accuracy per seed
  std::vector<double> ablation_seed_accuracy;  // same, with the ablation applied
  double accuracy_mean = 0;
  double accuracy_std = 0;  // over every fold of every seed
  double accuracy_median = 0;
  double ablation_median = 0;
  double delta = 0;  // accuracy_median - ablation_median
  double rules = 0;
  double raw_rules = 0;
  double conditions_per_rule = 0;
  double rule_base_size = 0;
  double unique_conditions = 0;
};

struct BenchmarkOptions {
  std::vector<std::uint64_t> seeds{0};
  std::size_t folds = 5;
  int jobs = 1;
  Ablation ablation;
};

std::vector<BenchmarkRow> run_benchmark(const std::vector<ManifestEntry>& manifest, const FrrConfig& config,
                                        const BenchmarkOptions& options);

/// One row per dataset plus a final "mean" row over successful datasets.
void write_benchmark_csv(const std::vector<BenchmarkRow>& rows, bool with_ablation,
                         const std::filesystem::path& path);

double median(std::vector<double> values);

}  // namespace frr
