#include "frr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>

#include "frr/error.hpp"
#include "frr/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace frr {

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

FoldReport run_fold(const TabularDataset& dataset, const FoldPlan& plan, std::size_t fold, const FrrConfig& base,
                    std::uint64_t seed) {
  const TabularDataset train = dataset.subset(plan.train_indices(fold));
  const TabularDataset test = dataset.subset(plan.test_indices(fold));
  FrrConfig config = base;
  config.seed = seed;
  const TrainedModel trained = train_model(train, config);
  const FrrModel& model = trained.model;

  FoldReport r;
  r.fold = fold;
  r.seed = seed;
  r.n_train = train.n_rows();
  r.n_test = test.n_rows();
  const std::vector<int> predicted = predict_dataset(model, test);
  r.accuracy = accuracy(predicted, test.targets);
  r.train_accuracy = trained.history.epochs.empty() ? accuracy(predict_dataset(model, train), train.targets)
                                                    : trained.history.epochs.back().train_accuracy;
  const RuleBase rb = extract(model);
  r.complexity = complexity(rb);
  r.raw_rules = rb.raw_rule_count;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < test.n_rows(); ++i) agree += evaluate_rulebase(rb, test.row(i)).prediction == predicted[i];
  r.fidelity = test.n_rows() == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(test.n_rows());
  return r;
}

}  // namespace

CvReport cross_validate(const TabularDataset& dataset, const FrrConfig& config, const CvOptions& options) {
  config.validate();
  const FoldPlan plan = stratified_kfold(dataset, options.folds, options.seed);
  CvReport report;
  report.folds.resize(options.folds);
  std::vector<std::exception_ptr> errors(options.folds);

#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, options.jobs)) if (options.jobs > 1)
  for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(options.folds); ++f) {
    const auto fold = static_cast<std::size_t>(f);
    try {
      report.folds[fold] = run_fold(dataset, plan, fold, config, options.seed + fold);
    } catch (...) {
      errors[fold] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> acc, rules, raw, cpr, size, unique, fid;
  for (const auto& f : report.folds) {
    acc.push_back(f.accuracy);
    rules.push_back(static_cast<double>(f.complexity.n_rules));
    raw.push_back(static_cast<double>(f.raw_rules));
    cpr.push_back(f.complexity.avg_conditions_per_rule);
    size.push_back(static_cast<double>(f.complexity.rule_base_size));
    unique.push_back(static_cast<double>(f.complexity.unique_conditions));
    fid.push_back(f.fidelity);
  }
  report.mean_accuracy = mean_of(acc);
  report.std_accuracy = sample_std(acc);
  report.mean_rules = mean_of(rules);
  report.mean_raw_rules = mean_of(raw);
  report.mean_conditions_per_rule = mean_of(cpr);
  report.mean_rule_base_size = mean_of(size);
  report.mean_unique_conditions = mean_of(unique);
  report.mean_fidelity = mean_of(fid);
  return report;
}

void write_fold_csv(const CvReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "fold,seed,n_train,n_test,accuracy,train_accuracy,n_rules,raw_rules,avg_conditions_per_rule,"
         "rule_base_size,unique_conditions,fidelity\n";
  for (const auto& f : report.folds)
    out << f.fold << ',' << f.seed << ',' << f.n_train << ',' << f.n_test << ',' << fmt(f.accuracy) << ','
        << fmt(f.train_accuracy) << ',' << f.complexity.n_rules << ',' << f.raw_rules << ','
        << fmt(f.complexity.avg_conditions_per_rule) << ',' << f.complexity.rule_base_size << ','
        << f.complexity.unique_conditions << ',' << fmt(f.fidelity) << '\n';
}

nlohmann::json summary_json(const CvReport& r) {
  return {{"format_version", 1},
          {"folds", r.folds.size()},
          {"mean_accuracy", r.mean_accuracy},
          {"std_accuracy", r.std_accuracy},
          {"mean_rules", r.mean_rules},
          {"mean_raw_rules", r.mean_raw_rules},
          {"mean_conditions_per_rule", r.mean_conditions_per_rule},
          {"mean_rule_base_size", r.mean_rule_base_size},
          {"mean_unique_conditions", r.mean_unique_conditions},
          {"mean_fidelity", r.mean_fidelity}};
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  const CsvTable table = read_csv_table(path);
  auto column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw DataError("manifest lacks a '" + name + "' column");
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const std::size_t cp = column("path"), ct = column("target"), cn = column("name");
  std::vector<ManifestEntry> out;
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw DataError("manifest row has the wrong number of fields");
    std::filesystem::path p = row[cp];
    if (p.is_relative()) p = path.parent_path() / p;
    out.push_back({p, row[ct], row[cn]});
  }
  return out;
}

TabularDataset load_dataset(const std::filesystem::path& path, const std::string& target) {
  std::filesystem::path schema_path = path;
  schema_path.replace_extension(".schema.json");
  std::optional<Schema> schema;
  if (std::filesystem::exists(schema_path)) schema = load_schema(schema_path);
  return load_csv(path, target, schema);
}

FrrConfig Ablation::apply(FrrConfig config) const {
  if (no_residual) config.gamma_max = 0.0;
  if (fixed_beta) config.beta_max = config.beta_min = *fixed_beta;
  if (root_norm) config.use_root_norm = true;
  return config;
}

std::string Ablation::describe() const {
  std::string s;
  auto add = [&](const std::string& part) { s += (s.empty() ? "" : "+") + part; };
  if (no_residual) add("no-residual");
  if (fixed_beta) add("fixed-beta=" + fmt(*fixed_beta));
  if (root_norm) add("root-norm");
  return s.empty() ? "none" : s;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<BenchmarkRow> run_benchmark(const std::vector<ManifestEntry>& manifest, const FrrConfig& config,
                                        const BenchmarkOptions& options) {
  std::vector<BenchmarkRow> rows;
  for (const auto& entry : manifest) {
    BenchmarkRow row;
    row.name = entry.name;
    try {
      const TabularDataset ds = load_dataset(entry.path, entry.target);
      std::vector<double> all_folds, rules, raw, cpr, size, unique;
      for (std::uint64_t seed : options.seeds) {
        const CvReport cv = cross_validate(ds, config, {options.folds, seed, options.jobs});
        row.seed_accuracy.push_back(cv.mean_accuracy);
        for (const auto& f : cv.folds) all_folds.push_back(f.accuracy);
        rules.push_back(cv.mean_rules);
        raw.push_back(cv.mean_raw_rules);
        cpr.push_back(cv.mean_conditions_per_rule);
        size.push_back(cv.mean_rule_base_size);
        unique.push_back(cv.mean_unique_conditions);
        if (options.ablation.any()) {
          const CvReport ab = cross_validate(ds, options.ablation.apply(config), {options.folds, seed, options.jobs});
          row.ablation_seed_accuracy.push_back(ab.mean_accuracy);
        }
      }
      row.accuracy_mean = mean_of(row.seed_accuracy);
      row.accuracy_std = sample_std(all_folds);
      row.accuracy_median = median(row.seed_accuracy);
      row.ablation_median = median(row.ablation_seed_accuracy);
      row.delta = options.ablation.any() ? row.accuracy_median - row.ablation_median : 0.0;
      row.rules = mean_of(rules);
      row.raw_rules = mean_of(raw);
      row.conditions_per_rule = mean_of(cpr);
      row.rule_base_size = mean_of(size);
      row.unique_conditions = mean_of(unique);
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_benchmark_csv(const std::vector<BenchmarkRow>& rows, bool with_ablation,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "dataset,status,accuracy_mean,accuracy_std,accuracy_median";
  if (with_ablation) out << ",ablation_median,delta";
  out << ",n_rules,raw_rules,conditions_per_rule,rule_base_size,unique_conditions,error\n";
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::vector<const BenchmarkRow*> good;
  for (const auto& r : rows) {
    out << r.name << ',' << (r.ok ? "ok" : "failed");
    if (r.ok) {
      good.push_back(&r);
      out << ',' << fmt(r.accuracy_mean) << ',' << fmt(r.accuracy_std) << ',' << fmt(r.accuracy_median);
      if (with_ablation) out << ',' << fmt(r.ablation_median) << ',' << fmt(r.delta);
      out << ',' << fmt(r.rules) << ',' << fmt(r.raw_rules) << ',' << fmt(r.conditions_per_rule) << ','
          << fmt(r.rule_base_size) << ',' << fmt(r.unique_conditions) << ",\n";
    } else {
      out << ",,," << (with_ablation ? ",," : "") << ",,,,," << quote(r.error) << '\n';
    }
  }
  if (!good.empty()) {
    auto avg = [&](double BenchmarkRow::*field) {
      double s = 0;
      for (const auto* r : good) s += r->*field;
      return s / static_cast<double>(good.size());
    };
    out << "mean,ok," << fmt(avg(&BenchmarkRow::accuracy_mean)) << ',' << fmt(avg(&BenchmarkRow::accuracy_std)) << ','
        << fmt(avg(&BenchmarkRow::accuracy_median));
    if (with_ablation) out << ',' << fmt(avg(&BenchmarkRow::ablation_median)) << ',' << fmt(avg(&BenchmarkRow::delta));
    out << ',' << fmt(avg(&BenchmarkRow::rules)) << ',' << fmt(avg(&BenchmarkRow::raw_rules)) << ','
        << fmt(avg(&BenchmarkRow::conditions_per_rule)) << ',' << fmt(avg(&BenchmarkRow::rule_base_size)) << ','
        << fmt(avg(&BenchmarkRow::unique_conditions)) << ",\n";
  }
}

}  // namespace frr
