// frr: train, evaluate, extract and apply fuzzy rule-based reasoners.
//
// Exit codes: 0 ok, 1 gradient check failed, 2 bad arguments, 3 data error,
// 4 training diverged.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "frr/classifier.hpp"
#include "frr/error.hpp"
#include "frr/evaluation.hpp"
#include "frr/grad.hpp"
#include "frr/kernels.hpp"
#include "frr/serialize.hpp"

namespace fs = std::filesystem;
using namespace frr;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDiverged = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  const char* env = std::getenv("FRR_SEED");
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("FRR_SEED is not an unsigned integer: ") + env);
  }
}

struct ModelOptions {
  FrrConfig config;
  std::string tnorm = "product";
  double lambda = 1.0;
  std::string ste = "identity";
  int threads = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n-rules", config.rules, "Maximum number of rules (R)")->capture_default_str();
    cmd->add_option("--conditions", config.conditions, "Maximum conditions per rule (A)")->capture_default_str();
    cmd->add_option("--labels", config.labels, "Linguistic labels per continuous feature (V)")->capture_default_str();
    cmd->add_option("--epochs", config.epochs)->capture_default_str();
    cmd->add_option("--batch-size", config.batch_size)->capture_default_str();
    cmd->add_option("--lr", config.learning_rate, "Adam learning rate")->capture_default_str();
    cmd->add_option("--temperature", config.temperature, "Softmax temperature for weight rows")->capture_default_str();
    cmd->add_option("--tnorm", tnorm, "product, minimum or aczel-alsina")->capture_default_str();
    cmd->add_option("--lambda", lambda, "Aczel-Alsina parameter")->capture_default_str();
    cmd->add_flag("--weights-in-tnorm", config.weights_in_tnorm, "Combine weights with degrees through the t-norm");
    cmd->add_flag("--root-norm", config.use_root_norm, "Take the n-th root of rule activations during training");
    cmd->add_option("--beta-max", config.beta_max)->capture_default_str();
    cmd->add_option("--beta-min", config.beta_min)->capture_default_str();
    cmd->add_option("--gamma-max", config.gamma_max, "Residual coefficient at epoch 0")->capture_default_str();
    cmd->add_option("--cancel-penalty", config.cancel_penalty)->capture_default_str();
    cmd->add_option("--keep-bias", config.keep_bias, "Initial keep-over-cancel logit lead")->capture_default_str();
    cmd->add_option("--ste", ste, "identity, argmax or off")->capture_default_str();
    cmd->add_option("--threads", threads, "OpenMP threads for the batch kernels (0: runtime default)");
  }

  FrrConfig resolve(std::uint64_t seed) {
    config.tnorm = TNormSpec{parse_tnorm_kind(tnorm), lambda};
    config.ste = parse_ste_mode(ste);
    config.seed = seed;
    config.validate();
    if (threads < 0) throw UsageError("--threads must be >= 0");
    if (threads > 0) set_threads(threads);
    return config;
  }
};

std::string rule_sentence(const RuleBase& rb, int index) {
  if (index < 0) return "default " + rb.class_names.at(static_cast<std::size_t>(rb.default_class));
  const Rule& rule = rb.rules.at(static_cast<std::size_t>(index));
  std::string s = "IF ";
  if (rule.conditions.empty()) s += "TRUE";
  for (std::size_t k = 0; k < rule.conditions.size(); ++k) {
    if (k) s += " AND ";
    s += rule.conditions[k].feature_name + " IS " + rule.conditions[k].term_name;
  }
  return s + " THEN " + rb.class_names.at(static_cast<std::size_t>(rule.consequent));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string fixed(double x, int digits = 6) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << x;
  return o.str();
}

TabularDataset load_with_schema(const std::string& data, const std::string& target, const std::string& schema) {
  if (schema.empty()) return load_dataset(data, target);
  return load_csv(data, target, load_schema(schema));
}

void print_complexity(const RuleBase& rb) {
  const ComplexityReport c = complexity(rb);
  std::cout << "rules: " << c.n_rules << " (raw " << rb.raw_rule_count << ")\n"
            << "conditions per rule: " << fixed(c.avg_conditions_per_rule, 4) << "\n"
            << "rule base size: " << c.rule_base_size << "\n"
            << "unique conditions: " << c.unique_conditions << "\n";
}

struct PredictSource {
  std::optional<FrrModel> model;
  RuleBase rules;
};

PredictSource load_predict_source(const std::string& path) {
  const nlohmann::json doc = read_json(path);
  const std::string kind = document_kind(doc);
  PredictSource src;
  if (kind == "model") {
    src.model = model_from_json(doc);
    src.rules = extract(*src.model);
  } else if (kind == "rules") {
    src.rules = rules_from_json(doc);
  } else {
    throw DataError("'" + path + "' is neither a model nor a rules document");
  }
  return src;
}

int run(int argc, char** argv) {
  CLI::App app{"Fuzzy rule-based reasoner: trains a rule network and reads crisp fuzzy rules off it"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  const std::uint64_t env_seed = default_seed();
  std::uint64_t seed = env_seed;
  std::string data, target, schema;
  ModelOptions opts;

  // fit
  std::string fit_out, fit_history;
  CLI::App* fit = app.add_subcommand("fit", "Train on a CSV and write the model document and loss history");
  fit->add_option("--data", data, "Training CSV")->required();
  fit->add_option("--target", target, "Class column")->required();
  fit->add_option("--schema", schema, "Schema JSON (default: <data stem>.schema.json when present)");
  fit->add_option("--seed", seed, "Initialisation and shuffling seed (default: FRR_SEED or 0)");
  fit->add_option("--out", fit_out, "Model JSON path")->required();
  fit->add_option("--history", fit_history, "History CSV path (default: <out stem>.history.csv)");
  opts.attach(fit);

  // evaluate
  std::size_t folds = 5;
  int jobs = 1;
  std::string eval_report = "folds.csv", eval_summary = "summary.json";
  CLI::App* evaluate = app.add_subcommand("evaluate", "Stratified k-fold evaluation");
  evaluate->add_option("--data", data)->required();
  evaluate->add_option("--target", target)->required();
  evaluate->add_option("--schema", schema);
  evaluate->add_option("--seed", seed, "Fold and model seed (default: FRR_SEED or 0)");
  evaluate->add_option("--folds", folds)->capture_default_str();
  evaluate->add_option("--jobs", jobs, "Folds trained concurrently")->capture_default_str();
  evaluate->add_option("--report", eval_report, "Per-fold CSV")->capture_default_str();
  evaluate->add_option("--summary", eval_summary, "Summary JSON")->capture_default_str();
  opts.attach(evaluate);

  // extract
  std::string model_path, out_text, out_json;
  bool prune = false;
  CLI::App* extract_cmd = app.add_subcommand("extract", "Write the rule base of a trained model as text and JSON");
  extract_cmd->add_option("--model", model_path)->required();
  extract_cmd->add_option("--text", out_text, "Rules text path (default: <model stem>.rules.txt)");
  extract_cmd->add_option("--json", out_json, "Rules JSON path (default: <model stem>.rules.json)");
  extract_cmd->add_flag("--prune-dead", prune, "Drop rules that win no training row (needs --data/--target)");
  extract_cmd->add_option("--data", data, "Training CSV for --prune-dead");
  extract_cmd->add_option("--target", target);
  extract_cmd->add_option("--schema", schema);

  // predict
  std::string rules_path, predict_out;
  bool explain = false;
  CLI::App* predict = app.add_subcommand("predict", "Predict classes for the rows of a CSV");
  auto* model_opt = predict->add_option("--model", model_path, "Model or rules JSON");
  auto* rules_opt = predict->add_option("--rules", rules_path, "Rules JSON");
  model_opt->excludes(rules_opt);
  predict->add_option("--data", data)->required();
  predict->add_option("--out", predict_out, "Predictions CSV (default: stdout)");
  predict->add_flag("--explain", explain, "Append the winning rule and its truth degree");

  // gradcheck
  std::size_t instances = 20;
  double epsilon = 1e-5;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  gradcheck->add_option("--instances", instances)->capture_default_str();
  gradcheck->add_option("--seed", seed);
  gradcheck->add_option("--epsilon", epsilon)->capture_default_str();

  // benchmark
  std::string manifest, bench_out = "benchmark.csv";
  std::vector<std::uint64_t> seeds;
  bool no_residual = false, root_ablation = false;
  std::optional<double> fixed_beta;
  CLI::App* benchmark = app.add_subcommand("benchmark", "k-fold evaluation over every dataset of a manifest");
  benchmark->add_option("--manifest", manifest, "CSV with columns path,target,name")->required();
  benchmark->add_option("--seed", seed);
  benchmark->add_option("--seeds", seeds, "Seed list; overrides --seed");
  benchmark->add_option("--folds", folds)->capture_default_str();
  benchmark->add_option("--jobs", jobs)->capture_default_str();
  benchmark->add_option("--out", bench_out)->capture_default_str();
  benchmark->add_flag("--no-residual", no_residual, "Ablation: gamma fixed at 0");
  benchmark->add_option("--fixed-beta", fixed_beta, "Ablation: beta held at this value");
  benchmark->add_flag("--root-norm", root_ablation, "Ablation: root normalisation on");
  // ablations compare against the base config, so the model flag is spelled differently here
  benchmark->add_option("--n-rules", opts.config.rules)->capture_default_str();
  benchmark->add_option("--conditions", opts.config.conditions)->capture_default_str();
  benchmark->add_option("--labels", opts.config.labels)->capture_default_str();
  benchmark->add_option("--epochs", opts.config.epochs)->capture_default_str();
  benchmark->add_option("--threads", opts.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  if (fit->parsed()) {
    const FrrConfig config = opts.resolve(seed);
    const TabularDataset ds = load_with_schema(data, target, schema);
    const TrainedModel trained = train_model(ds, config);
    write_json(model_to_json(trained.model), fit_out);
    fs::path history = fit_history;
    if (history.empty()) history = fs::path(fit_out).replace_extension(".history.csv");
    trained.history.write_csv(history);
    const double train_acc = accuracy(predict_dataset(trained.model, ds), ds.targets);
    std::cout << "rows: " << ds.n_rows() << "\ntrain accuracy: " << fixed(train_acc) << "\nmodel: " << fit_out
              << "\nhistory: " << history.string() << "\n";
    return 0;
  }

  if (evaluate->parsed()) {
    const FrrConfig config = opts.resolve(seed);
    if (folds < 2) throw UsageError("--folds must be >= 2");
    if (jobs < 1) throw UsageError("--jobs must be >= 1");
    const TabularDataset ds = load_with_schema(data, target, schema);
    const CvReport report = cross_validate(ds, config, {folds, seed, jobs});
    write_fold_csv(report, eval_report);
    write_json(summary_json(report), eval_summary);
    for (const auto& f : report.folds)
      std::cout << "fold " << f.fold << ": accuracy " << fixed(f.accuracy) << ", rules " << f.complexity.n_rules
                << ", size " << f.complexity.rule_base_size << "\n";
    std::cout << "mean accuracy: " << fixed(report.mean_accuracy) << " (std " << fixed(report.std_accuracy) << ")\n"
              << "mean rules: " << fixed(report.mean_rules, 2) << " (raw " << fixed(report.mean_raw_rules, 2) << ")\n"
              << "mean conditions per rule: " << fixed(report.mean_conditions_per_rule, 4) << "\n"
              << "mean rule base size: " << fixed(report.mean_rule_base_size, 2) << "\n"
              << "mean unique conditions: " << fixed(report.mean_unique_conditions, 2) << "\n";
    return 0;
  }

  if (extract_cmd->parsed()) {
    const FrrModel model = model_from_json(read_json(model_path));
    RuleBase rb = extract(model);
    if (prune) {
      if (data.empty() || target.empty()) throw UsageError("--prune-dead needs --data and --target");
      const TabularDataset ds = load_with_schema(data, target, schema);
      if (ds.n_features() != model.partitions.n_features()) throw DataError("data does not match the model's features");
      const RuleBase pruned = prune_dead(rb, ds.values, ds.n_features());
      for (std::size_t i = 0; i < ds.n_rows(); ++i)
        if (evaluate_rulebase(pruned, ds.row(i)).prediction != evaluate_rulebase(rb, ds.row(i)).prediction)
          throw DataError("pruning changed the prediction of training row " + std::to_string(i));
      rb = pruned;
    }
    fs::path text = out_text, json_path = out_json;
    if (text.empty()) text = fs::path(model_path).replace_extension(".rules.txt");
    if (json_path.empty()) json_path = fs::path(model_path).replace_extension(".rules.json");
    std::ofstream(text) << render_text(rb);
    write_json(rules_to_json(rb), json_path);
    print_complexity(rb);
    return 0;
  }

  if (predict->parsed()) {
    if (model_path.empty() == rules_path.empty()) throw UsageError("predict needs exactly one of --model or --rules");
    const PredictSource src = load_predict_source(model_path.empty() ? rules_path : model_path);
    const PartitionSet& partitions = src.model ? src.model->partitions : src.rules.partitions;
    const CsvTable table = read_csv_table(data);
    std::vector<std::size_t> columns;
    for (const auto& f : partitions.features()) {
      const auto it = std::find(table.header.begin(), table.header.end(), f.name);
      if (it == table.header.end()) throw DataError("data lacks feature column '" + f.name + "'");
      columns.push_back(static_cast<std::size_t>(it - table.header.begin()));
    }

    const std::size_t width = partitions.width();
    std::vector<std::string> errors(table.rows.size());
    std::vector<std::vector<double>> u1(table.rows.size());
    std::vector<double> valid_u1;
    std::vector<std::size_t> valid_rows;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& row = table.rows[i];
      if (row.size() != table.header.size()) {
        errors[i] = "expected " + std::to_string(table.header.size()) + " fields, got " + std::to_string(row.size());
        continue;
      }
      std::vector<std::string> cells;
      for (std::size_t c : columns) cells.push_back(row[c]);
      try {
        const std::vector<double> encoded = encode_row(partitions, cells);
        std::vector<std::string> warnings;
        u1[i] = fuzzify_row(partitions, encoded, &warnings);
        if (!warnings.empty()) {
          errors[i] = warnings.front();
          continue;
        }
      } catch (const DataError& e) {
        errors[i] = e.what();
        continue;
      }
      valid_rows.push_back(i);
      valid_u1.insert(valid_u1.end(), u1[i].begin(), u1[i].end());
    }

    std::vector<int> network;
    if (src.model && !valid_rows.empty()) {
      const auto nw = normalize_weights(src.model->weights, src.model->config, std::nullopt);
      network = predict_rows(valid_u1, width, nw, src.model->config);
    }

    std::ofstream file;
    if (!predict_out.empty()) {
      file.open(predict_out);
      if (!file) throw DataError("cannot write '" + predict_out + "'");
    }
    std::ostream& out = predict_out.empty() ? std::cout : file;
    out << "row,prediction" << (explain ? ",rule,truth" : "") << ",error\n";
    std::size_t next = 0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      out << i << ',';
      if (!errors[i].empty()) {
        out << (explain ? ",," : "") << ',' << csv_field(errors[i]) << '\n';
        continue;
      }
      const RuleEvaluation ev = evaluate_fuzzified(src.rules, u1[i]);
      const int label = src.model ? network[next] : ev.prediction;
      ++next;
      out << csv_field(src.rules.class_names.at(static_cast<std::size_t>(label)));
      if (explain) out << ',' << csv_field(rule_sentence(src.rules, ev.winning_rule)) << ',' << fixed(ev.truth, 6);
      out << ",\n";
    }
    return 0;
  }

  if (gradcheck->parsed()) {
    if (instances == 0) throw UsageError("--instances must be >= 1");
    if (!(epsilon > 0)) throw UsageError("--epsilon must be > 0");
    const RandomCheckReport r = random_gradient_check(instances, seed, epsilon);
    const bool ok = r.worst.max_relative_error <= 1e-4;
    std::cout << "instances: " << instances << "\nworst relative error: " << std::scientific << std::setprecision(6)
              << r.worst.max_relative_error << " (instance " << r.worst_instance << ", weight " << r.worst.worst_index
              << ")\n"
              << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : kExitCheckFailed;
  }

  if (benchmark->parsed()) {
    const FrrConfig config = opts.resolve(seed);
    if (folds < 2) throw UsageError("--folds must be >= 2");
    if (jobs < 1) throw UsageError("--jobs must be >= 1");
    BenchmarkOptions bo;
    bo.seeds = seeds.empty() ? std::vector<std::uint64_t>{seed} : seeds;
    bo.folds = folds;
    bo.jobs = jobs;
    bo.ablation.no_residual = no_residual;
    bo.ablation.fixed_beta = fixed_beta;
    bo.ablation.root_norm = root_ablation;
    if (fixed_beta && !(*fixed_beta >= 0 && *fixed_beta <= 1)) throw UsageError("--fixed-beta must lie in [0, 1]");
    const auto rows = run_benchmark(read_manifest(manifest), config, bo);
    write_benchmark_csv(rows, bo.ablation.any(), bench_out);
    bool failed = false;
    for (const auto& r : rows) {
      std::cout << r.name << ": ";
      if (!r.ok) {
        failed = true;
        std::cout << "failed (" << r.error << ")\n";
        continue;
      }
      std::cout << "accuracy " << fixed(r.accuracy_mean) << " (median " << fixed(r.accuracy_median) << ")";
      if (bo.ablation.any())
        std::cout << ", " << bo.ablation.describe() << " median " << fixed(r.ablation_median) << ", delta "
                  << fixed(r.delta);
      std::cout << ", rules " << fixed(r.rules, 2) << ", size " << fixed(r.rule_base_size, 2) << "\n";
    }
    return failed ? kExitData : 0;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: training diverged at epoch " << e.epoch() << ", batch " << e.batch() << ": " << e.what()
              << "\n";
    return kExitDiverged;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
