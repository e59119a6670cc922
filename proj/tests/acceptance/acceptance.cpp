// Acceptance checks. Each criterion prints detail lines followed by one
// "criterion N: PASS|FAIL ..." verdict; the exit status is 0 only when every
// requested criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frr/classifier.hpp"
#include "frr/evaluation.hpp"
#include "frr/fuzzify.hpp"
#include "frr/grad.hpp"
#include "frr/logic.hpp"
#include "frr/model.hpp"
#include "frr/rules.hpp"

namespace fs = std::filesystem;
using namespace frr;

namespace {

constexpr double kIrisAccuracy = 0.90;
constexpr double kIrisSeconds = 120;
constexpr double kPimaAccuracy = 0.66;
constexpr double kPimaSeconds = 600;
constexpr std::size_t kDefaultSizeBound = 45;
constexpr std::size_t kRandomConfigs = 20;
constexpr std::size_t kGradInstances = 25;
constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 30;
constexpr std::size_t kFidelitySeeds = 10;
constexpr double kRowSumTolerance = 1e-12;
constexpr std::size_t kTuples = 10000;
constexpr double kAxiomTolerance = 1e-12;
constexpr double kFoldTolerance = 1e-9;
constexpr double kOrderSlack = 1e-15;
constexpr double kProductTolerance = 1e-12;
constexpr double kMinimumGap = 1e-3;
constexpr double kKnotTolerance = 1e-12;
constexpr std::size_t kAblationSeeds = 5;

fs::path data_dir() { return FRR_DATA_DIR; }

std::vector<ManifestEntry> subset() { return read_manifest(data_dir() / "benchmark.csv"); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool verdict(int n, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  return pass;
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

bool cv_accuracy(int n, const std::string& name, double threshold, double max_seconds) {
  const auto start = std::chrono::steady_clock::now();
  const TabularDataset ds = load_dataset(data_dir() / (name + ".csv"), "class");
  const CvReport r = cross_validate(ds, FrrConfig{}, CvOptions{5, 0, 1});
  const double secs = seconds_since(start);
  for (const auto& f : r.folds) std::printf("  fold %zu accuracy %.4f\n", f.fold, f.accuracy);
  return verdict(n, r.mean_accuracy >= threshold && secs <= max_seconds,
                 fmt("%s 5-fold mean accuracy %.4f (need >= %.2f), %.1f s (limit %.0f s)", name.c_str(),
                     r.mean_accuracy, threshold, secs, max_seconds));
}

bool criterion_1() { return cv_accuracy(1, "iris", kIrisAccuracy, kIrisSeconds); }

bool criterion_2() { return cv_accuracy(2, "pima", kPimaAccuracy, kPimaSeconds); }

bool criterion_3() {
  std::size_t checked = 0, violations = 0, largest = 0;
  auto check = [&](const std::string& label, const FrrConfig& c, const RuleBase& rb, bool defaults) {
    const ComplexityReport r = complexity(rb);
    const bool ok = r.n_rules <= c.rules && r.max_conditions <= c.conditions &&
                    (!defaults || r.rule_base_size <= kDefaultSizeBound);
    ++checked;
    if (defaults) largest = std::max(largest, r.rule_base_size);
    if (!ok) {
      ++violations;
      std::printf("  violation %s: rules %zu/%zu, max conditions %zu/%zu, size %zu\n", label.c_str(), r.n_rules,
                  c.rules, r.max_conditions, c.conditions, r.rule_base_size);
    }
  };

  std::vector<TabularDataset> sets;
  std::vector<std::string> names;
  for (const auto& e : subset()) {
    sets.push_back(load_dataset(e.path, e.target));
    names.push_back(e.name);
  }
  for (std::size_t d = 0; d < sets.size(); ++d)
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      FrrConfig c;
      c.seed = seed;
      check(names[d] + " defaults", c, extract(train_model(sets[d], c).model), true);
    }

  std::mt19937_64 rng(20);
  const std::vector<TNormSpec> norms{TNormSpec::product(), TNormSpec::minimum(), TNormSpec::aczel_alsina(2.0)};
  for (std::size_t i = 0; i < kRandomConfigs; ++i) {
    FrrConfig c;
    c.rules = 1 + rng() % 20;
    c.conditions = 1 + rng() % 5;
    c.labels = 2 + rng() % 4;
    c.epochs = 30 + rng() % 121;
    c.tnorm = norms[rng() % norms.size()];
    c.cancel_penalty = 0.02 * static_cast<double>(rng() % 6);
    c.seed = rng();
    const std::size_t d = rng() % sets.size();
    const RuleBase rb = extract(train_model(sets[d], c).model);
    std::printf("  config %zu: %s R=%zu A=%zu V=%zu epochs=%zu -> %zu rules, max %zu conditions\n", i,
                names[d].c_str(), c.rules, c.conditions, c.labels, c.epochs, complexity(rb).n_rules,
                complexity(rb).max_conditions);
    check(names[d] + " random " + std::to_string(i), c, rb, false);
  }
  return verdict(3, violations == 0,
                 fmt("%zu rule bases, %zu violations; largest default rule base size %zu (bound %zu)", checked,
                     violations, largest, kDefaultSizeBound));
}

bool criterion_4() {
  const auto start = std::chrono::steady_clock::now();
  const RandomCheckReport r = random_gradient_check(kGradInstances, 4);
  const double secs = seconds_since(start);
  std::printf("  worst instance %zu, weight %zu: analytic %.10g numeric %.10g\n", r.worst_instance,
              r.worst.worst_index, r.worst.analytic, r.worst.numeric);
  return verdict(4, r.worst.max_relative_error <= kGradTolerance && secs <= kGradSeconds,
                 fmt("worst relative error %.3e over %zu instances (need <= %.0e), %.2f s", r.worst.max_relative_error,
                     kGradInstances, kGradTolerance, secs));
}

bool criterion_5() {
  std::size_t rows = 0, mismatches = 0, models = 0;
  for (const char* name : {"iris", "wine", "monk-2", "pima"}) {
    const TabularDataset ds = load_dataset(data_dir() / (std::string(name) + ".csv"), "class");
    std::size_t local = 0;
    for (std::uint64_t seed = 0; seed < kFidelitySeeds; ++seed) {
      FrrConfig c;
      c.tnorm = TNormSpec::product();
      c.seed = seed;
      const FrrModel model = train_model(ds, c).model;
      const RuleBase rb = extract(model);
      const auto network = predict_dataset(model, ds);
      for (std::size_t i = 0; i < ds.n_rows(); ++i) local += evaluate_rulebase(rb, ds.row(i)).prediction != network[i];
      rows += ds.n_rows();
      ++models;
    }
    std::printf("  %s: %zu seeds, %zu disagreements\n", name, kFidelitySeeds, local);
    mismatches += local;
  }
  return verdict(5, mismatches == 0,
                 fmt("rule base matches the network on %zu/%zu rows across %zu models", rows - mismatches, rows, models));
}

bool criterion_6() {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z;
  double worst_sum = 0, worst_formula = 0;
  std::size_t rows = 0, hard_mismatch = 0;
  for (double beta : {0.0, 0.25, 0.5, 1.0})
    for (std::size_t m = 2; m <= 50; ++m)
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> row(m);
        for (auto& v : row) v = z(rng);
        if (trial % 5 == 0) row[rng() % m] = row[0];  // ties
        const auto f = indicator_relaxed(row, beta);
        double sum = 0;
        for (double v : f) sum += v;
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        // Argmax weight 1 / (1 + beta (m - 1)), every other entry beta times that.
        const std::size_t top = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        const double lead = 1.0 / (1.0 + beta * static_cast<double>(m - 1));
        for (std::size_t j = 0; j < m; ++j)
          worst_formula = std::max(worst_formula, std::abs(f[j] - (j == top ? lead : beta * lead)));
        if (beta == 0.0 && f != indicator_hard(row)) ++hard_mismatch;
        ++rows;
      }
  std::printf("  worst deviation from the closed form %.3e\n", worst_formula);
  return verdict(6, worst_sum <= kRowSumTolerance && worst_formula <= kRowSumTolerance && hard_mismatch == 0,
                 fmt("%zu rows, worst |sum - 1| %.3e (need <= %.0e), beta=0 differs from hard on %zu rows", rows,
                     worst_sum, kRowSumTolerance, hard_mismatch));
}

bool criterion_7() {
  const std::vector<TNormSpec> specs{TNormSpec::product(),          TNormSpec::minimum(),
                                     TNormSpec::aczel_alsina(1.0),  TNormSpec::aczel_alsina(2.0),
                                     TNormSpec::aczel_alsina(10.0), TNormSpec::aczel_alsina(100.0)};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool axioms = true;
  for (const auto& s : specs) {
    auto t = [&](double x, double y) { return tnorm<double>(s, {x, y}); };
    double comm = 0, neutral = 0, assoc = 0, fold = 0, mono = 0, above_min = 0;
    for (std::size_t i = 0; i < kTuples; ++i) {
      const double x = u(rng), y = u(rng), w = u(rng), bump = u(rng) * (1 - y);
      comm = std::max(comm, std::abs(t(x, y) - t(y, x)));
      neutral = std::max(neutral, std::abs(t(x, 1.0) - x));
      assoc = std::max(assoc, std::abs(t(t(x, y), w) - t(x, t(y, w))));
      fold = std::max(fold, std::abs(t(t(x, y), w) - tnorm<double>(s, {x, y, w})));
      mono = std::max(mono, t(x, y) - t(x, y + bump));
      above_min = std::max(above_min, tnorm<double>(s, {x, y, w}) - std::min({x, y, w}));
    }
    const bool ok = comm <= kAxiomTolerance && neutral <= kAxiomTolerance && assoc <= kFoldTolerance &&
                    fold <= kFoldTolerance && mono <= kOrderSlack && above_min <= kOrderSlack;
    axioms = axioms && ok;
    std::printf("  %-16s comm %.1e neutral %.1e assoc %.1e fold %.1e mono %.1e above-min %.1e %s\n",
                to_string(s).c_str(), comm, neutral, assoc, fold, mono, above_min, ok ? "ok" : "VIOLATED");
  }

  double product_gap = 0;
  for (std::size_t i = 0; i < kTuples; ++i) {
    std::vector<double> xs(1 + rng() % 6);
    double p = 1;
    for (auto& x : xs) p *= (x = u(rng));
    product_gap = std::max(product_gap, std::abs(tnorm<double>(TNormSpec::aczel_alsina(1.0), xs) - p));
  }
  std::printf("  AczelAlsina(1) vs product: %.3e (need <= %.0e)\n", product_gap, kProductTolerance);

  double min_gap = 0, at_x = 0;
  for (int i = 0; i <= 90; ++i)
    for (int k = 0; k <= 90; ++k) {
      const double x = 0.05 + 0.01 * i, y = 0.05 + 0.01 * k;
      const double g = std::abs(tnorm<double>(TNormSpec::aczel_alsina(100.0), {x, y}) - std::min(x, y));
      if (g > min_gap) min_gap = g, at_x = x == y ? x : -1;
    }
  // On the diagonal T(x, x) = x^(2^(1/100)), independent of the implementation.
  double diagonal = 0;
  for (int i = 0; i <= 90; ++i) {
    const double x = 0.05 + 0.01 * i;
    diagonal = std::max(diagonal, x - std::pow(x, std::pow(2.0, 0.01)));
  }
  std::printf("  AczelAlsina(100) vs min on the grid: %.4e at x = y = %.2f; closed-form diagonal maximum %.4e\n",
              min_gap, at_x, diagonal);

  const bool pass = axioms && product_gap <= kProductTolerance && min_gap <= kMinimumGap;
  return verdict(7, pass,
                 fmt("axioms %s on %zu tuples per t-norm, AA(1)-product %.1e, |AA(100) - min| %.3e (need <= %.0e)",
                     axioms ? "hold" : "violated", kTuples, product_gap, min_gap, kMinimumGap));
}

bool criterion_8() {
  std::size_t features = 0, failures = 0;
  for (const auto& e : subset()) {
    const TabularDataset ds = load_dataset(e.path, e.target);
    const PartitionSet p = build_partitions(ds);
    for (std::size_t j = 0; j < p.n_features(); ++j) {
      const FeaturePartition& fp = p.feature(j);
      ++features;
      if (fp.kind == FeatureKind::categorical) continue;
      bool ok = true;
      for (const auto& label : fp.variable.labels) {
        const TrapezoidMF& mf = label.mf;
        ok = ok && mf.a <= mf.b && mf.b <= mf.c && mf.c <= mf.d;
        for (double x : {mf.b, mf.c, 0.5 * (mf.b + mf.c)}) ok = ok && membership(mf, x) == 1.0;
      }
      for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        const double x = ds.row(i)[j];
        if (std::isnan(x)) continue;
        double best = 0;
        for (const auto& label : fp.variable.labels) best = std::max(best, membership(label.mf, x));
        ok = ok && best > 0;
      }
      if (!ok) {
        ++failures;
        std::printf("  %s.%s fails ordering, plateau or coverage\n", e.name.c_str(), fp.name.c_str());
      }
    }
  }

  std::vector<double> column(101);
  for (int i = 0; i <= 100; ++i) column[i] = i;
  const LinguisticVariable v = build_linguistic_variable(0, column);
  const double table[3][4] = {{0, 0, 20, 40}, {20, 30, 50, 60}, {40, 60, 100, 100}};
  double worst = v.labels.size() == 3 ? 0.0 : INFINITY;
  for (std::size_t l = 0; l < std::min<std::size_t>(3, v.labels.size()); ++l) {
    const TrapezoidMF& mf = v.labels[l].mf;
    const double got[4] = {mf.a, mf.b, mf.c, mf.d};
    std::printf("  %-6s (%g, %g, %g, %g)\n", v.labels[l].name.c_str(), got[0], got[1], got[2], got[3]);
    for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(got[k] - table[l][k]));
  }
  return verdict(8, failures == 0 && worst <= kKnotTolerance,
                 fmt("%zu features checked, %zu failing; uniform 0..100 table max knot error %.1e", features, failures,
                     worst));
}

bool criterion_9() {
  const auto start = std::chrono::steady_clock::now();
  BenchmarkOptions options;
  options.seeds.clear();
  for (std::uint64_t s = 0; s < kAblationSeeds; ++s) options.seeds.push_back(s);
  options.ablation.fixed_beta = 0.0;
  const auto rows = run_benchmark({{data_dir() / "pima.csv", "class", "pima"}}, FrrConfig{}, options);
  const BenchmarkRow& r = rows.at(0);
  if (!r.ok) return verdict(9, false, "pima benchmark failed: " + r.error);
  for (std::size_t i = 0; i < r.seed_accuracy.size(); ++i)
    std::printf("  seed %zu: annealed %.4f, fixed beta=0 %.4f\n", i, r.seed_accuracy[i], r.ablation_seed_accuracy[i]);
  return verdict(9, r.accuracy_median >= r.ablation_median,
                 fmt("median annealed %.4f vs fixed beta=0 %.4f, delta %+.2f points, %.1f s",
                     r.accuracy_median, r.ablation_median, 100 * r.delta, seconds_since(start)));
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool criterion_10() {
  const fs::path dir = fs::temp_directory_path() / "frr_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto run = [&](const std::string& tag, const std::string& extra) {
    const std::string cmd = std::string("\"") + FRR_CLI + "\" evaluate --data \"" + (data_dir() / "wine.csv").string() +
                            "\" --target class --seed 11 --report \"" + (dir / (tag + ".csv")).string() +
                            "\" --summary \"" + (dir / (tag + ".json")).string() + "\"" + extra + " > /dev/null";
    return std::system(cmd.c_str()) == 0;
  };
  if (!run("a", "") || !run("b", "") || !run("c", " --jobs 3"))
    return verdict(10, false, "evaluate exited with an error");
  bool same = true;
  for (const char* ext : {".csv", ".json"}) {
    const std::string a = slurp(dir / (std::string("a") + ext));
    same = same && !a.empty() && a == slurp(dir / (std::string("b") + ext)) && a == slurp(dir / (std::string("c") + ext));
  }
  return verdict(10, same, same ? "two identical runs and a 3-job run wrote byte-identical fold and summary files"
                                : "metric files differ between runs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> criteria;
  app.add_option("--criterion", criteria, "criterion numbers to run (default: all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  if (criteria.empty())
    for (int i = 1; i <= 10; ++i) criteria.push_back(i);

  const std::vector<std::function<bool()>> table{criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                                 criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};
  bool all = true;
  for (int n : criteria) {
    try {
      all = table[static_cast<std::size_t>(n - 1)]() && all;
    } catch (const std::exception& e) {
      all = verdict(n, false, std::string("threw: ") + e.what()) && false;
    }
  }
  return all ? 0 : 1;
}
