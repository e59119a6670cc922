// Serial reference kernels against their OpenMP versions on a synthetic batch.

#include <chrono>
#include <cstdio>
#include <numeric>
#include <random>
#include <vector>

#include <CLI11.hpp>

#include "frr/kernels.hpp"
#include "frr/model.hpp"

using namespace frr;

namespace {

template <class F>
double best_ms(int repeats, F&& body) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel benchmark: serial reference vs OpenMP"};
  std::size_t rows = 4096, features = 16, classes = 3;
  int repeats = 5, threads = 0;
  app.add_option("--rows", rows)->capture_default_str();
  app.add_option("--features", features)->capture_default_str();
  app.add_option("--classes", classes)->capture_default_str();
  app.add_option("--repeats", repeats)->capture_default_str();
  app.add_option("--threads", threads, "0: runtime default");
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) set_threads(threads);

  FrrConfig config;
  const ModelShape shape{std::vector<std::size_t>(features, 3), classes};
  const FrrWeights weights = init_weights(config, shape);
  const NormalizedWeights nw = normalize_weights(weights, config, ScheduleState{0, 0.5, 0.05});
  const NormalizedWeights infer = normalize_weights(weights, config, std::nullopt);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> u1(rows * shape.width());
  for (double& v : u1) v = unit(rng);
  std::vector<int> targets(rows);
  for (auto& t : targets) t = static_cast<int>(rng() % classes);
  std::vector<std::size_t> batch(rows);
  std::iota(batch.begin(), batch.end(), 0);

  BatchGradient ref, par;
  const double t_ref = best_ms(repeats, [&] { ref = batch_gradient_reference(u1, shape.width(), targets, batch, nw, config); });
  const double t_par = best_ms(repeats, [&] { par = batch_gradient(u1, shape.width(), targets, batch, nw, config); });
  double diff = std::abs(ref.cross_entropy_sum - par.cross_entropy_sum);
  for (std::size_t i = 0; i < ref.normalized_grad.size(); ++i)
    diff = std::max(diff, std::abs(ref.normalized_grad[i] - par.normalized_grad[i]));

  std::vector<int> p_ref, p_par;
  const double t_pref = best_ms(repeats, [&] { p_ref = predict_rows_reference(u1, shape.width(), infer, config); });
  const double t_ppar = best_ms(repeats, [&] { p_par = predict_rows(u1, shape.width(), infer, config); });

  std::printf("threads %d, rows %zu, width %zu\n", max_threads(), rows, shape.width());
  std::printf("%-16s %12s %12s %9s\n", "kernel", "serial_ms", "parallel_ms", "speedup");
  std::printf("%-16s %12.3f %12.3f %9.2f\n", "batch_gradient", t_ref, t_par, t_ref / t_par);
  std::printf("%-16s %12.3f %12.3f %9.2f\n", "predict_rows", t_pref, t_ppar, t_pref / t_ppar);
  std::printf("max |serial - parallel| gradient: %.3e\n", diff);
  std::printf("predictions identical: %s\n", p_ref == p_par ? "yes" : "no");
  return p_ref == p_par ? 0 : 1;
}
