#include "frr/grad.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "frr/error.hpp"
#include "frr/kernels.hpp"

namespace frr {

OptimizerState make_optimizer(const FrrWeights& weights, const FrrConfig& config) {
  OptimizerState state;
  state.first_moment.assign(weights.values.size(), 0.0);
  state.second_moment.assign(weights.values.size(), 0.0);
  state.learning_rate = config.learning_rate;
  return state;
}

void adam_step(OptimizerState& state, FrrWeights& weights, const GradientSet& grad) {
  if (grad.values.size() != weights.values.size() || state.first_moment.size() != weights.values.size())
    throw ShapeError("optimizer, gradient and weights disagree in size");
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < weights.values.size(); ++i) {
    const double g = grad.values[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    weights.values[i] -= state.learning_rate * (m / c1) / (std::sqrt(v / c2) + state.epsilon);
  }
}

namespace {

template <class Real>
Real penalty_of(const NormalizedWeightsT<Real>& nw) {
  const ParameterLayout& layout = *nw.layout;
  Real sum = 0;
  for (std::size_t r = 0; r < layout.rules(); ++r)
    for (std::size_t k = 0; k < layout.conditions(); ++k) sum += nw.norm[layout.silencer(r, k)];
  return sum;
}

template <class Real>
Real cross_entropy_of(std::span<const Real> scores, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= scores.size()) throw std::out_of_range("target class out of range");
  const Real peak = *std::max_element(scores.begin(), scores.end());
  Real total = 0;
  for (Real s : scores) total += std::exp(s - peak);
  return peak + std::log(total) - scores[static_cast<std::size_t>(target)];
}

// d/da and d/db of combine(a, b) as used in the forward pass.
std::pair<double, double> combine_partials(bool with_tnorm, const TNormSpec& spec, double a, double b) {
  if (!with_tnorm) return {b, a};
  const double xs[2] = {a, b};
  double g[2];
  tnorm_partials(spec, xs, g);
  return {g[0], g[1]};
}

}  // namespace

double cancellation_penalty(const NormalizedWeights& nw) { return penalty_of(nw); }

double cross_entropy(std::span<const double> scores, int target) { return cross_entropy_of<double>(scores, target); }

LossBreakdown loss(std::span<const double> scores, int target, const NormalizedWeights& nw, const FrrConfig& config) {
  LossBreakdown out;
  out.cross_entropy = cross_entropy(scores, target);
  out.cancellation_penalty = cancellation_penalty(nw);
  out.total = out.cross_entropy + config.cancel_penalty * out.cancellation_penalty;
  return out;
}

LossBreakdown loss(std::span<const double> scores, int target, const FrrWeights& weights, const FrrConfig& config) {
  return loss(scores, target, normalize_weights(weights, config, std::nullopt), config);
}

void accumulate_normalized_gradient(const ForwardCache& cache, int target, const NormalizedWeights& nw,
                                    const FrrConfig& config, std::span<double> acc) {
  if (!cache.train) throw std::logic_error("backward needs a train-mode forward cache");
  const ParameterLayout& layout = *nw.layout;
  const ModelShape& shape = layout.shape();
  const std::size_t M = shape.features();
  const std::size_t A = layout.conditions();
  const std::size_t R = layout.rules();
  const std::size_t C = shape.classes;
  if (target < 0 || static_cast<std::size_t>(target) >= C) throw std::out_of_range("target class out of range");
  if (acc.size() != layout.size()) throw ShapeError("gradient buffer does not match the layout");

  const auto& norm = nw.norm;
  const auto& select = nw.select;
  const auto& ste = nw.ste;

  // softmax(u4) - onehot(target)
  std::vector<double> g4(C);
  const double peak = *std::max_element(cache.scores.begin(), cache.scores.end());
  double total = 0;
  for (std::size_t c = 0; c < C; ++c) total += (g4[c] = std::exp(cache.scores[c] - peak));
  for (std::size_t c = 0; c < C; ++c) g4[c] /= total;
  g4[static_cast<std::size_t>(target)] -= 1.0;

  std::vector<double> d_rule(R, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    const int s = cache.winner[c];
    if (s < 0) continue;
    const std::size_t w = layout.decision_row(static_cast<std::size_t>(s)) + c;
    d_rule[static_cast<std::size_t>(s)] += g4[c] * select[w] * norm[w];
    acc[w] += g4[c] * cache.rule_truth[static_cast<std::size_t>(s)] * ste[w];
  }

  const bool with_tnorm = config.weights_in_tnorm && config.tnorm.kind != TNormKind::product;
  std::vector<double> dT(A), du2(M);
  for (std::size_t r = 0; r < R; ++r) {
    const double dr = d_rule[r];
    if (dr == 0.0) continue;
    std::span<const double> terms(cache.rule_terms.data() + r * A, A);
    tnorm_partials(config.tnorm, terms, dT);
    const double inv_n = 1.0 / static_cast<double>(cache.active[r]);
    std::fill(du2.begin(), du2.end(), 0.0);
    for (std::size_t k = 0; k < A; ++k) {
      double d_term = dT[k];
      if (config.use_root_norm) {
        const double x = std::max(cache.silenced[r * A + k], 1e-300);
        d_term *= inv_n * std::pow(x, inv_n - 1.0);
      }
      const double d_silenced = dr * (d_term + cache.state.gamma);
      const std::size_t s = layout.silencer(r, k);
      const double slot = cache.slot_value[r * A + k];
      acc[s] += d_silenced * slot * ste[s];
      acc[s + 1] += d_silenced * ste[s + 1];
      const double d_slot = d_silenced * select[s] * norm[s];
      if (d_slot == 0.0) continue;
      const std::size_t off = layout.slot_row(r, k);
      for (std::size_t j = 0; j < M; ++j) {
        const double a = select[off + j] * norm[off + j];
        const auto [da, db] = combine_partials(with_tnorm, config.tnorm, a, cache.feature_value[r * M + j]);
        acc[off + j] += d_slot * da * ste[off + j];
        du2[j] += d_slot * db;
      }
    }
    std::size_t base = 0;
    for (std::size_t j = 0; j < M; ++j) {
      const std::size_t off = layout.label_row(r, j);
      if (du2[j] != 0.0) {
        for (std::size_t v = 0; v < shape.terms[j]; ++v) {
          const double a = select[off + v] * norm[off + v];
          const auto [da, db] = combine_partials(with_tnorm, config.tnorm, a, cache.input[base + v]);
          (void)db;
          acc[off + v] += du2[j] * da * ste[off + v];
        }
      }
      base += shape.terms[j];
    }
  }
}

GradientSet finish_gradient(std::span<const double> normalized_grad, const NormalizedWeights& nw,
                            const FrrConfig& config) {
  const ParameterLayout& layout = *nw.layout;
  if (normalized_grad.size() != layout.size()) throw ShapeError("gradient buffer does not match the layout");
  std::vector<double> g(normalized_grad.begin(), normalized_grad.end());
  for (std::size_t r = 0; r < layout.rules(); ++r)
    for (std::size_t k = 0; k < layout.conditions(); ++k) g[layout.silencer(r, k)] += config.cancel_penalty;

  GradientSet out(layout);
  const double inv_t = 1.0 / config.temperature;
  for (const auto& [offset, length] : layout.rows()) {
    double dot = 0;
    for (std::size_t i = 0; i < length; ++i) dot += g[offset + i] * nw.norm[offset + i];
    for (std::size_t i = 0; i < length; ++i)
      out.values[offset + i] = inv_t * nw.norm[offset + i] * (g[offset + i] - dot);
  }
  return out;
}

GradientSet backward(const ForwardCache& cache, int target, const FrrWeights& weights, const FrrConfig& config) {
  const auto nw = normalize_weights(weights, config, cache.state);
  std::vector<double> acc(weights.layout.size(), 0.0);
  accumulate_normalized_gradient(cache, target, nw, config, acc);
  return finish_gradient(acc, nw, config);
}

namespace {

long double loss_long(const std::vector<long double>& raw, const ParameterLayout& layout,
                      std::span<const double> u1, int target, const FrrConfig& config, const ScheduleState& state) {
  const auto nw = normalize_weights<long double>(raw, layout, config, state);
  std::vector<long double> scores(layout.shape().classes);
  forward_scores<long double>(u1, nw, config, scores, nullptr);
  return cross_entropy_of<long double>(scores, target) +
         static_cast<long double>(config.cancel_penalty) * penalty_of(nw);
}

}  // namespace

GradientCheck gradient_error(const FrrWeights& weights, std::span<const double> u1, int target,
                             const FrrConfig& config, const ScheduleState& state, double epsilon) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be > 0");
  const ForwardResult fwd = forward(u1, weights, config, state);
  if (!std::isfinite(cross_entropy(fwd.scores, target))) throw std::domain_error("loss is not finite");
  const GradientSet analytic = backward(fwd.cache, target, weights, config);

  std::vector<long double> raw(weights.values.begin(), weights.values.end());
  GradientCheck report;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const long double saved = raw[i];
    raw[i] = saved + epsilon;
    const long double up = loss_long(raw, weights.layout, u1, target, config, state);
    raw[i] = saved - epsilon;
    const long double down = loss_long(raw, weights.layout, u1, target, config, state);
    raw[i] = saved;
    if (!std::isfinite(static_cast<double>(up)) || !std::isfinite(static_cast<double>(down)))
      throw std::domain_error("loss is not finite");
    const double numeric = static_cast<double>((up - down) / (2.0L * epsilon));
    const double a = analytic.values[i];
    const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (i == 0 || err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_index = i;
      report.analytic = a;
      report.numeric = numeric;
    }
  }
  return report;
}

GradientCheck finite_difference_check(const FrrWeights& weights, std::span<const double> u1, int target,
                                      const FrrConfig& config, double gamma, double epsilon) {
  FrrConfig smooth = config;
  smooth.ste = SteMode::off;
  smooth.tnorm = TNormSpec::product();
  smooth.weights_in_tnorm = false;
  smooth.use_root_norm = false;
  return gradient_error(weights, u1, target, smooth, ScheduleState{0, 1.0, gamma}, epsilon);
}

RandomCheckReport random_gradient_check(std::size_t instances, std::uint64_t seed, double epsilon) {
  if (instances == 0) throw std::invalid_argument("need at least one instance");
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RandomCheckReport report;
  for (std::size_t i = 0; i < instances; ++i) {
    ModelShape shape;
    shape.terms.resize(pick(2, 4));
    for (auto& t : shape.terms) t = pick(2, 4);
    shape.classes = pick(2, 3);
    FrrConfig config;
    config.rules = pick(2, 5);
    config.conditions = pick(1, 3);
    config.keep_bias = 0.0;
    config.seed = rng();
    const FrrWeights weights = init_weights(config, shape);
    std::vector<double> u1(shape.width());
    for (double& v : u1) v = unit(rng);
    const int target = static_cast<int>(pick(0, shape.classes - 1));
    const GradientCheck check = finite_difference_check(weights, u1, target, config, 0.1, epsilon);
    if (i == 0 || check.max_relative_error > report.worst.max_relative_error) {
      report.worst = check;
      report.worst_instance = i;
    }
  }
  return report;
}

void TrainingHistory::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,loss,train_accuracy,beta,gamma\n";
  out.precision(17);
  for (const auto& e : epochs)
    out << e.epoch << ',' << e.loss << ',' << e.train_accuracy << ',' << e.beta << ',' << e.gamma << '\n';
}

FitResult fit(std::span<const double> fuzzified, std::span<const int> targets, const ModelShape& shape,
              const FrrConfig& config_in) {
  config_in.validate();
  const std::size_t n = targets.size();
  const std::size_t width = shape.width();
  if (n == 0) throw std::invalid_argument("cannot fit on zero rows");
  if (fuzzified.size() != n * width) throw ShapeError("fuzzified matrix does not match rows x width");

  FrrConfig config = config_in;
  std::vector<std::size_t> counts(shape.classes, 0);
  for (int t : targets) {
    if (t < 0 || static_cast<std::size_t>(t) >= shape.classes) throw std::out_of_range("target class out of range");
    ++counts[static_cast<std::size_t>(t)];
  }
  config.default_class = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());

  FitResult result;
  result.weights = init_weights(config, shape);
  result.default_class = config.default_class;
  OptimizerState opt = make_optimizer(result.weights, config);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const ScheduleState state = schedule_step(epoch, config);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      std::span<const std::size_t> batch(order.data() + start, stop - start);
      const auto nw = normalize_weights(result.weights, config, state);
      BatchGradient bg = batch_gradient(fuzzified, width, targets, batch, nw, config);
      const double rows = static_cast<double>(batch.size());
      for (double& g : bg.normalized_grad) g /= rows;
      const double batch_loss = bg.cross_entropy_sum / rows + config.cancel_penalty * cancellation_penalty(nw);
      GradientSet grad = finish_gradient(bg.normalized_grad, nw, config);
      bool finite = std::isfinite(batch_loss);
      for (double g : grad.values) finite = finite && std::isfinite(g);
      if (!finite) throw TrainingDiverged(epoch, batch_index, "non-finite loss or gradient");
      adam_step(opt, result.weights, grad);
      for (double w : result.weights.values)
        if (!std::isfinite(w)) throw TrainingDiverged(epoch, batch_index, "non-finite weights after update");
      loss_sum += batch_loss * rows;
    }
    const auto infer = normalize_weights(result.weights, config, std::nullopt);
    const std::vector<int> predicted = predict_rows(fuzzified, width, infer, config);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += predicted[i] == targets[i];
    result.history.epochs.push_back({epoch, loss_sum / static_cast<double>(n),
                                     static_cast<double>(correct) / static_cast<double>(n), state.beta, state.gamma});
  }
  return result;
}

}  // namespace frr
