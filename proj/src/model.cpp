#include "frr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "frr/error.hpp"

namespace frr {

std::string to_string(SteMode mode) {
  switch (mode) {
    case SteMode::identity: return "identity";
    case SteMode::argmax: return "argmax";
    case SteMode::off: return "off";
  }
  return "?";
}

SteMode parse_ste_mode(const std::string& name) {
  if (name == "identity") return SteMode::identity;
  if (name == "argmax") return SteMode::argmax;
  if (name == "off") return SteMode::off;
  throw std::invalid_argument("unknown STE mode '" + name + "'");
}

void FrrConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(rules >= 1, "rules (R) must be >= 1");
  require(conditions >= 1, "conditions per rule (A) must be >= 1");
  require(labels >= 2, "labels per feature (V) must be >= 2");
  require(temperature > 0 && std::isfinite(temperature), "temperature must be > 0");
  require(beta_min >= 0 && beta_max <= 1 && beta_min <= beta_max, "need 0 <= beta_min <= beta_max <= 1");
  require(gamma_max >= 0 && std::isfinite(gamma_max), "gamma_max must be >= 0");
  require(batch_size >= 1, "batch size must be >= 1");
  require(learning_rate > 0 && std::isfinite(learning_rate), "learning rate must be > 0");
  require(cancel_penalty >= 0 && std::isfinite(cancel_penalty), "cancellation penalty must be >= 0");
  require(std::isfinite(keep_bias), "keep bias must be finite");
  require(default_class >= 0, "default class must be a class index");
  tnorm.validate();
}

std::size_t ModelShape::width() const { return std::accumulate(terms.begin(), terms.end(), std::size_t{0}); }

ParameterLayout::ParameterLayout(ModelShape shape, std::size_t rules, std::size_t conditions)
    : shape_(std::move(shape)), rules_(rules), conditions_(conditions) {
  for (std::size_t t : shape_.terms) {
    label_offsets_.push_back(label_width_);
    label_width_ += t;
  }
  rule_stride_ = label_width_ + conditions_ * shape_.features() + 2 * conditions_;
  size_ = rules_ * rule_stride_ + rules_ * shape_.classes;
  for (std::size_t r = 0; r < rules_; ++r) {
    for (std::size_t j = 0; j < shape_.features(); ++j) rows_.emplace_back(label_row(r, j), shape_.terms[j]);
    for (std::size_t k = 0; k < conditions_; ++k) rows_.emplace_back(slot_row(r, k), shape_.features());
    for (std::size_t k = 0; k < conditions_; ++k) rows_.emplace_back(silencer(r, k), 2);
  }
  for (std::size_t r = 0; r < rules_; ++r) rows_.emplace_back(decision_row(r), shape_.classes);
}

FrrWeights init_weights(const FrrConfig& config, const ModelShape& shape) {
  if (shape.features() == 0 || shape.classes < 2) throw ShapeError("model needs >= 1 feature and >= 2 classes");
  for (std::size_t t : shape.terms)
    if (t == 0) throw ShapeError("every feature needs at least one term");
  FrrWeights w(ParameterLayout(shape, config.rules, config.conditions));
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : w.values) v = normal(rng);
  const ParameterLayout& layout = w.layout;
  for (std::size_t r = 0; r < layout.rules(); ++r)
    for (std::size_t k = 0; k < layout.conditions(); ++k) {
      w.values[layout.silencer(r, k)] += 0.5 * config.keep_bias;
      w.values[layout.silencer(r, k) + 1] -= 0.5 * config.keep_bias;
    }
  return w;
}

template <class Real>
void normalize_row(std::span<const Real> row, double temperature, std::span<Real> out) {
  const Real peak = *std::max_element(row.begin(), row.end());
  Real total = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    out[i] = std::exp((row[i] - peak) / static_cast<Real>(temperature));
    total += out[i];
  }
  for (std::size_t i = 0; i < row.size(); ++i) out[i] /= total;
}

std::vector<double> normalize_row(std::span<const double> row, double temperature) {
  if (row.empty()) throw std::invalid_argument("cannot normalise an empty row");
  if (!(temperature > 0)) throw std::invalid_argument("temperature must be > 0");
  std::vector<double> out(row.size());
  normalize_row<double>(row, temperature, out);
  return out;
}

namespace {

template <class Real>
std::size_t argmax_of(std::span<const Real> row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i)
    if (row[i] > row[best]) best = i;
  return best;
}

}  // namespace

std::size_t argmax_index(std::span<const double> row) {
  if (row.empty()) throw std::invalid_argument("argmax of an empty row");
  return argmax_of(row);
}

std::vector<double> indicator_hard(std::span<const double> row) {
  std::vector<double> out(row.size(), 0.0);
  out[argmax_index(row)] = 1.0;
  return out;
}

std::vector<double> indicator_relaxed(std::span<const double> row, double beta) {
  if (!(beta >= 0 && beta <= 1)) throw std::invalid_argument("beta must lie in [0, 1]");
  const std::size_t best = argmax_index(row);
  const double denom = 1.0 + beta * static_cast<double>(row.size() - 1);
  std::vector<double> out(row.size(), beta / denom);
  out[best] = 1.0 / denom;
  return out;
}

ScheduleState schedule_step(std::size_t epoch, const FrrConfig& config) {
  if (epoch > config.epochs) throw std::invalid_argument("epoch beyond the configured schedule");
  const double progress =
      config.epochs == 0 ? 0.0 : static_cast<double>(epoch) / static_cast<double>(config.epochs);
  return {epoch, config.beta_max - (config.beta_max - config.beta_min) * progress, config.gamma_max * (1.0 - progress)};
}

template <class Real>
NormalizedWeightsT<Real> normalize_weights(const std::vector<Real>& raw, const ParameterLayout& layout,
                                           const FrrConfig& config, const std::optional<ScheduleState>& state) {
  if (raw.size() != layout.size()) throw ShapeError("weight vector does not match its layout");
  NormalizedWeightsT<Real> nw;
  nw.layout = &layout;
  nw.train = state.has_value();
  nw.beta = state ? state->beta : 0.0;
  nw.gamma = state ? state->gamma : 0.0;
  nw.norm.resize(raw.size());
  nw.select.resize(raw.size());
  nw.ste.resize(raw.size());

  const std::size_t decision_start = layout.decision_row(0);
  for (const auto& [offset, length] : layout.rows()) {
    std::span<const Real> in(raw.data() + offset, length);
    std::span<Real> out(nw.norm.data() + offset, length);
    normalize_row<Real>(in, config.temperature, out);
    const std::size_t best = argmax_of<Real>(std::span<const Real>(out.data(), length));
    // The decision layer keeps a hard selection in both modes.
    const double beta = (nw.train && offset < decision_start) ? nw.beta : 0.0;
    const Real denom = 1 + static_cast<Real>(beta) * static_cast<Real>(length - 1);
    for (std::size_t i = 0; i < length; ++i) {
      const Real sel = i == best ? 1 / denom : static_cast<Real>(beta) / denom;
      nw.select[offset + i] = sel;
      Real factor = 0;
      if (config.ste == SteMode::identity || (config.ste == SteMode::argmax && i == best)) factor = 1;
      nw.ste[offset + i] = sel + factor * out[i];
    }
  }

  nw.keep.resize(layout.rules() * layout.conditions());
  for (std::size_t r = 0; r < layout.rules(); ++r)
    for (std::size_t k = 0; k < layout.conditions(); ++k) {
      const std::size_t s = layout.silencer(r, k);
      nw.keep[r * layout.conditions() + k] = nw.norm[s] >= nw.norm[s + 1];
    }
  nw.consequent.resize(layout.rules());
  for (std::size_t r = 0; r < layout.rules(); ++r)
    nw.consequent[r] = static_cast<std::uint32_t>(
        argmax_of<Real>(std::span<const Real>(nw.norm.data() + layout.decision_row(r), layout.shape().classes)));
  return nw;
}

NormalizedWeights normalize_weights(const FrrWeights& weights, const FrrConfig& config,
                                    const std::optional<ScheduleState>& state) {
  return normalize_weights<double>(weights.values, weights.layout, config, state);
}

template <class Real>
void forward_scores(std::span<const double> u1, const NormalizedWeightsT<Real>& nw, const FrrConfig& config,
                    std::span<Real> scores, ForwardCache* cache) {
  const ParameterLayout& layout = *nw.layout;
  const ModelShape& shape = layout.shape();
  const std::size_t M = shape.features();
  const std::size_t A = layout.conditions();
  const std::size_t R = layout.rules();
  const std::size_t C = shape.classes;
  if (u1.size() != shape.width()) throw ShapeError("fuzzified row width does not match the model");
  if (scores.size() != C) throw ShapeError("score buffer must have one entry per class");

  const bool combine_with_tnorm = config.weights_in_tnorm && config.tnorm.kind != TNormKind::product;
  auto combine = [&](Real weight, Real degree) -> Real {
    return combine_with_tnorm ? detail::tnorm2<Real>(config.tnorm, weight, degree) : weight * degree;
  };

  if (cache) {
    cache->train = nw.train;
    cache->state = {0, nw.beta, nw.gamma};
    cache->input.assign(u1.begin(), u1.end());
    cache->feature_value.assign(R * M, 0.0);
    cache->slot_value.assign(R * A, 0.0);
    cache->silenced.assign(R * A, 0.0);
    cache->rule_terms.assign(R * A, 0.0);
    cache->active.assign(R, 0);
    cache->rule_truth.assign(R, 0.0);
  }

  std::vector<Real> u2(M), terms(A), truth(R);
  const auto& norm = nw.norm;
  const auto& select = nw.select;
  for (std::size_t r = 0; r < R; ++r) {
    // layer 2: one degree per feature from its selected label
    std::size_t base = 0;
    for (std::size_t j = 0; j < M; ++j) {
      const std::size_t off = layout.label_row(r, j);
      Real sum = 0;
      for (std::size_t v = 0; v < shape.terms[j]; ++v)
        sum += combine(select[off + v] * norm[off + v], static_cast<Real>(u1[base + v]));
      u2[j] = sum;
      base += shape.terms[j];
    }
    // layer 3: slot k picks a feature; the silencer may replace it by 1
    std::size_t active = 0;
    Real residual = 0;
    for (std::size_t k = 0; k < A; ++k) {
      const std::size_t off = layout.slot_row(r, k);
      Real slot = 0;
      for (std::size_t j = 0; j < M; ++j) slot += combine(select[off + j] * norm[off + j], u2[j]);
      const std::size_t s = layout.silencer(r, k);
      const bool keep = nw.keep[r * A + k];
      active += keep;
      Real silenced;
      if (nw.train)
        silenced = (norm[s] * select[s]) * slot + norm[s + 1] * select[s + 1];
      else
        silenced = keep ? (norm[s] * select[s]) * slot : Real(1);
      terms[k] = silenced;
      residual += silenced;
      if (cache) {
        cache->slot_value[r * A + k] = static_cast<double>(slot);
        cache->silenced[r * A + k] = static_cast<double>(silenced);
      }
    }
    const std::size_t n_root = std::max<std::size_t>(active, 1);
    if (nw.train && config.use_root_norm)
      for (auto& t : terms) t = std::pow(t, Real(1) / static_cast<Real>(n_root));
    Real rule = detail::tnorm_unchecked<Real>(config.tnorm, std::span<const Real>(terms.data(), A));
    if (nw.train) rule += static_cast<Real>(nw.gamma) * residual;
    truth[r] = rule;
    if (cache) {
      for (std::size_t j = 0; j < M; ++j) cache->feature_value[r * M + j] = static_cast<double>(u2[j]);
      for (std::size_t k = 0; k < A; ++k) cache->rule_terms[r * A + k] = static_cast<double>(terms[k]);
      cache->active[r] = n_root;
      cache->rule_truth[r] = static_cast<double>(rule);
    }
  }

  // layer 4: each class takes its best rule among those concluding it
  std::vector<int> winner(C, -1);
  for (std::size_t c = 0; c < C; ++c) scores[c] = 0;
  for (std::size_t r = 0; r < R; ++r) {
    const std::size_t c = nw.consequent[r];
    const std::size_t w = layout.decision_row(r) + c;
    const Real h = (select[w] * norm[w]) * truth[r];
    if (winner[c] < 0 || h > scores[c]) {
      scores[c] = h;
      winner[c] = static_cast<int>(r);
    }
  }
  if (cache) {
    cache->scores.assign(C, 0.0);
    for (std::size_t c = 0; c < C; ++c) cache->scores[c] = static_cast<double>(scores[c]);
    cache->winner = std::move(winner);
  }
}

template void normalize_row<double>(std::span<const double>, double, std::span<double>);
template void normalize_row<long double>(std::span<const long double>, double, std::span<long double>);
template NormalizedWeightsT<double> normalize_weights<double>(const std::vector<double>&, const ParameterLayout&,
                                                              const FrrConfig&, const std::optional<ScheduleState>&);
template NormalizedWeightsT<long double> normalize_weights<long double>(const std::vector<long double>&,
                                                                        const ParameterLayout&, const FrrConfig&,
                                                                        const std::optional<ScheduleState>&);
template void forward_scores<double>(std::span<const double>, const NormalizedWeightsT<double>&, const FrrConfig&,
                                     std::span<double>, ForwardCache*);
template void forward_scores<long double>(std::span<const double>, const NormalizedWeightsT<long double>&,
                                          const FrrConfig&, std::span<long double>, ForwardCache*);

ForwardResult forward(std::span<const double> u1, const FrrWeights& weights, const FrrConfig& config,
                      const std::optional<ScheduleState>& state) {
  const auto nw = normalize_weights(weights, config, state);
  ForwardResult result;
  std::vector<double> scores(weights.layout.shape().classes);
  forward_scores<double>(u1, nw, config, scores, &result.cache);
  result.rule_truth = result.cache.rule_truth;
  result.scores = std::move(scores);
  return result;
}

int predict(std::span<const double> scores, const FrrConfig& config) {
  if (scores.empty()) throw std::invalid_argument("no class scores");
  const std::size_t best = argmax_of<double>(scores);
  if (scores[best] == 0.0) return config.default_class;
  return static_cast<int>(best);
}

}  // namespace frr
