#pragma once

// The rule network: per-rule label selection (W2), condition selection (W3),
// silencer pairs, and the global decision matrix (W4). Raw weights are stored
// flat; softmax normalisation with temperature is applied on read.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frr/logic.hpp"

namespace frr {

/// How the derivative of the selection indicator is approximated.
enum class SteMode {
  identity,  // df/dx := 1 for every entry
  argmax,    // df/dx := 1 at the selected entry only
  off,       // df/dx := 0 (exact derivative of a piecewise-constant f)
};

std::string to_string(SteMode mode);
SteMode parse_ste_mode(const std::string& name);

struct FrrConfig {
  std::size_t rules = 15;             // R
  std::size_t conditions = 3;         // A
  std::size_t labels = 3;             // V
  double temperature = 0.1;           // alpha
  TNormSpec tnorm = TNormSpec::product();
  bool weights_in_tnorm = false;      // combine weight and degree with T instead of *
  bool use_root_norm = false;
  double beta_max = 1.0;
  double beta_min = 0.0;
  double gamma_max = 0.1;
  std::size_t epochs = 300;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  double cancel_penalty = 0.01;
  double keep_bias = 6.0;             // initial logit lead of "keep" over "cancel" in every silencer
  SteMode ste = SteMode::identity;
  std::uint64_t seed = 0;
  int default_class = 0;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Data-dependent dimensions: term count per feature and class count.
struct ModelShape {
  std::vector<std::size_t> terms;  // per feature, sums to the fuzzified width
  std::size_t classes = 0;

  std::size_t features() const { return terms.size(); }
  std::size_t width() const;
  bool operator==(const ModelShape&) const = default;
};

/// Offsets of every weight group in the flat parameter vector.
///
/// Per rule r: label rows (feature j has terms[j] entries), then A slot rows
/// of M entries, then A silencer pairs. The R x C decision matrix follows the
/// last rule.
class ParameterLayout {
 public:
  ParameterLayout() = default;
  ParameterLayout(ModelShape shape, std::size_t rules, std::size_t conditions);

  const ModelShape& shape() const { return shape_; }
  std::size_t rules() const { return rules_; }
  std::size_t conditions() const { return conditions_; }
  std::size_t size() const { return size_; }

  std::size_t label_row(std::size_t r, std::size_t j) const { return r * rule_stride_ + label_offsets_[j]; }
  std::size_t slot_row(std::size_t r, std::size_t k) const {
    return r * rule_stride_ + label_width_ + k * shape_.features();
  }
  std::size_t silencer(std::size_t r, std::size_t k) const {
    return r * rule_stride_ + label_width_ + conditions_ * shape_.features() + 2 * k;
  }
  std::size_t decision_row(std::size_t r) const { return rules_ * rule_stride_ + r * shape_.classes; }

  /// Every softmax row as (offset, length), in storage order.
  const std::vector<std::pair<std::size_t, std::size_t>>& rows() const { return rows_; }

  bool operator==(const ParameterLayout& other) const {
    return shape_ == other.shape_ && rules_ == other.rules_ && conditions_ == other.conditions_;
  }

 private:
  ModelShape shape_;
  std::size_t rules_ = 0;
  std::size_t conditions_ = 0;
  std::vector<std::size_t> label_offsets_;
  std::size_t label_width_ = 0;
  std::size_t rule_stride_ = 0;
  std::size_t size_ = 0;
  std::vector<std::pair<std::size_t, std::size_t>> rows_;
};

/// A flat tensor laid out by a ParameterLayout; raw weights and gradients.
struct ParameterBlock {
  ParameterLayout layout;
  std::vector<double> values;

  ParameterBlock() = default;
  explicit ParameterBlock(ParameterLayout l) : layout(std::move(l)), values(layout.size(), 0.0) {}

  std::span<double> row(std::size_t offset, std::size_t length) { return {values.data() + offset, length}; }
  std::span<const double> row(std::size_t offset, std::size_t length) const { return {values.data() + offset, length}; }
};

using FrrWeights = ParameterBlock;

/// Zero-mean unit-variance normal draws from `config.seed`, then every
/// silencer pair shifted by +-keep_bias/2 towards keep.
FrrWeights init_weights(const FrrConfig& config, const ModelShape& shape);

/// Temperature softmax with max subtraction.
template <class Real>
void normalize_row(std::span<const Real> row, double temperature, std::span<Real> out);
std::vector<double> normalize_row(std::span<const double> row, double temperature);

/// One-hot at the argmax, lowest index on ties.
std::vector<double> indicator_hard(std::span<const double> row);
std::size_t argmax_index(std::span<const double> row);

/// Argmax gets 1/(1+beta(m-1)), the rest beta/(1+beta(m-1)).
std::vector<double> indicator_relaxed(std::span<const double> row, double beta);

struct ScheduleState {
  std::size_t epoch = 0;
  double beta = 1.0;
  double gamma = 0.0;
};

/// beta and gamma decay linearly from their maxima at epoch 0 to their minima
/// (gamma: 0) at epoch == config.epochs.
ScheduleState schedule_step(std::size_t epoch, const FrrConfig& config);

/// Normalised weights and selection factors for one weight state and mode.
/// Built once per mini-batch and shared by every row.
template <class Real>
struct NormalizedWeightsT {
  const ParameterLayout* layout = nullptr;
  bool train = false;
  double beta = 0.0;
  double gamma = 0.0;
  std::vector<Real> norm;       // softmax per row
  std::vector<Real> select;     // f or f_beta per entry
  std::vector<Real> ste;        // d(select * norm)/d(norm) = select + ste_factor * norm
  std::vector<std::uint8_t> keep;           // per (rule, slot): silencer keeps the condition
  std::vector<std::uint32_t> consequent;    // per rule: argmax of the decision row
};

using NormalizedWeights = NormalizedWeightsT<double>;

/// Train mode when `state` is set, hard inference otherwise.
template <class Real>
NormalizedWeightsT<Real> normalize_weights(const std::vector<Real>& raw, const ParameterLayout& layout,
                                           const FrrConfig& config, const std::optional<ScheduleState>& state);
NormalizedWeights normalize_weights(const FrrWeights& weights, const FrrConfig& config,
                                    const std::optional<ScheduleState>& state);

/// Everything backward() needs from one forward evaluation of one row.
struct ForwardCache {
  bool train = false;
  ScheduleState state;               // mode the row was evaluated in
  std::vector<double> input;         // u1
  std::vector<double> feature_value; // u2, R x M
  std::vector<double> slot_value;    // A_k, R x A
  std::vector<double> silenced;      // A~_k, R x A
  std::vector<double> rule_terms;    // t-norm inputs after root normalisation, R x A
  std::vector<std::size_t> active;   // kept slots per rule (root exponent), R
  std::vector<double> rule_truth;    // r_s, R
  std::vector<double> scores;        // u4, C
  std::vector<int> winner;           // rule winning each class, -1 if none
};

struct ForwardResult {
  std::vector<double> rule_truth;
  std::vector<double> scores;
  ForwardCache cache;
};

/// Forward pass of one fuzzified row under pre-normalised weights.
template <class Real>
void forward_scores(std::span<const double> u1, const NormalizedWeightsT<Real>& nw, const FrrConfig& config,
                    std::span<Real> scores, ForwardCache* cache);

/// Convenience form: normalises, runs, and returns truths, scores and cache.
ForwardResult forward(std::span<const double> u1, const FrrWeights& weights, const FrrConfig& config,
                      const std::optional<ScheduleState>& state);

/// Argmax of the scores, lowest index on ties; config.default_class when every
/// score is zero.
int predict(std::span<const double> scores, const FrrConfig& config);

}  // namespace frr
