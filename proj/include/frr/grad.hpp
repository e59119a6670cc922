#pragma once

// Training engine: softmax cross-entropy plus cancellation penalty, the
// explicit backward pass with straight-through selection derivatives, Adam,
// the mini-batch loop, and a finite-difference gradient oracle.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "frr/model.hpp"

namespace frr {

struct LossBreakdown {
  double cross_entropy = 0;
  double cancellation_penalty = 0;  // sum of normalised keep weights
  double total = 0;                 // cross_entropy + cancel_penalty * cancellation_penalty
};

using GradientSet = ParameterBlock;

struct OptimizerState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::size_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 0.01;
};

OptimizerState make_optimizer(const FrrWeights& weights, const FrrConfig& config);

/// One bias-corrected adaptive-moment update of `weights` along `grad`.
void adam_step(OptimizerState& state, FrrWeights& weights, const GradientSet& grad);

/// Sum over rules and slots of the normalised keep weight.
double cancellation_penalty(const NormalizedWeights& nw);

/// Softmax cross-entropy of the class scores at temperature 1.
double cross_entropy(std::span<const double> scores, int target);

LossBreakdown loss(std::span<const double> scores, int target, const NormalizedWeights& nw, const FrrConfig& config);
LossBreakdown loss(std::span<const double> scores, int target, const FrrWeights& weights, const FrrConfig& config);

/// Adds d(cross-entropy)/d(normalised weights) of one cached row into `acc`
/// (length = layout size). Only the rule winning each class receives signal.
void accumulate_normalized_gradient(const ForwardCache& cache, int target, const NormalizedWeights& nw,
                                    const FrrConfig& config, std::span<double> acc);

/// Adds the cancellation-penalty term and maps gradients w.r.t. normalised
/// weights to raw weights through the temperature-softmax Jacobian.
GradientSet finish_gradient(std::span<const double> normalized_grad, const NormalizedWeights& nw,
                            const FrrConfig& config);

/// Full gradient of the per-row loss w.r.t. every raw weight. `cache` must
/// come from a train-mode forward on `weights`.
GradientSet backward(const ForwardCache& cache, int target, const FrrWeights& weights, const FrrConfig& config);

struct GradientCheck {
  double max_relative_error = 0;
  std::size_t worst_index = 0;
  double analytic = 0;
  double numeric = 0;
};

/// Central differences of the loss (evaluated in long double) against
/// backward(), for every raw weight, under the given config and state.
/// Relative error uses max(|a|, |n|, 1e-8) as denominator.
GradientCheck gradient_error(const FrrWeights& weights, std::span<const double> u1, int target,
                             const FrrConfig& config, const ScheduleState& state, double epsilon);

/// gradient_error() in the smooth regime: beta = 1, STE off, product t-norm
/// combined by multiplication, root normalisation off, gamma as given.
GradientCheck finite_difference_check(const FrrWeights& weights, std::span<const double> u1, int target,
                                      const FrrConfig& config, double gamma = 0.1, double epsilon = 1e-5);

struct RandomCheckReport {
  GradientCheck worst;
  std::size_t worst_instance = 0;
};

/// finite_difference_check() over random small shapes, degrees and targets.
RandomCheckReport random_gradient_check(std::size_t instances, std::uint64_t seed, double epsilon = 1e-5);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0;
  double train_accuracy = 0;
  double beta = 0;
  double gamma = 0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;

  /// epoch,loss,train_accuracy,beta,gamma
  void write_csv(const std::filesystem::path& path) const;
};

struct FitResult {
  FrrWeights weights;
  TrainingHistory history;
  int default_class = 0;
};

/// Mini-batch training over pre-fuzzified rows (row-major N x width).
/// Throws TrainingDiverged on a non-finite loss or gradient.
FitResult fit(std::span<const double> fuzzified, std::span<const int> targets, const ModelShape& shape,
              const FrrConfig& config);

}  // namespace frr
