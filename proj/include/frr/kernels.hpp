#pragma once

// Batch kernels used by training and evaluation. Each comes in a serial
// reference form and an OpenMP form. The parallel forms split the work into
// fixed-size chunks and reduce them in chunk order, so their output does not
// depend on the number of threads.

#include <cstddef>
#include <span>
#include <vector>

#include "frr/model.hpp"

namespace frr {

inline constexpr std::size_t kGradientChunk = 8;

struct BatchGradient {
  std::vector<double> normalized_grad;  // summed over rows, not yet averaged
  double cross_entropy_sum = 0;
};

/// Summed per-row cross-entropy and its gradient w.r.t. the normalised
/// weights over the rows listed in `batch`.
BatchGradient batch_gradient_reference(std::span<const double> fuzzified, std::size_t width,
                                       std::span<const int> targets, std::span<const std::size_t> batch,
                                       const NormalizedWeights& nw, const FrrConfig& config);
BatchGradient batch_gradient(std::span<const double> fuzzified, std::size_t width, std::span<const int> targets,
                             std::span<const std::size_t> batch, const NormalizedWeights& nw,
                             const FrrConfig& config);

/// Inference-mode class prediction for every row.
std::vector<int> predict_rows_reference(std::span<const double> fuzzified, std::size_t width,
                                        const NormalizedWeights& nw, const FrrConfig& config);
std::vector<int> predict_rows(std::span<const double> fuzzified, std::size_t width, const NormalizedWeights& nw,
                              const FrrConfig& config);

/// Threads the parallel kernels may use (1 without OpenMP).
int max_threads();
void set_threads(int threads);

}  // namespace frr
