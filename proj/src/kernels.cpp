#include "frr/kernels.hpp"

#include <stdexcept>

#include "frr/error.hpp"
#include "frr/grad.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace frr {

namespace {

void check_shape(std::span<const double> fuzzified, std::size_t width, const NormalizedWeights& nw) {
  if (width != nw.layout->shape().width()) throw ShapeError("fuzzified width does not match the model");
  if (width == 0 || fuzzified.size() % width != 0) throw ShapeError("fuzzified matrix is not rows x width");
}

void accumulate_rows(std::span<const double> fuzzified, std::size_t width, std::span<const int> targets,
                     std::span<const std::size_t> rows, const NormalizedWeights& nw, const FrrConfig& config,
                     BatchGradient& out) {
  ForwardCache cache;
  std::vector<double> scores(nw.layout->shape().classes);
  for (std::size_t i : rows) {
    std::span<const double> u1(fuzzified.data() + i * width, width);
    forward_scores<double>(u1, nw, config, scores, &cache);
    out.cross_entropy_sum += cross_entropy(scores, targets[i]);
    accumulate_normalized_gradient(cache, targets[i], nw, config, out.normalized_grad);
  }
}

}  // namespace

BatchGradient batch_gradient_reference(std::span<const double> fuzzified, std::size_t width,
                                       std::span<const int> targets, std::span<const std::size_t> batch,
                                       const NormalizedWeights& nw, const FrrConfig& config) {
  check_shape(fuzzified, width, nw);
  BatchGradient out;
  out.normalized_grad.assign(nw.layout->size(), 0.0);
  accumulate_rows(fuzzified, width, targets, batch, nw, config, out);
  return out;
}

BatchGradient batch_gradient(std::span<const double> fuzzified, std::size_t width, std::span<const int> targets,
                             std::span<const std::size_t> batch, const NormalizedWeights& nw,
                             const FrrConfig& config) {
  check_shape(fuzzified, width, nw);
  const std::size_t chunks = (batch.size() + kGradientChunk - 1) / kGradientChunk;
  std::vector<BatchGradient> partial(chunks);
  for (auto& p : partial) p.normalized_grad.assign(nw.layout->size(), 0.0);

#pragma omp parallel for schedule(static) if (chunks > 1)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t start = static_cast<std::size_t>(c) * kGradientChunk;
    const std::size_t stop = std::min(batch.size(), start + kGradientChunk);
    accumulate_rows(fuzzified, width, targets, batch.subspan(start, stop - start), nw, config,
                    partial[static_cast<std::size_t>(c)]);
  }

  BatchGradient out;
  out.normalized_grad.assign(nw.layout->size(), 0.0);
  for (const auto& p : partial) {
    out.cross_entropy_sum += p.cross_entropy_sum;
    for (std::size_t i = 0; i < out.normalized_grad.size(); ++i) out.normalized_grad[i] += p.normalized_grad[i];
  }
  return out;
}

std::vector<int> predict_rows_reference(std::span<const double> fuzzified, std::size_t width,
                                        const NormalizedWeights& nw, const FrrConfig& config) {
  check_shape(fuzzified, width, nw);
  const std::size_t n = fuzzified.size() / width;
  std::vector<int> out(n);
  std::vector<double> scores(nw.layout->shape().classes);
  for (std::size_t i = 0; i < n; ++i) {
    forward_scores<double>(fuzzified.subspan(i * width, width), nw, config, scores, nullptr);
    out[i] = predict(scores, config);
  }
  return out;
}

std::vector<int> predict_rows(std::span<const double> fuzzified, std::size_t width, const NormalizedWeights& nw,
                              const FrrConfig& config) {
  check_shape(fuzzified, width, nw);
  const std::size_t n = fuzzified.size() / width;
  std::vector<int> out(n);
#pragma omp parallel if (n > 64)
  {
    std::vector<double> scores(nw.layout->shape().classes);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      const auto row = static_cast<std::size_t>(i);
      forward_scores<double>(fuzzified.subspan(row * width, width), nw, config, scores, nullptr);
      out[row] = predict(scores, config);
    }
  }
  return out;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int threads) {
#ifdef _OPENMP
  if (threads >= 1) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

}  // namespace frr
