#pragma once

// Conjunction kernels: product, minimum and the Aczel-Alsina family
// T_l(x_1..x_n) = exp(-(sum (-ln x_i)^l)^(1/l)), built from the generator
// t_l(x) = (-ln x)^l. T_1 is the product; T_l tends to the minimum as l grows.
//
// Everything is templated on the scalar so the finite-difference oracle can
// evaluate the forward pass in long double.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace frr {

enum class TNormKind { product, minimum, aczel_alsina };

struct TNormSpec {
  TNormKind kind = TNormKind::product;
  double lambda = 1.0;  // aczel_alsina only, >= 1

  static TNormSpec product() { return {TNormKind::product, 1.0}; }
  static TNormSpec minimum() { return {TNormKind::minimum, 1.0}; }
  static TNormSpec aczel_alsina(double lambda) { return {TNormKind::aczel_alsina, lambda}; }

  void validate() const {
    if (kind == TNormKind::aczel_alsina && !(lambda >= 1.0 && std::isfinite(lambda)))
      throw std::invalid_argument("Aczel-Alsina lambda must be a finite value >= 1");
  }
};

std::string to_string(const TNormSpec& spec);
/// Parses "product", "minimum" or "aczel-alsina" (lambda given separately).
TNormKind parse_tnorm_kind(const std::string& name);

/// Above this lambda the generator sum is accumulated in log space.
inline constexpr double kLogSpaceLambda = 50.0;

/// t(x) = (-ln x)^lambda for x in (0, 1].
template <class Real>
Real generator(double lambda, Real x) {
  if (!(x > 0 && x <= 1)) throw std::domain_error("generator is defined on (0, 1]");
  return std::pow(-std::log(x), static_cast<Real>(lambda));
}

/// t^-1(y) = exp(-y^(1/lambda)) for y >= 0.
template <class Real>
Real generator_inverse(double lambda, Real y) {
  if (!(y >= 0)) throw std::domain_error("generator inverse is defined on [0, inf)");
  return std::exp(-std::pow(y, static_cast<Real>(1.0 / lambda)));
}

namespace detail {

/// (sum_i (-ln x_i)^lambda)^(1/lambda) for x_i in (0, 1]; inputs >= 1 contribute 0.
template <class Real>
Real aczel_alsina_norm(double lambda, std::span<const Real> xs) {
  using std::exp;
  using std::log;
  using std::pow;
  if (lambda < kLogSpaceLambda) {
    Real sum = 0;
    for (Real x : xs)
      if (x < 1) sum += pow(-log(x), static_cast<Real>(lambda));
    return pow(sum, static_cast<Real>(1.0 / lambda));
  }
  // log-sum-exp over lambda * ln(-ln x_i)
  Real peak = -std::numeric_limits<Real>::infinity();
  for (Real x : xs)
    if (x < 1) peak = std::max(peak, static_cast<Real>(lambda) * log(-log(x)));
  if (peak == -std::numeric_limits<Real>::infinity()) return 0;
  Real acc = 0;
  for (Real x : xs)
    if (x < 1) acc += exp(static_cast<Real>(lambda) * log(-log(x)) - peak);
  return exp((peak + log(acc)) / static_cast<Real>(lambda));
}


/// tnorm() without input validation; inputs above 1 act as 1. Used on the
/// hot path where inputs are in [0, 1] up to rounding.
template <class Real>
Real tnorm_unchecked(const TNormSpec& spec, std::span<const Real> xs) {
  switch (spec.kind) {
    case TNormKind::product: {
      Real p = 1;
      for (Real x : xs) p *= x;
      return p;
    }
    case TNormKind::minimum: {
      Real m = 1;
      for (Real x : xs) m = std::min(m, x);
      return m;
    }
    case TNormKind::aczel_alsina: {
      for (Real x : xs)
        if (x <= 0) return 0;
      return std::exp(-aczel_alsina_norm<Real>(spec.lambda, xs));
    }
  }
  return 0;
}

template <class Real>
Real tnorm2(const TNormSpec& spec, Real x, Real y) {
  const Real xs[2] = {x, y};
  return tnorm_unchecked<Real>(spec, std::span<const Real>(xs, 2));
}

}  // namespace detail

/// n-ary conjunction of degrees in [0, 1]. Any zero input yields 0.
template <class Real>
Real tnorm(const TNormSpec& spec, std::span<const Real> xs) {
  if (xs.empty()) throw std::invalid_argument("tnorm of an empty list");
  for (Real x : xs)
    if (!(x >= 0 && x <= 1)) throw std::domain_error("tnorm input outside [0, 1]");
  return detail::tnorm_unchecked<Real>(spec, xs);
}

template <class Real>
Real tnorm(const TNormSpec& spec, std::initializer_list<Real> xs) {
  return tnorm<Real>(spec, std::span<const Real>(xs.begin(), xs.size()));
}

/// Partial derivatives dT/dx_i at `xs`, written into `grad` (same length).
/// Minimum routes the whole derivative to the first smallest input.
void tnorm_partials(const TNormSpec& spec, std::span<const double> xs, std::span<double> grad);

}  // namespace frr
