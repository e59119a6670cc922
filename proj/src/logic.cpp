#include "frr/logic.hpp"

#include <sstream>

namespace frr {

std::string to_string(const TNormSpec& spec) {
  switch (spec.kind) {
    case TNormKind::product: return "product";
    case TNormKind::minimum: return "minimum";
    case TNormKind::aczel_alsina: {
      std::ostringstream out;
      out << "aczel-alsina(" << spec.lambda << ")";
      return out.str();
    }
  }
  return "?";
}

TNormKind parse_tnorm_kind(const std::string& name) {
  if (name == "product") return TNormKind::product;
  if (name == "minimum" || name == "min") return TNormKind::minimum;
  if (name == "aczel-alsina" || name == "aczel_alsina") return TNormKind::aczel_alsina;
  throw std::invalid_argument("unknown t-norm '" + name + "'");
}

void tnorm_partials(const TNormSpec& spec, std::span<const double> xs, std::span<double> grad) {
  const std::size_t n = xs.size();
  switch (spec.kind) {
    case TNormKind::product: {
      // prefix/suffix products keep this exact when some x_i are zero
      std::vector<double> suffix(n + 1, 1.0);
      for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] * xs[i];
      double prefix = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        grad[i] = prefix * suffix[i + 1];
        prefix *= xs[i];
      }
      return;
    }
    case TNormKind::minimum: {
      const auto lowest = std::min_element(xs.begin(), xs.end()) - xs.begin();
      for (std::size_t i = 0; i < n; ++i) grad[i] = static_cast<std::ptrdiff_t>(i) == lowest ? 1.0 : 0.0;
      return;
    }
    case TNormKind::aczel_alsina: {
      std::size_t zeros = 0;
      for (double x : xs) zeros += x == 0;
      if (zeros > 0) {
        // T vanishes; only a lone zero has a (one-sided) non-zero slope.
        for (std::size_t i = 0; i < n; ++i) grad[i] = 0.0;
        if (zeros == 1 && spec.lambda == 1.0) {
          for (std::size_t i = 0; i < n; ++i) {
            if (xs[i] != 0) continue;
            double p = 1;
            for (std::size_t m = 0; m < n; ++m)
              if (m != i) p *= xs[m];
            grad[i] = p;
          }
        }
        return;
      }
      const double norm = detail::aczel_alsina_norm<double>(spec.lambda, xs);
      const double t = std::exp(-norm);
      if (norm == 0.0) {
        // all inputs are 1: T(1,..,x,..,1) = x
        for (std::size_t i = 0; i < n; ++i) grad[i] = 1.0;
        return;
      }
      // dT/dx_i = T * (y_i / norm)^(lambda - 1) / x_i with y_i = -ln x_i
      for (std::size_t i = 0; i < n; ++i) {
        const double y = xs[i] < 1.0 ? -std::log(xs[i]) : 0.0;
        const double ratio = spec.lambda == 1.0 ? 1.0 : std::pow(y / norm, spec.lambda - 1.0);
        grad[i] = t * ratio / xs[i];
      }
      return;
    }
  }
}

}  // namespace frr
