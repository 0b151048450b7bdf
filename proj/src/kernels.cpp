#include "conley/kernels.hpp"

#include <cmath>
#include <string>

#include "conley/error.hpp"

namespace conley {

double kernel_weight(KernelKind kind, double u) {
  if (!(u >= 0.0)) throw InvalidInput("kernel argument must be non-negative");
  switch (kind) {
    case KernelKind::Uniform:
      return u <= 1.0 ? 1.0 : 0.0;
    case KernelKind::Bartlett:
      return u <= 1.0 ? 1.0 - u : 0.0;
    case KernelKind::Epanechnikov:
      return u <= 1.0 ? 1.0 - u * u : 0.0;
    case KernelKind::Parzen:
      if (u < 0.5) return 1.0 - 6.0 * u * u + 6.0 * u * u * u;
      if (u <= 1.0) {
        const double r = 1.0 - u;
        return 2.0 * r * r * r;
      }
      return 0.0;
    case KernelKind::QuarticBiweight:
      if (u <= 1.0) {
        const double r = 1.0 - u * u;
        return r * r;
      }
      return 0.0;
    case KernelKind::GaussianTruncated:
      if (u == 0.0) return 1.0;
      return u < 1.0 ? std::exp(-0.5 * u * u) : 0.0;
  }
  return 0.0;
}

std::string_view kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::Bartlett: return "bartlett";
    case KernelKind::Uniform: return "uniform";
    case KernelKind::Epanechnikov: return "epanechnikov";
    case KernelKind::Parzen: return "parzen";
    case KernelKind::QuarticBiweight: return "biweight";
    case KernelKind::GaussianTruncated: return "gaussian";
  }
  return "?";
}

KernelKind parse_kernel(std::string_view name) {
  for (auto k : kAllKernels) {
    if (kernel_name(k) == name) return k;
  }
  throw InvalidInput("unknown kernel '" + std::string(name) +
                     "' (bartlett|uniform|epanechnikov|parzen|biweight|gaussian)");
}

}  // namespace conley
