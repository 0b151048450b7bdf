#pragma once

#include <array>
#include <string_view>

namespace conley {

enum class KernelKind { Bartlett, Uniform, Epanechnikov, Parzen, QuarticBiweight, GaussianTruncated };

inline constexpr std::array<KernelKind, 6> kAllKernels = {
    KernelKind::Bartlett, KernelKind::Uniform,         KernelKind::Epanechnikov,
    KernelKind::Parzen,   KernelKind::QuarticBiweight, KernelKind::GaussianTruncated};

// Weight at normalized distance u = d / bandwidth. Compact support on [0, 1];
// Uniform keeps weight 1 at u = 1, GaussianTruncated drops to 0 there.
double kernel_weight(KernelKind kind, double u);

// Lowercase CLI names: bartlett | uniform | epanechnikov | parzen | biweight | gaussian.
std::string_view kernel_name(KernelKind kind);
KernelKind parse_kernel(std::string_view name);

}  // namespace conley
