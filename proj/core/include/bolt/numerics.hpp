#pragma once

#include <cmath>
#include <numbers>

namespace bolt::numerics {

inline constexpr double kInvSqrt2Pi = 0.3989422804014327;
inline constexpr double kLog2Pi = 1.8378770664093453;

inline double normal_pdf(double z) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

inline double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// log Phi(z), accurate in the far left tail where Phi underflows.
inline double log_normal_cdf(double z) noexcept {
  if (z > -20.0) return std::log(normal_cdf(z));
  // Asymptotic series: Phi(z) ~ phi(z)/(-z) * (1 - 1/z^2 + 3/z^4 - 15/z^6).
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - 0.5 * kLog2Pi - std::log(-z) + std::log(series);
}

// d/dz log Phi(z) = phi(z) / Phi(z).
inline double inverse_mills_ratio(double z) noexcept {
  if (z > -20.0) return normal_pdf(z) / normal_cdf(z);
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -z / series;
}

inline double softplus(double x) noexcept {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}

inline double sigmoid(double x) noexcept {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace bolt::numerics
