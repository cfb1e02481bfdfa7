#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace macfb {

/// 95% Wilson score interval for k successes out of n.
inline std::pair<double, double> wilson_interval(int64_t k, int64_t n) {
  if (n <= 0) return {0.0, 1.0};
  const double z = 1.959963984540054;  // Phi^-1(0.975)
  double phat = static_cast<double>(k) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (phat + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {center - half, center + half};
}

}  // namespace macfb
