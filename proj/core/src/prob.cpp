#include "macfb/prob.hpp"

#include <cmath>
#include <cstdio>

#include "macfb/errors.hpp"

namespace macfb {

namespace {
double log_conv(LogBase base) { return base == LogBase::Two ? std::log(2.0) : 1.0; }
}  // namespace

bool is_prob_vector(const ProbVector& p, double tol) {
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0 || !std::isfinite(v)) return false;
    sum += v;
  }
  return std::fabs(sum - 1.0) <= tol;
}

void validate_prob_vector(const ProbVector& p) {
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0) fail(Err::NegativeEntry, "probability vector has a negative entry");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > kProbTol) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "probability vector sums to %.12g", sum);
    fail(Err::NonStochasticRow, buf);
  }
}

ProbVector point_mass(int size, int index) {
  ProbVector p(size, 0.0);
  p.at(index) = 1.0;
  return p;
}

ProbVector uniform_dist(int size) { return ProbVector(size, 1.0 / size); }

double entropy(const ProbVector& p, LogBase base) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h / log_conv(base);
}

double kl(const ProbVector& p, const ProbVector& q, LogBase base) {
  if (p.size() != q.size()) fail(Err::LengthMismatch, "kl: length mismatch");
  double d = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      if (q[i] <= 0.0) return kInf;
      d += p[i] * std::log(p[i] / q[i]);
    }
  }
  // Clamp the tiny negative values that slip through when p == q.
  d /= log_conv(base);
  return d < 0.0 && d > -1e-14 ? 0.0 : d;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double binary_entropy_inv(double v) {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 0.5;
  double lo = 0.0, hi = 0.5;
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    (binary_entropy(mid) < v ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace macfb
