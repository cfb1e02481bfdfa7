#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "macfb/bounds.hpp"
#include "macfb/channel.hpp"

namespace macfb {

/// Confirmation-stage layout: in the hybrid phase (n2 uses) `conf_user`
/// repeats x0/x1 while the other user transmits i.i.d. p_other; in the full
/// phase (n3 uses) both users send quadruple-coded bits drawn i.i.d. from pz.
/// The receiver accepts H0 iff every alternative's summed log-likelihood
/// ratio clears lambda (bits).
struct ConfirmationDesign {
  int conf_user = 1;
  int x0 = 0;
  int x1 = 1;
  ProbVector p_other;
  JointConfirmationDist pz;
  int n2 = 0;
  int n3 = 0;
  double lambda = 0.0;
};

void validate_design(const ChannelModel& ch, const ConfirmationDesign& d);

std::string design_to_json(const ConfirmationDesign& d);
ConfirmationDesign design_from_json(const std::string& text);
ConfirmationDesign load_design_file(const std::string& path);

/// Per-symbol LLR increment distribution. Values live on the 2^-20-bit
/// lattice used by the convolution DP; +-inf entries appear for channels
/// with zero entries and are tracked separately by the DP.
struct LlrDistribution {
  std::vector<double> value;
  std::vector<double> prob;
};

/// The alternatives a != 00 in fixed order (01, 10, 11).
inline constexpr std::array<std::pair<int, int>, 3> kConfirmationAlts{{{0, 1}, {1, 0}, {1, 1}}};

/// Distribution of one symbol's LLR contribution. `truth` selects the law
/// the symbol is drawn from; `alt` the alternative the statistic tests
/// (phase 3 only; the phase-2 statistic is always x0 vs x1).
LlrDistribution llr_per_symbol(const ChannelModel& ch, const ConfirmationDesign& d, int phase,
                               std::pair<int, int> truth,
                               std::optional<std::pair<int, int>> alt = std::nullopt);

struct ExactErrors {
  double alpha = 0.0;  // P(declare H1 | H0)
  double beta = 0.0;   // max over distinguishable alternatives of beta_a
  std::array<double, 3> beta_by_alt{};      // order 01, 10, 11
  std::array<bool, 3> distinguishable{};    // transcript law differs from H0's
  double lattice_error = 0.0;               // accumulated rounding bound, bits
};

/// Exact error probabilities by dynamic-programming convolution of the
/// per-symbol LLR distributions on the quantized lattice. beta_a is
/// P(S_a >= lambda | truth a); alpha is the exact probability that some
/// alternative's statistic falls below lambda under H0 (joint DP over the
/// distinct statistics). Throws SupportOverflow past `cap` lattice points.
ExactErrors exact_errors(const ChannelModel& ch, const ConfirmationDesign& d,
                         size_t cap = 10'000'000);

struct McErrors {
  double alpha = 0.0, alpha_lo = 0.0, alpha_hi = 0.0;
  double beta = 0.0, beta_lo = 0.0, beta_hi = 0.0;
  std::array<double, 3> beta_by_alt{};
  std::array<bool, 3> distinguishable{};
  int64_t trials = 0;
  uint64_t seed = 0;
};

/// Monte-Carlo estimates with 95% Wilson intervals. Deterministic in
/// (seed, trials): trials are split into fixed blocks with derived seeds,
/// so the result is independent of the worker count.
McErrors monte_carlo_errors(const ChannelModel& ch, const ConfirmationDesign& d, int64_t trials,
                            uint64_t seed);

struct ErrorCurvePoint {
  int n = 0;
  double alpha = 0.0;
  double beta = 0.0;
};

/// Least-squares slope of -log2 beta(n) vs n; needs >= 3 points with
/// beta > 0 (InsufficientData otherwise).
double exponent_slope(const std::vector<ErrorCurvePoint>& curve);

/// Largest lattice threshold with P(S < lambda | H0) <= level, for designs
/// whose distinct alternatives share a single statistic (the repetition
/// designs); the Neyman-Pearson schedule of the Stein-regime checks.
double np_lambda(const ChannelModel& ch, const ConfirmationDesign& d, double level);

}  // namespace macfb
