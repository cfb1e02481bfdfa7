#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "macfb/channel.hpp"
#include "macfb/hypotest.hpp"

namespace macfb {

/// Three-phase variable-length scheme configuration. Phase lengths follow
/// the rounding policy n2 = floor(g2 n), n3 = floor(g3 n), remainder to
/// phase 1. The non-confirming ("data") user splits its message into a
/// phase-1 part and a phase-2 part of size m_split.
struct SchemeConfig {
  int n = 0;
  double gamma[3] = {1.0, 0.0, 0.0};
  int m1 = 1, m2 = 1;
  int m_split = 1;  // phase-2 message part of the data user; divides its M
  ProbVector data_p1, data_p2;  // phase-1 codebook distributions (default uniform)
  ConfirmationDesign design;    // n2/n3 are derived from gamma and n
  int max_retransmissions = 50;
  std::optional<std::pair<int, int>> force_theta;  // test knob: pin (Theta1, Theta2)

  int n2() const { return static_cast<int>(gamma[1] * n + 1e-9); }
  int n3() const { return static_cast<int>(gamma[2] * n + 1e-9); }
  int n1() const { return n - n2() - n3(); }
};

void validate_config(const ChannelModel& ch, const SchemeConfig& cfg);

struct SimResult {
  double pe = 0.0, pe_lo = 0.0, pe_hi = 0.0;     // message error with 95% CI
  double q = 0.0, q_se = 0.0;                    // per-block retransmission prob
  double peb = 0.0, peb_se = 0.0;                // per-block accept-and-wrong prob
  double mean_t = 0.0;                           // E[T] in channel uses
  double mean_blocks = 0.0;
  double blocks_var = 0.0;                       // sample variance of block counts
  double exponent = 0.0;                         // -log2(pe) / E[T]; inf when pe = 0
  int64_t trials = 0;
  int64_t total_blocks = 0;
  int64_t capped_trials = 0;                     // hit the retransmission cap (counted as errors)
  uint64_t seed = 0;
  double renewal_residual = 0.0;                 // pe (1 - q) - peb
  double renewal_tol = 0.0;                      // 4 combined standard errors
  double blocks_identity_residual = 0.0;         // E[blocks] (1 - q) - 1
  double blocks_identity_tol = 0.0;
  std::vector<std::string> warnings;
};

/// Monte-Carlo run of the retransmission loop: random phase-1 product
/// codebooks with exact joint ML decoding, hybrid phase per the design,
/// pz-coded confirmation, two-part log-likelihood acceptance. Both encoders
/// recompute the decoder's provisional decisions from the fed-back outputs,
/// so Theta is exact. Deterministic in (seed, trials) regardless of the
/// worker count.
SimResult run_scheme(const ChannelModel& ch, const SchemeConfig& cfg, int64_t trials,
                     uint64_t seed);

struct SweepRow {
  double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0;
  SimResult result;
};

/// run_scheme over the (gamma2, gamma3) simplex grid.
std::vector<SweepRow> sweep_gamma(const ChannelModel& ch, const SchemeConfig& base, double step,
                                  int64_t trials, uint64_t seed);

std::string config_to_json(const SchemeConfig& cfg);
SchemeConfig config_from_json(const std::string& text);
SchemeConfig load_config_file(const std::string& path);
std::string result_to_json(const SimResult& res);

}  // namespace macfb
