#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "macfb/channel.hpp"

namespace macfb {

/// Deterministic feedback code on a tiny message set: per user, per time
/// t = 1..horizon, a total table (message, output-prefix) -> input symbol.
struct TinyCode {
  int m1 = 0, m2 = 0;
  int horizon = 0;
  // enc[user][t-1] is indexed by w * y_size^(t-1) + prefix_index.
  std::array<std::vector<std::vector<int>>, 2> enc;

  int symbol(int user, int t, int w, int prefix_index) const {
    return enc[user - 1][t - 1][static_cast<size_t>(w) * npref(t) + prefix_index];
  }
  size_t npref(int t) const { return prefixes[t - 1]; }
  std::vector<size_t> prefixes;  // y_size^(t-1) per t
};

TinyCode random_tiny_code(const ChannelModel& ch, int m1, int m2, int horizon, uint64_t seed);
/// Feedback-ignoring repetition code: user i always sends w_i mod alphabet.
TinyCode repetition_code(const ChannelModel& ch, int m1, int m2, int horizon);
/// JSON: {"m1", "m2", "horizon", "enc1": [[...per-t tables...]], "enc2": [...]},
/// table t flattened as w * y_size^(t-1) + prefix.
TinyCode tiny_code_from_json(const ChannelModel& ch, const std::string& text);
TinyCode load_tiny_code_file(const ChannelModel& ch, const std::string& path);

/// One node of the exhaustive output tree with the exact Bayesian posterior
/// and the drift constants of the entropy processes.
struct TraceNode {
  double prob = 0.0;                 // P(y^t)
  std::vector<double> post;          // P(w1, w2 | y^t), row-major w1 * m2 + w2
  std::array<double, 3> hbar{};      // H(W1|W2,.), H(W2|W1,.), H(W1,W2|.)
  std::array<double, 3> htld{};      // H(W1|.), H(W2|.), H(W1,W2|.)
  std::array<double, 3> drift_j{};   // J_r constants (internal nodes)
  std::array<double, 3> drift_d{};   // D_r constants (internal nodes)
  double map_mass = 0.0;             // max joint posterior (MAP check)
};

struct PosteriorTrace {
  ChannelModel ch;
  TinyCode code;
  int horizon = 0;
  std::vector<std::vector<TraceNode>> levels;  // levels[t], indexed by base-y path
  double eta = 0.0;                            // max log2 channel ratio
  double dmax = 0.0;                           // d_ub of the channel
};

/// Exact enumeration of every output history with Bayes posteriors, entropy
/// processes and per-node J_r / D_r. Requires a strictly positive channel.
PosteriorTrace enumerate_trace(const ChannelModel& ch, const TinyCode& code,
                               size_t cell_limit = 50'000'000);

struct CheckReport {
  std::string name;
  int checked = 0;
  int violations = 0;
  double worst_margin = kInf;  // smallest slack observed (negative = violation)
  std::vector<std::string> notes;
  bool pass() const { return violations == 0; }
};

/// E[Hbar_r - Hbar_{r-1} | node] >= -J_r per node and process.
CheckReport check_linear_drift(const PosteriorTrace& trace);

/// |log Htld_r - log Htld_{r-1}| <= eta at every node with positive entropy.
CheckReport check_eta_bound(const PosteriorTrace& trace);

/// Log-drift with the explicit finite-eps slack:
/// E[log Htld_r - log Htld_{r-1} | node] >= -D_r - kappa(eps) - dmax*hb^-1(eps)
/// at nodes with Htld < eps. Throws NoQualifyingNodes if no node qualifies.
CheckReport check_log_drift(const PosteriorTrace& trace, double eps);

/// kappa(eps) slack constant (the larger of the two stated constants).
double kappa_slack(const PosteriorTrace& trace, double eps);

/// Exact conditional-expectation check that each Htld process is a
/// supermartingale.
CheckReport check_supermartingale(const PosteriorTrace& trace);

/// Grouping identity Htld^1 = h_b(mu*) + (1 - mu*) H(What) at every node.
CheckReport check_grouping_identity(const PosteriorTrace& trace);

/// Pruned-time submartingale: builds tau_eps, tau^eps, t_n, Z, S, L per path
/// with k1 = J_r, k2 = D_r + slack, k3 = eta, k4 = log2 m_i, and verifies
/// E[L_{n+1} - L_n | y^{t_n}] >= -1e-9 on every information set, plus the
/// constructive measurability of t_n, t_n ^ tau_eps, t_n ^ tau^eps.
/// Throws HypothesisViolated when a construction hypothesis fails on the trace.
CheckReport check_pruned_submartingale(const PosteriorTrace& trace, double eps, double I, double D,
                                       double mu);

/// Pruned-time data of one output path for process i: the crossing times
/// tau_eps (first entry at or below eps) and tau^eps (last exit above eps,
/// plus one), both capped at the horizon, and the sampled time sequence t_n.
struct PrunedTimes {
  int tau_lo = 0;           // tau_eps
  int tau_hi = 0;           // tau^eps
  std::vector<int> t_n;     // index n = 0..horizon
};

/// Per-leaf pruned times of process i (1..3) at threshold eps, in leaf
/// (base-y path) order.
std::vector<PrunedTimes> pruned_times(const PosteriorTrace& trace, int process, double eps);

struct PrunedScanResult {
  bool found = false;
  double mu = 0.0;
  CheckReport report;
};

/// Scans mu downward from 2^-3 until the submartingale check passes; I and D
/// default to the largest k2 constant on the trace.
PrunedScanResult scan_pruned_submartingale(const PosteriorTrace& trace, double eps);

/// Doob maximal inequality P(sup_{t>=tau} M_t >= c) <= E[M_tau]/c for the
/// supermartingale Htld^i; tau is a constant time here.
CheckReport check_doob(const PosteriorTrace& trace, int process, int tau, double c);

/// h_b(pe) + pe log2(m_total).
double fano_bound(double pe, int m_total);

/// E[Htld^3_N] <= fano_bound(Pe of the MAP decoder at the horizon).
CheckReport check_fano(const PosteriorTrace& trace);

struct TraceChecks {
  CheckReport linear, eta, logdrift, pruned, doob, fano, grouping, supermartingale;
  double mu = 0.0;
  bool all_pass() const;
};

TraceChecks run_all_checks(const PosteriorTrace& trace, double eps = 0.3);

}  // namespace macfb
