#include "macfb/vlcsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "macfb/errors.hpp"
#include "macfb/info.hpp"
#include "macfb/jsonutil.hpp"
#include "macfb/parallel.hpp"
#include "macfb/rng.hpp"
#include "macfb/stats.hpp"

namespace macfb {

void validate_config(const ChannelModel& ch, const SchemeConfig& cfg) {
  if (cfg.n < 1 || cfg.n > 24) fail(Err::TooLarge, "block length must be in [1, 24]");
  if (cfg.m1 < 1 || cfg.m2 < 1 || static_cast<int64_t>(cfg.m1) * cfg.m2 > 4096)
    fail(Err::TooLarge, "M1*M2 must be in [1, 4096] for exact ML decoding");
  double gsum = cfg.gamma[0] + cfg.gamma[1] + cfg.gamma[2];
  if (cfg.gamma[0] < -1e-12 || cfg.gamma[1] < -1e-12 || cfg.gamma[2] < -1e-12 ||
      std::fabs(gsum - 1.0) > 1e-9)
    fail(Err::BadInput, "phase fractions must be nonnegative and sum to 1");
  int data_m = cfg.design.conf_user == 1 ? cfg.m2 : cfg.m1;
  if (cfg.m_split < 1 || data_m % cfg.m_split != 0)
    fail(Err::BadInput, "m_split must divide the data user's message size");
  if (cfg.m_split > 1 && cfg.n2() == 0)
    fail(Err::BadInput, "phase-2 message part requires a nonzero hybrid phase");
  if (!cfg.data_p1.empty() && static_cast<int>(cfg.data_p1.size()) != ch.x1_size)
    fail(Err::AlphabetMismatch, "data_p1 alphabet mismatch");
  if (!cfg.data_p2.empty() && static_cast<int>(cfg.data_p2.size()) != ch.x2_size)
    fail(Err::AlphabetMismatch, "data_p2 alphabet mismatch");
  if (cfg.max_retransmissions < 1) fail(Err::BadInput, "max_retransmissions must be >= 1");
  // The confirmation design is validated with the derived phase lengths.
  ConfirmationDesign d = cfg.design;
  d.n2 = cfg.n2();
  d.n3 = cfg.n3();
  if (d.n2 == 0 && d.n3 == 0) fail(Err::BadInput, "scheme needs a confirmation phase");
  validate_design(ch, d);
}

namespace {

struct Precomp {
  ConfirmationDesign design;  // with derived n2/n3
  ProbVector p1, p2;          // phase-1 codebook laws
  ProbVector q0, q1;          // hybrid-phase effective rows (empty if n2 = 0)
  int m_conf = 1;             // confirming user's message count
  int m_d1 = 1, m_d2 = 1;     // data user's phase-1 / phase-2 parts
  int conf_user = 1;
};

Precomp precompute(const ChannelModel& ch, const SchemeConfig& cfg) {
  Precomp pc;
  pc.design = cfg.design;
  pc.design.n2 = cfg.n2();
  pc.design.n3 = cfg.n3();
  pc.conf_user = cfg.design.conf_user;
  pc.p1 = cfg.data_p1.empty() ? uniform_dist(ch.x1_size) : cfg.data_p1;
  pc.p2 = cfg.data_p2.empty() ? uniform_dist(ch.x2_size) : cfg.data_p2;
  pc.m_conf = pc.conf_user == 1 ? cfg.m1 : cfg.m2;
  int data_m = pc.conf_user == 1 ? cfg.m2 : cfg.m1;
  pc.m_d2 = cfg.m_split;
  pc.m_d1 = data_m / cfg.m_split;
  if (pc.design.n2 > 0) {
    EffectiveChannel eff = effective_channel(ch, pc.conf_user, pc.design.p_other);
    pc.q0 = eff.rows.at(pc.design.x0);
    pc.q1 = eff.rows.at(pc.design.x1);
  }
  return pc;
}

double log_ratio(double p0, double p1) {
  if (p0 <= 0.0) return -kInf;
  if (p1 <= 0.0) return kInf;
  return std::log2(p0 / p1);
}

struct BlockOutcome {
  bool accepted = false;
  bool theta_ok = false;  // (Theta1, Theta2) == (0,0)
};

// i.i.d. codebook expurgated to distinct codewords (a colliding pair makes
// the ML decoder guess and forces a retransmission even on a clean channel).
// Gives up after a few redraws when the space is too small to separate.
std::vector<int> draw_codebook(Rng& rng, const ProbVector& law, int m, int len) {
  std::vector<int> cb(static_cast<size_t>(m) * len);
  for (int w = 0; w < m; ++w) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (int t = 0; t < len; ++t) cb[static_cast<size_t>(w) * len + t] = rng.next_from(law);
      bool clash = false;
      for (int v = 0; v < w && !clash; ++v)
        clash = std::equal(cb.begin() + static_cast<size_t>(v) * len,
                           cb.begin() + static_cast<size_t>(v + 1) * len,
                           cb.begin() + static_cast<size_t>(w) * len);
      if (!clash || len == 0) break;
    }
  }
  return cb;
}

// One block: fresh codebooks, one pass through the three phases.
BlockOutcome simulate_block(const ChannelModel& ch, const SchemeConfig& cfg, const Precomp& pc,
                            Rng& rng, int w_conf, int w_d1, int w_d2) {
  int n1 = cfg.n1(), n2 = pc.design.n2, n3 = pc.design.n3;
  const ProbVector& conf_p = pc.conf_user == 1 ? pc.p1 : pc.p2;
  const ProbVector& data_p = pc.conf_user == 1 ? pc.p2 : pc.p1;

  // Phase-1 codebooks: confirming user sends all of its message, the data
  // user its first part.
  std::vector<int> cb_conf = draw_codebook(rng, conf_p, pc.m_conf, n1);
  std::vector<int> cb_d1 = draw_codebook(rng, data_p, pc.m_d1, n1);

  // Phase-2 codebook for the data user's second part.
  std::vector<int> cb_d2 = draw_codebook(rng, pc.design.p_other, pc.m_d2, n2);

  // Phase-3 quadruples.
  std::vector<std::array<int, 4>> quads(n3);
  for (auto& qd : quads) {
    size_t cell = 0;
    double u = rng.next_unit(), acc = 0.0;
    for (; cell + 1 < pc.design.pz.cells(); ++cell) {
      acc += pc.design.pz.p[cell];
      if (u < acc) break;
    }
    size_t rest = cell;
    qd[3] = static_cast<int>(rest % pc.design.pz.x2_size);
    rest /= pc.design.pz.x2_size;
    qd[2] = static_cast<int>(rest % pc.design.pz.x1_size);
    rest /= pc.design.pz.x1_size;
    qd[1] = static_cast<int>(rest % pc.design.pz.x2_size);
    rest /= pc.design.pz.x2_size;
    qd[0] = static_cast<int>(rest);
  }

  auto channel_out = [&](int x1, int x2) { return rng.next_from(ch.row_vec(x1, x2)); };
  auto ordered = [&](int conf_sym, int data_sym) {
    return pc.conf_user == 1 ? std::pair<int, int>{conf_sym, data_sym}
                             : std::pair<int, int>{data_sym, conf_sym};
  };

  // ---- phase 1: transmit and joint-ML decode (w_conf, w_d1)
  std::vector<int> y1(n1);
  for (int t = 0; t < n1; ++t) {
    auto [a, b] = ordered(cb_conf[static_cast<size_t>(w_conf) * n1 + t],
                          cb_d1[static_cast<size_t>(w_d1) * n1 + t]);
    y1[t] = channel_out(a, b);
  }
  int best_conf = 0, best_d1 = 0;
  double best_ll = -kInf;
  for (int wc = 0; wc < pc.m_conf; ++wc)
    for (int wd = 0; wd < pc.m_d1; ++wd) {
      double ll = 0.0;
      for (int t = 0; t < n1 && ll > -kInf; ++t) {
        auto [a, b] =
            ordered(cb_conf[static_cast<size_t>(wc) * n1 + t], cb_d1[static_cast<size_t>(wd) * n1 + t]);
        double p = ch.at(a, b, y1[t]);
        ll = p > 0.0 ? ll + std::log(p) : -kInf;
      }
      if (ll > best_ll) {
        best_ll = ll;
        best_conf = wc;
        best_d1 = wd;
      }
    }
  int theta_conf = best_conf != w_conf ? 1 : 0;
  if (cfg.force_theta)
    theta_conf = pc.conf_user == 1 ? cfg.force_theta->first : cfg.force_theta->second;

  // ---- phase 2: confirming user repeats x(theta_conf); data user sends w_d2
  std::vector<int> y2(n2);
  int rep_sym = theta_conf ? pc.design.x1 : pc.design.x0;
  for (int t = 0; t < n2; ++t) {
    auto [a, b] = ordered(rep_sym, cb_d2[static_cast<size_t>(w_d2) * n2 + t]);
    y2[t] = channel_out(a, b);
  }
  int best_d2 = 0;
  if (pc.m_d2 > 1) {
    // Decoder assumes Theta = 0 and the repetition symbol x(0).
    double best2 = -kInf;
    for (int wd = 0; wd < pc.m_d2; ++wd) {
      double ll = 0.0;
      for (int t = 0; t < n2 && ll > -kInf; ++t) {
        auto [a, b] = ordered(pc.design.x0, cb_d2[static_cast<size_t>(wd) * n2 + t]);
        double p = ch.at(a, b, y2[t]);
        ll = p > 0.0 ? ll + std::log(p) : -kInf;
      }
      if (ll > best2) {
        best2 = ll;
        best_d2 = wd;
      }
    }
  }
  int theta_data = (best_d1 != w_d1 || best_d2 != w_d2) ? 1 : 0;
  if (cfg.force_theta)
    theta_data = pc.conf_user == 1 ? cfg.force_theta->second : cfg.force_theta->first;

  int theta1 = pc.conf_user == 1 ? theta_conf : theta_data;
  int theta2 = pc.conf_user == 1 ? theta_data : theta_conf;

  // ---- phase 3: both users send their confirmation bits
  std::vector<int> y3(n3);
  for (int t = 0; t < n3; ++t) {
    int a = theta1 ? quads[t][2] : quads[t][0];
    int b = theta2 ? quads[t][3] : quads[t][1];
    y3[t] = channel_out(a, b);
  }

  // ---- acceptance: every alternative's summed LLR must clear lambda. A
  // zero H0 likelihood (neg-inf term) forces rejection.
  bool accepted = true;
  for (const auto& [a1, a2] : kConfirmationAlts) {
    double sum = 0.0;
    int neg = 0, pos = 0;
    if (n2 > 0) {
      // re-send x(theta) is unknown to the decoder; its statistic always
      // tests x(0) against x(1) through the effective channel
      for (int t = 0; t < n2; ++t) {
        double v = log_ratio(pc.q0[y2[t]], pc.q1[y2[t]]);
        if (std::isinf(v)) (v > 0 ? pos : neg)++;
        else sum += v;
      }
    }
    for (int t = 0; t < n3; ++t) {
      double p00 = ch.at(quads[t][0], quads[t][1], y3[t]);
      double palt = ch.at(a1 ? quads[t][2] : quads[t][0], a2 ? quads[t][3] : quads[t][1], y3[t]);
      double v = log_ratio(p00, palt);
      if (std::isinf(v)) (v > 0 ? pos : neg)++;
      else sum += v;
    }
    bool ge = neg > 0 ? false : (pos > 0 ? true : sum >= pc.design.lambda);
    if (!ge) {
      accepted = false;
      break;
    }
  }
  return BlockOutcome{accepted, theta1 == 0 && theta2 == 0};
}

}  // namespace

SimResult run_scheme(const ChannelModel& ch, const SchemeConfig& cfg, int64_t trials,
                     uint64_t seed) {
  validate_config(ch, cfg);
  if (trials < 1) fail(Err::BadInput, "trials must be >= 1");
  Precomp pc = precompute(ch, cfg);

  SimResult res;
  res.trials = trials;
  res.seed = seed;
  // Feasibility estimate for the phase-2 rate split (warning only).
  if (pc.m_d2 > 1 && pc.design.n2 > 0) {
    double rate = std::log2(static_cast<double>(pc.m_d2)) / pc.design.n2;
    double cap = conditional_capacity(ch, pc.conf_user, pc.design.x0).capacity;
    if (rate > cap) res.warnings.push_back("phase-2 rate exceeds the hybrid capacity estimate");
  }

  constexpr int64_t kBlock = 1024;
  int64_t n_blocks = (trials + kBlock - 1) / kBlock;
  struct Tally {
    int64_t errors = 0, capped = 0, blocks = 0, rejects = 0, accept_err = 0;
    double blocks_sq = 0.0;
  };
  std::vector<Tally> tallies(n_blocks);
  parallel_for_blocks(n_blocks, [&](int64_t b) {
    Tally& tl = tallies[b];
    int64_t lo = b * kBlock, hi = std::min(trials, lo + kBlock);
    for (int64_t trial = lo; trial < hi; ++trial) {
      Rng rng(mix_seed(seed, static_cast<uint64_t>(trial)));
      int w_conf = rng.next_below(pc.m_conf);
      int w_d1 = rng.next_below(pc.m_d1);
      int w_d2 = rng.next_below(pc.m_d2);
      int blocks = 0;
      bool done = false, error = false;
      while (!done) {
        blocks++;
        BlockOutcome out = simulate_block(ch, cfg, pc, rng, w_conf, w_d1, w_d2);
        tl.blocks++;
        if (!out.accepted) tl.rejects++;
        if (out.accepted && !out.theta_ok) tl.accept_err++;
        if (out.accepted) {
          done = true;
          error = !out.theta_ok;
        } else if (blocks >= cfg.max_retransmissions) {
          done = true;
          error = true;  // capped paths count as errors
          tl.capped++;
        }
      }
      if (error) tl.errors++;
      tl.blocks_sq += static_cast<double>(blocks) * blocks;
    }
  });

  int64_t errors = 0, blocks = 0, rejects = 0, accept_err = 0, capped = 0;
  double blocks_sq = 0.0;
  for (const auto& tl : tallies) {
    errors += tl.errors;
    blocks += tl.blocks;
    rejects += tl.rejects;
    accept_err += tl.accept_err;
    capped += tl.capped;
    blocks_sq += tl.blocks_sq;
  }
  res.pe = static_cast<double>(errors) / trials;
  std::tie(res.pe_lo, res.pe_hi) = wilson_interval(errors, trials);
  res.q = static_cast<double>(rejects) / blocks;
  res.q_se = std::sqrt(std::max(res.q * (1.0 - res.q), 1e-300) / blocks);
  res.peb = static_cast<double>(accept_err) / blocks;
  res.peb_se = std::sqrt(std::max(res.peb * (1.0 - res.peb), 1e-300) / blocks);
  res.total_blocks = blocks;
  res.capped_trials = capped;
  res.mean_blocks = static_cast<double>(blocks) / trials;
  res.blocks_var =
      std::max(blocks_sq / trials - res.mean_blocks * res.mean_blocks, 0.0);
  res.mean_t = res.mean_blocks * cfg.n;
  res.exponent = res.pe > 0.0 ? -std::log2(res.pe) / res.mean_t : kInf;

  double pe_se = std::sqrt(std::max(res.pe * (1.0 - res.pe), 1e-300) / trials);
  res.renewal_residual = res.pe * (1.0 - res.q) - res.peb;
  res.renewal_tol = 4.0 * std::sqrt(std::pow((1.0 - res.q) * pe_se, 2) +
                                    std::pow(res.pe * res.q_se, 2) + res.peb_se * res.peb_se);
  double eb_se = std::sqrt(res.blocks_var / trials);
  res.blocks_identity_residual = res.mean_blocks * (1.0 - res.q) - 1.0;
  res.blocks_identity_tol = 4.0 * std::sqrt(std::pow((1.0 - res.q) * eb_se, 2) +
                                            std::pow(res.mean_blocks * res.q_se, 2));
  return res;
}

std::vector<SweepRow> sweep_gamma(const ChannelModel& ch, const SchemeConfig& base, double step,
                                  int64_t trials, uint64_t seed) {
  std::vector<SweepRow> rows;
  int denom = std::max(1, static_cast<int>(std::lround(1.0 / step)));
  for (int i2 = 0; i2 <= denom; ++i2)
    for (int i3 = 0; i3 + i2 <= denom; ++i3) {
      SchemeConfig cfg = base;
      cfg.gamma[1] = static_cast<double>(i2) / denom;
      cfg.gamma[2] = static_cast<double>(i3) / denom;
      cfg.gamma[0] = 1.0 - cfg.gamma[1] - cfg.gamma[2];
      try {
        validate_config(ch, cfg);
      } catch (const Error&) {
        continue;  // infeasible cell (e.g. no confirmation symbols)
      }
      SweepRow row;
      row.gamma1 = cfg.gamma[0];
      row.gamma2 = cfg.gamma[1];
      row.gamma3 = cfg.gamma[2];
      row.result = run_scheme(ch, cfg, trials, mix_seed(seed, i2 * 1000 + i3));
      rows.push_back(std::move(row));
    }
  return rows;
}

std::string config_to_json(const SchemeConfig& cfg) {
  nlohmann::json j;
  j["n"] = cfg.n;
  j["gamma"] = {cfg.gamma[0], cfg.gamma[1], cfg.gamma[2]};
  j["m1"] = cfg.m1;
  j["m2"] = cfg.m2;
  j["m_split"] = cfg.m_split;
  if (!cfg.data_p1.empty()) j["data_p1"] = cfg.data_p1;
  if (!cfg.data_p2.empty()) j["data_p2"] = cfg.data_p2;
  j["design"] = nlohmann::json::parse(design_to_json(cfg.design));
  j["max_retransmissions"] = cfg.max_retransmissions;
  if (cfg.force_theta) j["force_theta"] = {cfg.force_theta->first, cfg.force_theta->second};
  return j.dump(2);
}

SchemeConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Err::BadInput, std::string("config JSON parse error: ") + e.what());
  }
  SchemeConfig cfg;
  cfg.n = j.at("n").get<int>();
  auto g = j.at("gamma");
  cfg.gamma[0] = g.at(0).get<double>();
  cfg.gamma[1] = g.at(1).get<double>();
  cfg.gamma[2] = g.at(2).get<double>();
  cfg.m1 = j.at("m1").get<int>();
  cfg.m2 = j.at("m2").get<int>();
  cfg.m_split = j.value("m_split", 1);
  if (j.contains("data_p1")) cfg.data_p1 = j["data_p1"].get<ProbVector>();
  if (j.contains("data_p2")) cfg.data_p2 = j["data_p2"].get<ProbVector>();
  cfg.design = design_from_json(j.at("design").dump());
  cfg.max_retransmissions = j.value("max_retransmissions", 50);
  if (j.contains("force_theta"))
    cfg.force_theta = std::pair<int, int>{j["force_theta"].at(0).get<int>(),
                                          j["force_theta"].at(1).get<int>()};
  return cfg;
}

SchemeConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::BadInput, "cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string result_to_json(const SimResult& res) {
  nlohmann::json j;
  j["pe"] = num12(res.pe);
  j["pe_ci"] = {num12(res.pe_lo), num12(res.pe_hi)};
  j["q"] = num12(res.q);
  j["q_se"] = num12(res.q_se);
  j["peb"] = num12(res.peb);
  j["peb_se"] = num12(res.peb_se);
  j["mean_t"] = num12(res.mean_t);
  j["mean_blocks"] = num12(res.mean_blocks);
  j["exponent"] = num12(res.exponent);
  j["trials"] = res.trials;
  j["total_blocks"] = res.total_blocks;
  j["capped_trials"] = res.capped_trials;
  j["seed"] = res.seed;
  j["renewal_residual"] = num12(res.renewal_residual);
  j["renewal_tol"] = num12(res.renewal_tol);
  j["blocks_identity_residual"] = num12(res.blocks_identity_residual);
  j["blocks_identity_tol"] = num12(res.blocks_identity_tol);
  j["warnings"] = res.warnings;
  return j.dump(2);
}

}  // namespace macfb
