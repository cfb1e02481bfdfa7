#include "macfb/hypotest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "macfb/errors.hpp"
#include "macfb/jsonutil.hpp"
#include "macfb/parallel.hpp"
#include "macfb/rng.hpp"
#include "macfb/stats.hpp"

namespace macfb {

namespace {

constexpr double kLattice = 1048576.0;  // 2^20 lattice per bit
constexpr int64_t kNegInf = INT64_MIN;
constexpr int64_t kPosInf = INT64_MAX;

int64_t to_key(double v) {
  if (std::isinf(v)) return v > 0 ? kPosInf : kNegInf;
  return llround(v * kLattice);
}

// A -inf term pins the statistic at -inf (the H0 likelihood is literally
// zero); otherwise a +inf term pins it at +inf.
int64_t add_keys(int64_t a, int64_t b) {
  if (a == kNegInf || b == kNegInf) return kNegInf;
  if (a == kPosInf || b == kPosInf) return kPosInf;
  return a + b;
}

using Dist1 = std::map<int64_t, double>;

Dist1 conv_power(const Dist1& step, int n, size_t cap) {
  Dist1 acc{{0, 1.0}};
  for (int i = 0; i < n; ++i) {
    Dist1 next;
    for (const auto& [sv, sp] : acc)
      for (const auto& [dv, dp] : step) next[add_keys(sv, dv)] += sp * dp;
    if (next.size() > cap) fail(Err::SupportOverflow, "LLR support exceeded the lattice cap");
    acc = std::move(next);
  }
  return acc;
}

ProbVector effective_row(const ChannelModel& ch, const ConfirmationDesign& d, int symbol) {
  EffectiveChannel eff = effective_channel(ch, d.conf_user, d.p_other);
  return eff.rows.at(symbol);
}

// Phase-3 rows for a hypothesis pair (a1, a2) under quadruple z.
ProbVector quad_row(const ChannelModel& ch, const JointConfirmationDist& pz, size_t cell, int a1,
                    int a2) {
  int z10 = 0, z20 = 0, z11 = 0, z21 = 0;
  size_t rest = cell;
  z21 = static_cast<int>(rest % pz.x2_size);
  rest /= pz.x2_size;
  z11 = static_cast<int>(rest % pz.x1_size);
  rest /= pz.x1_size;
  z20 = static_cast<int>(rest % pz.x2_size);
  rest /= pz.x2_size;
  z10 = static_cast<int>(rest);
  (void)ch;
  return ch.row_vec(a1 ? z11 : z10, a2 ? z21 : z20);
}

bool rows_equal(const ProbVector& a, const ProbVector& b) {
  for (size_t i = 0; i < a.size(); ++i)
    if (std::fabs(a[i] - b[i]) > 1e-12) return false;
  return true;
}

double log_ratio(double p0, double p1) {
  if (p0 <= 0.0) return -kInf;
  if (p1 <= 0.0) return kInf;
  return std::log2(p0 / p1);
}

}  // namespace

void validate_design(const ChannelModel& ch, const ConfirmationDesign& d) {
  if (d.conf_user != 1 && d.conf_user != 2) fail(Err::BadInput, "conf_user must be 1 or 2");
  int mine = ch.input_size(d.conf_user);
  if (d.x0 < 0 || d.x0 >= mine || d.x1 < 0 || d.x1 >= mine)
    fail(Err::AlphabetMismatch, "repetition symbol outside the alphabet");
  if (d.n2 < 0 || d.n3 < 0 || (d.n2 == 0 && d.n3 == 0))
    fail(Err::BadInput, "phase lengths must be nonnegative and not both zero");
  if (d.n2 > 0) {
    if (d.x0 == d.x1) fail(Err::DegenerateTest, "x(0) == x(1) cannot carry a confirmation bit");
    if (static_cast<int>(d.p_other.size()) != ch.input_size(3 - d.conf_user))
      fail(Err::AlphabetMismatch, "p_other alphabet mismatch");
    validate_prob_vector(d.p_other);
  }
  if (d.n3 > 0) {
    if (d.pz.x1_size != ch.x1_size || d.pz.x2_size != ch.x2_size)
      fail(Err::AlphabetMismatch, "pz alphabets do not match the channel");
    validate_pz(d.pz);
  }
}

LlrDistribution llr_per_symbol(const ChannelModel& ch, const ConfirmationDesign& d, int phase,
                               std::pair<int, int> truth, std::optional<std::pair<int, int>> alt) {
  validate_design(ch, d);
  std::map<int64_t, double> acc;
  std::map<int64_t, double> exact_vals;  // key -> representative value (before rounding)
  if (phase == 2) {
    ProbVector q0 = effective_row(ch, d, d.x0);
    ProbVector q1 = effective_row(ch, d, d.x1);
    if (rows_equal(q0, q1))
      fail(Err::DegenerateTest, "effective rows coincide; the phase-2 test is degenerate");
    int truth_bit = d.conf_user == 1 ? truth.first : truth.second;
    const ProbVector& law = truth_bit ? q1 : q0;
    for (int y = 0; y < ch.y_size; ++y) {
      if (law[y] == 0.0) continue;
      double v = log_ratio(q0[y], q1[y]);
      int64_t key = to_key(v);
      acc[key] += law[y];
      exact_vals[key] = v;
    }
  } else if (phase == 3) {
    if (!alt) fail(Err::BadInput, "phase-3 LLR needs the alternative under test");
    auto [b1, b2] = *alt;
    for (size_t cell = 0; cell < d.pz.cells(); ++cell) {
      double w = d.pz.p[cell];
      if (w == 0.0) continue;
      ProbVector p00 = quad_row(ch, d.pz, cell, 0, 0);
      ProbVector palt = quad_row(ch, d.pz, cell, b1, b2);
      ProbVector law = quad_row(ch, d.pz, cell, truth.first, truth.second);
      for (int y = 0; y < ch.y_size; ++y) {
        if (law[y] == 0.0) continue;
        double v = log_ratio(p00[y], palt[y]);
        int64_t key = to_key(v);
        acc[key] += w * law[y];
        exact_vals[key] = v;
      }
    }
  } else {
    fail(Err::BadInput, "phase must be 2 or 3");
  }
  LlrDistribution out;
  for (auto it = acc.rbegin(); it != acc.rend(); ++it) {
    out.value.push_back(it->first == kNegInf   ? -kInf
                        : it->first == kPosInf ? kInf
                                               : static_cast<double>(it->first) / kLattice);
    out.prob.push_back(it->second);
  }
  return out;
}

namespace {

Dist1 step_dist(const LlrDistribution& d) {
  Dist1 out;
  for (size_t i = 0; i < d.value.size(); ++i) out[to_key(d.value[i])] += d.prob[i];
  return out;
}

// Distinguishability: the transcript law under `alt` equals H0's iff the
// phase-2 truth bit is 0 (or the test has no phase 2) and every supported
// quadruple yields identical rows.
std::array<bool, 3> distinguishable_alts(const ChannelModel& ch, const ConfirmationDesign& d) {
  std::array<bool, 3> out{};
  ProbVector q0, q1;
  if (d.n2 > 0) {
    q0 = effective_row(ch, d, d.x0);
    q1 = effective_row(ch, d, d.x1);
  }
  for (int a = 0; a < 3; ++a) {
    auto [a1, a2] = kConfirmationAlts[a];
    bool diff = false;
    int truth_bit = d.conf_user == 1 ? a1 : a2;
    if (d.n2 > 0 && truth_bit == 1 && !rows_equal(q0, q1)) diff = true;
    if (!diff && d.n3 > 0) {
      for (size_t cell = 0; cell < d.pz.cells() && !diff; ++cell) {
        if (d.pz.p[cell] == 0.0) continue;
        if (!rows_equal(quad_row(ch, d.pz, cell, 0, 0), quad_row(ch, d.pz, cell, a1, a2)))
          diff = true;
      }
    }
    out[a] = diff;
  }
  return out;
}

}  // namespace

namespace {

using Key3 = std::array<int64_t, 3>;

// Joint distribution of the three alternatives' phase-3 statistic sums under
// a given truth, convolved n3 times on the lattice.
std::map<Key3, double> joint_phase3(const ChannelModel& ch, const ConfirmationDesign& d,
                                    std::pair<int, int> truth, size_t cap) {
  std::map<Key3, double> joint{{Key3{0, 0, 0}, 1.0}};
  if (d.n3 == 0) return joint;
  std::map<Key3, double> step;
  for (size_t cell = 0; cell < d.pz.cells(); ++cell) {
    double w = d.pz.p[cell];
    if (w == 0.0) continue;
    ProbVector p00 = quad_row(ch, d.pz, cell, 0, 0);
    ProbVector law = quad_row(ch, d.pz, cell, truth.first, truth.second);
    std::array<ProbVector, 3> palt;
    for (int a = 0; a < 3; ++a)
      palt[a] = quad_row(ch, d.pz, cell, kConfirmationAlts[a].first, kConfirmationAlts[a].second);
    for (int y = 0; y < ch.y_size; ++y) {
      if (law[y] == 0.0) continue;
      Key3 key;
      for (int a = 0; a < 3; ++a) key[a] = to_key(log_ratio(p00[y], palt[a][y]));
      step[key] += w * law[y];
    }
  }
  for (int i = 0; i < d.n3; ++i) {
    std::map<Key3, double> next;
    for (const auto& [sv, sp] : joint)
      for (const auto& [dv, dp] : step) {
        Key3 key{add_keys(sv[0], dv[0]), add_keys(sv[1], dv[1]), add_keys(sv[2], dv[2])};
        next[key] += sp * dp;
      }
    if (next.size() > cap) fail(Err::SupportOverflow, "joint LLR support exceeded the lattice cap");
    joint = std::move(next);
  }
  return joint;
}

// Phase-2 per-symbol step; a degenerate hybrid phase (coinciding effective
// rows) contributes an identically-zero increment rather than an error, so
// designs whose phase 3 still separates the hypotheses remain computable.
Dist1 phase2_step(const ChannelModel& ch, const ConfirmationDesign& d, std::pair<int, int> truth) {
  ProbVector q0 = effective_row(ch, d, d.x0);
  ProbVector q1 = effective_row(ch, d, d.x1);
  if (rows_equal(q0, q1)) return Dist1{{0, 1.0}};
  int truth_bit = d.conf_user == 1 ? truth.first : truth.second;
  const ProbVector& law = truth_bit ? q1 : q0;
  Dist1 out;
  for (int y = 0; y < ch.y_size; ++y) {
    if (law[y] == 0.0) continue;
    out[to_key(log_ratio(q0[y], q1[y]))] += law[y];
  }
  return out;
}

// P(the full acceptance region | truth): all three constraints clear lambda.
double region_probability(const ChannelModel& ch, const ConfirmationDesign& d,
                          std::pair<int, int> truth, double lambda, size_t cap) {
  Dist1 unit{{0, 1.0}};
  Dist1 u = d.n2 > 0 ? conv_power(phase2_step(ch, d, truth), d.n2, cap) : unit;
  std::map<Key3, double> joint = joint_phase3(ch, d, truth, cap);
  double accept = 0.0;
  for (const auto& [uk, up] : u)
    for (const auto& [vk, vp] : joint) {
      bool all_ge = true;
      for (int a = 0; a < 3 && all_ge; ++a) {
        int64_t s = add_keys(uk, vk[a]);
        all_ge = s == kPosInf
                     ? true
                     : (s == kNegInf ? false : static_cast<double>(s) / kLattice >= lambda);
      }
      if (all_ge) accept += up * vp;
    }
  return accept;
}

}  // namespace

ExactErrors exact_errors(const ChannelModel& ch, const ConfirmationDesign& d, size_t cap) {
  validate_design(ch, d);
  ExactErrors out;
  out.distinguishable = distinguishable_alts(ch, d);
  out.lattice_error = (d.n2 + d.n3) * 0.5 / kLattice;
  if (std::none_of(out.distinguishable.begin(), out.distinguishable.end(), [](bool b) { return b; }))
    fail(Err::DegenerateTest, "no alternative is distinguishable from H0");

  // beta_a is the exact probability of the full acceptance region (every
  // alternative's constraint) under the transcript law of `a`; alpha is its
  // complement under H0.
  for (int a = 0; a < 3; ++a) {
    out.beta_by_alt[a] = region_probability(ch, d, kConfirmationAlts[a], d.lambda, cap);
    if (out.distinguishable[a]) out.beta = std::max(out.beta, out.beta_by_alt[a]);
  }
  out.alpha = 1.0 - region_probability(ch, d, {0, 0}, d.lambda, cap);
  return out;
}

McErrors monte_carlo_errors(const ChannelModel& ch, const ConfirmationDesign& d, int64_t trials,
                            uint64_t seed) {
  validate_design(ch, d);
  if (trials < 1) fail(Err::BadInput, "trials must be >= 1");
  McErrors out;
  out.trials = trials;
  out.seed = seed;
  out.distinguishable = distinguishable_alts(ch, d);

  constexpr int64_t kBlock = 4096;
  int64_t n_blocks = (trials + kBlock - 1) / kBlock;

  // Hoisted per-symbol tables: phase-2 rows, and per supported pz cell the
  // truth laws and the LLR values against each alternative.
  ProbVector q0, q1;
  if (d.n2 > 0) {
    q0 = effective_row(ch, d, d.x0);
    q1 = effective_row(ch, d, d.x1);
  }
  struct Cell {
    double weight;
    std::array<ProbVector, 4> law;                  // truth (0,0),(0,1),(1,0),(1,1)
    std::vector<std::array<double, 3>> llr;         // [y][alt]
  };
  std::vector<Cell> cells;
  for (size_t cell = 0; cell < d.pz.cells() && d.n3 > 0; ++cell) {
    if (d.pz.p[cell] == 0.0) continue;
    Cell c;
    c.weight = d.pz.p[cell];
    c.law = {quad_row(ch, d.pz, cell, 0, 0), quad_row(ch, d.pz, cell, 0, 1),
             quad_row(ch, d.pz, cell, 1, 0), quad_row(ch, d.pz, cell, 1, 1)};
    c.llr.resize(ch.y_size);
    for (int y = 0; y < ch.y_size; ++y)
      for (int a = 0; a < 3; ++a) {
        ProbVector palt =
            quad_row(ch, d.pz, cell, kConfirmationAlts[a].first, kConfirmationAlts[a].second);
        c.llr[y][a] = log_ratio(c.law[0][y], palt[y]);
      }
    cells.push_back(std::move(c));
  }
  std::vector<double> cell_pmf;
  for (const auto& c : cells) cell_pmf.push_back(c.weight);
  if (!cell_pmf.empty()) {
    double mass = 0.0;
    for (double w : cell_pmf) mass += w;
    for (double& w : cell_pmf) w /= mass;
  }

  // One transcript under `truth`; accumulates the three summed statistics.
  auto run_one = [&](Rng& rng, std::pair<int, int> truth, std::array<double, 3>& stat,
                     std::array<int, 3>& neg, std::array<int, 3>& pos) {
    stat = {0.0, 0.0, 0.0};
    neg = {0, 0, 0};
    pos = {0, 0, 0};
    if (d.n2 > 0) {
      int truth_bit = d.conf_user == 1 ? truth.first : truth.second;
      const ProbVector& law = truth_bit ? q1 : q0;
      for (int t = 0; t < d.n2; ++t) {
        int y = rng.next_from(law);
        double v = log_ratio(q0[y], q1[y]);
        for (int a = 0; a < 3; ++a) {
          if (std::isinf(v)) (v > 0 ? pos[a] : neg[a])++;
          else stat[a] += v;
        }
      }
    }
    int truth_idx = truth.first * 2 + truth.second;
    for (int t = 0; t < d.n3; ++t) {
      const Cell& c = cells[cell_pmf.size() == 1 ? 0 : rng.next_from(cell_pmf)];
      int y = rng.next_from(c.law[truth_idx]);
      for (int a = 0; a < 3; ++a) {
        double v = c.llr[y][a];
        if (std::isinf(v)) (v > 0 ? pos[a] : neg[a])++;
        else stat[a] += v;
      }
    }
  };
  auto coord_ge = [&](double s, int neg, int pos) {
    if (neg > 0) return false;
    if (pos > 0) return true;
    return s >= d.lambda;
  };

  std::vector<int64_t> alpha_hits(n_blocks, 0);
  std::vector<std::array<int64_t, 3>> beta_hits(n_blocks, {0, 0, 0});
  std::vector<int64_t> block_n(n_blocks, 0);
  parallel_for_blocks(n_blocks, [&](int64_t b) {
    Rng rng(mix_seed(seed, static_cast<uint64_t>(b)));
    int64_t lo = b * kBlock, hi = std::min(trials, lo + kBlock);
    block_n[b] = hi - lo;
    std::array<double, 3> stat;
    std::array<int, 3> neg, pos;
    for (int64_t t = lo; t < hi; ++t) {
      run_one(rng, {0, 0}, stat, neg, pos);
      bool accept = true;
      for (int a = 0; a < 3 && accept; ++a) accept = coord_ge(stat[a], neg[a], pos[a]);
      if (!accept) alpha_hits[b]++;
      for (int a = 0; a < 3; ++a) {
        run_one(rng, kConfirmationAlts[a], stat, neg, pos);
        bool all_ge = true;
        for (int a2 = 0; a2 < 3 && all_ge; ++a2) all_ge = coord_ge(stat[a2], neg[a2], pos[a2]);
        if (all_ge) beta_hits[b][a]++;
      }
    }
  });
  int64_t a_hits = 0;
  std::array<int64_t, 3> b_hits{0, 0, 0};
  for (int64_t b = 0; b < n_blocks; ++b) {
    a_hits += alpha_hits[b];
    for (int a = 0; a < 3; ++a) b_hits[a] += beta_hits[b][a];
  }
  out.alpha = static_cast<double>(a_hits) / trials;
  std::tie(out.alpha_lo, out.alpha_hi) = wilson_interval(a_hits, trials);
  int64_t headline = -1;
  for (int a = 0; a < 3; ++a) {
    out.beta_by_alt[a] = static_cast<double>(b_hits[a]) / trials;
    if (out.distinguishable[a] && b_hits[a] > headline) headline = b_hits[a];
  }
  if (headline < 0) fail(Err::DegenerateTest, "no alternative is distinguishable from H0");
  out.beta = static_cast<double>(headline) / trials;
  std::tie(out.beta_lo, out.beta_hi) = wilson_interval(headline, trials);
  return out;
}

double exponent_slope(const std::vector<ErrorCurvePoint>& curve) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : curve)
    if (p.beta > 0.0) pts.emplace_back(p.n, -std::log2(p.beta));
  if (pts.size() < 3) fail(Err::InsufficientData, "exponent_slope needs >= 3 points with beta > 0");
  double xbar = 0.0, ybar = 0.0;
  for (auto& [x, y] : pts) {
    xbar += x;
    ybar += y;
  }
  xbar /= pts.size();
  ybar /= pts.size();
  double num = 0.0, den = 0.0;
  for (auto& [x, y] : pts) {
    num += (x - xbar) * (y - ybar);
    den += (x - xbar) * (x - xbar);
  }
  return num / den;
}

double np_lambda(const ChannelModel& ch, const ConfirmationDesign& d, double level) {
  validate_design(ch, d);
  // Only meaningful when the distinct alternatives share one statistic.
  Dist1 unit{{0, 1.0}};
  Dist1 u0 = d.n2 > 0 ? conv_power(step_dist(llr_per_symbol(ch, d, 2, {0, 0})), d.n2, 10'000'000)
                      : unit;
  if (d.n3 > 0) fail(Err::BadInput, "np_lambda supports hybrid-only (n3 = 0) designs");
  double cum = 0.0;
  int64_t best = kNegInf;
  for (const auto& [k, p] : u0) {
    if (k == kNegInf || k == kPosInf) continue;
    if (cum + p <= level + 1e-15) {
      cum += p;
      best = k;
    } else {
      break;
    }
  }
  if (best == kNegInf) {
    // Even the smallest threshold violates the level; sit below the support.
    return (u0.begin()->first == kNegInf ? -1e9 : static_cast<double>(u0.begin()->first) / kLattice) -
           1.0;
  }
  return (static_cast<double>(best) + 0.5) / kLattice;
}

std::string design_to_json(const ConfirmationDesign& d) {
  nlohmann::json j;
  j["conf_user"] = d.conf_user;
  j["x0"] = d.x0;
  j["x1"] = d.x1;
  j["p_other"] = d.p_other;
  j["n2"] = d.n2;
  j["n3"] = d.n3;
  j["lambda"] = num12(d.lambda);
  nlohmann::json pz;
  pz["x1_size"] = d.pz.x1_size;
  pz["x2_size"] = d.pz.x2_size;
  pz["p"] = d.pz.p;
  j["pz"] = std::move(pz);
  return j.dump(2);
}

ConfirmationDesign design_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Err::BadInput, std::string("design JSON parse error: ") + e.what());
  }
  ConfirmationDesign d;
  d.conf_user = j.value("conf_user", 1);
  d.x0 = j.at("x0").get<int>();
  d.x1 = j.at("x1").get<int>();
  if (j.contains("p_other")) d.p_other = j["p_other"].get<ProbVector>();
  d.n2 = j.value("n2", 0);
  d.n3 = j.value("n3", 0);
  d.lambda = j.contains("lambda") ? parse_num(j["lambda"]) : 0.0;
  if (j.contains("pz")) {
    d.pz.x1_size = j["pz"].at("x1_size").get<int>();
    d.pz.x2_size = j["pz"].at("x2_size").get<int>();
    d.pz.p = j["pz"].at("p").get<std::vector<double>>();
  }
  return d;
}

ConfirmationDesign load_design_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::BadInput, "cannot open design file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return design_from_json(ss.str());
}

}  // namespace macfb
