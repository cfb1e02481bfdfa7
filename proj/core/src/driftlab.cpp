#include "macfb/driftlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "macfb/errors.hpp"
#include "macfb/rng.hpp"

namespace macfb {

namespace {

std::vector<size_t> prefix_counts(int y_size, int horizon) {
  std::vector<size_t> out(horizon);
  size_t p = 1;
  for (int t = 0; t < horizon; ++t) {
    out[t] = p;
    p *= y_size;
  }
  return out;
}

void note_violation(CheckReport& rep, double margin, const std::string& where) {
  rep.checked++;
  rep.worst_margin = std::min(rep.worst_margin, margin);
  if (margin < 0.0) {
    rep.violations++;
    if (rep.notes.size() < 8) rep.notes.push_back(where);
  }
}

std::string path_name(int level, size_t index) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "level %d node %zu", level, index);
  return buf;
}

}  // namespace

TinyCode random_tiny_code(const ChannelModel& ch, int m1, int m2, int horizon, uint64_t seed) {
  TinyCode code;
  code.m1 = m1;
  code.m2 = m2;
  code.horizon = horizon;
  code.prefixes = prefix_counts(ch.y_size, horizon);
  Rng rng(seed);
  for (int user = 0; user < 2; ++user) {
    int alphabet = user == 0 ? ch.x1_size : ch.x2_size;
    int m = user == 0 ? m1 : m2;
    code.enc[user].resize(horizon);
    for (int t = 0; t < horizon; ++t) {
      code.enc[user][t].resize(static_cast<size_t>(m) * code.prefixes[t]);
      for (auto& s : code.enc[user][t]) s = rng.next_below(alphabet);
    }
  }
  return code;
}

TinyCode repetition_code(const ChannelModel& ch, int m1, int m2, int horizon) {
  TinyCode code;
  code.m1 = m1;
  code.m2 = m2;
  code.horizon = horizon;
  code.prefixes = prefix_counts(ch.y_size, horizon);
  for (int user = 0; user < 2; ++user) {
    int alphabet = user == 0 ? ch.x1_size : ch.x2_size;
    int m = user == 0 ? m1 : m2;
    code.enc[user].resize(horizon);
    for (int t = 0; t < horizon; ++t) {
      code.enc[user][t].resize(static_cast<size_t>(m) * code.prefixes[t]);
      for (int w = 0; w < m; ++w)
        for (size_t p = 0; p < code.prefixes[t]; ++p)
          code.enc[user][t][static_cast<size_t>(w) * code.prefixes[t] + p] = w % alphabet;
    }
  }
  return code;
}

TinyCode tiny_code_from_json(const ChannelModel& ch, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Err::BadInput, std::string("code JSON parse error: ") + e.what());
  }
  TinyCode code;
  code.m1 = j.at("m1").get<int>();
  code.m2 = j.at("m2").get<int>();
  code.horizon = j.at("horizon").get<int>();
  code.prefixes = prefix_counts(ch.y_size, code.horizon);
  const char* keys[2] = {"enc1", "enc2"};
  for (int user = 0; user < 2; ++user) {
    int m = user == 0 ? code.m1 : code.m2;
    int alphabet = user == 0 ? ch.x1_size : ch.x2_size;
    code.enc[user] = j.at(keys[user]).get<std::vector<std::vector<int>>>();
    if (static_cast<int>(code.enc[user].size()) != code.horizon)
      fail(Err::BadInput, "encoder table count must equal the horizon");
    for (int t = 0; t < code.horizon; ++t) {
      if (code.enc[user][t].size() != static_cast<size_t>(m) * code.prefixes[t])
        fail(Err::BadInput, "encoder table size mismatch at time " + std::to_string(t + 1));
      for (int s : code.enc[user][t])
        if (s < 0 || s >= alphabet) fail(Err::BadInput, "encoder symbol outside the alphabet");
    }
  }
  return code;
}

TinyCode load_tiny_code_file(const ChannelModel& ch, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::BadInput, "cannot open code file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return tiny_code_from_json(ch, ss.str());
}

namespace {

void fill_entropies(TraceNode& node, int m1, int m2) {
  double h_joint = 0.0;
  std::vector<double> p1(m1, 0.0), p2(m2, 0.0);
  node.map_mass = 0.0;
  for (int w1 = 0; w1 < m1; ++w1)
    for (int w2 = 0; w2 < m2; ++w2) {
      double v = node.post[static_cast<size_t>(w1) * m2 + w2];
      if (v > 0.0) h_joint -= v * std::log2(v);
      p1[w1] += v;
      p2[w2] += v;
      node.map_mass = std::max(node.map_mass, v);
    }
  double h1 = 0.0, h2 = 0.0;
  for (double v : p1)
    if (v > 0.0) h1 -= v * std::log2(v);
  for (double v : p2)
    if (v > 0.0) h2 -= v * std::log2(v);
  // Posterior masses carry ulp-level noise (sum to 1 +- 1e-16), which can
  // leave +-1e-16 where the entropy is exactly zero. Snap those so the
  // zero-entropy exclusion convention of the log-ratio checks applies.
  auto snap = [](double h) { return std::fabs(h) < 1e-14 ? 0.0 : std::max(h, 0.0); };
  node.htld = {snap(h1), snap(h2), snap(h_joint)};
  node.hbar = {snap(h_joint - h2), snap(h_joint - h1), snap(h_joint)};
}

// Mutual information I(A; Y) in bits from a joint pmf table [a][y].
double mi_bits(const std::vector<double>& joint, int na, int ny) {
  std::vector<double> pa(na, 0.0), py(ny, 0.0);
  for (int a = 0; a < na; ++a)
    for (int y = 0; y < ny; ++y) {
      pa[a] += joint[static_cast<size_t>(a) * ny + y];
      py[y] += joint[static_cast<size_t>(a) * ny + y];
    }
  double mi = 0.0;
  for (int a = 0; a < na; ++a)
    for (int y = 0; y < ny; ++y) {
      double v = joint[static_cast<size_t>(a) * ny + y];
      if (v > 0.0) mi += v * std::log2(v / (pa[a] * py[y]));
    }
  return std::max(mi, 0.0);
}

}  // namespace

PosteriorTrace enumerate_trace(const ChannelModel& ch, const TinyCode& code, size_t cell_limit) {
  if (!ch.strictly_positive())
    fail(Err::BadInput, "enumerate_trace requires a strictly positive channel");
  int N = code.horizon, m1 = code.m1, m2 = code.m2;
  size_t nodes = 0, level_size = 1;
  for (int t = 0; t <= N; ++t) {
    nodes += level_size;
    level_size *= ch.y_size;
  }
  if (nodes * static_cast<size_t>(m1) * m2 > cell_limit)
    fail(Err::TooLarge, "trace enumeration exceeds the cell limit");

  PosteriorTrace trace;
  trace.ch = ch;
  trace.code = code;
  trace.horizon = N;
  trace.eta = max_log_ratio(ch);
  trace.dmax = d_ub(ch);
  trace.levels.resize(N + 1);
  level_size = 1;
  for (int t = 0; t <= N; ++t) {
    trace.levels[t].resize(level_size);
    level_size *= ch.y_size;
  }

  TraceNode& root = trace.levels[0][0];
  root.prob = 1.0;
  root.post.assign(static_cast<size_t>(m1) * m2, 1.0 / (m1 * m2));
  fill_entropies(root, m1, m2);

  // Walk level by level; the path prefix index at depth t is the base-y
  // integer of y^t, so children of node i are i*y + y_next.
  for (int t = 0; t < N; ++t) {
    for (size_t idx = 0; idx < trace.levels[t].size(); ++idx) {
      TraceNode& node = trace.levels[t][idx];
      if (node.prob <= 0.0) continue;
      // per-message inputs at time t+1 given this prefix
      std::vector<int> x1(m1), x2(m2);
      for (int w = 0; w < m1; ++w) x1[w] = code.symbol(1, t + 1, w, static_cast<int>(idx));
      for (int w = 0; w < m2; ++w) x2[w] = code.symbol(2, t + 1, w, static_cast<int>(idx));

      // children posteriors
      for (int y = 0; y < ch.y_size; ++y) {
        TraceNode& child = trace.levels[t + 1][idx * ch.y_size + y];
        child.post.assign(static_cast<size_t>(m1) * m2, 0.0);
        double mass = 0.0;
        for (int w1 = 0; w1 < m1; ++w1)
          for (int w2 = 0; w2 < m2; ++w2) {
            double v = node.post[static_cast<size_t>(w1) * m2 + w2] * ch.at(x1[w1], x2[w2], y);
            child.post[static_cast<size_t>(w1) * m2 + w2] = v;
            mass += v;
          }
        child.prob = node.prob * mass;
        if (mass > 0.0)
          for (auto& v : child.post) v /= mass;
        fill_entropies(child, m1, m2);
      }

      // J constants. J3 from the induced joint input law; J1/J2 from the
      // per-class decomposition over the other user's input history.
      {
        std::vector<double> joint(static_cast<size_t>(ch.x1_size) * ch.x2_size * ch.y_size, 0.0);
        for (int w1 = 0; w1 < m1; ++w1)
          for (int w2 = 0; w2 < m2; ++w2) {
            double w = node.post[static_cast<size_t>(w1) * m2 + w2];
            if (w == 0.0) continue;
            for (int y = 0; y < ch.y_size; ++y)
              joint[(static_cast<size_t>(x1[w1]) * ch.x2_size + x2[w2]) * ch.y_size + y] +=
                  w * ch.at(x1[w1], x2[w2], y);
          }
        node.drift_j[2] = mi_bits(joint, ch.x1_size * ch.x2_size, ch.y_size);
      }
      // Input-history signatures through time t+1. The signature of w is the
      // sequence of symbols it sends along this path; messages with equal
      // signatures are indistinguishable given X^{t+1}.
      auto history_classes = [&](int user, int m) {
        std::vector<int64_t> sig(m, 0);
        size_t prefix = 0;  // base-y prefix index at time s
        int alphabet = user == 1 ? ch.x1_size : ch.x2_size;
        std::vector<size_t> prefix_at(t + 2);
        // reconstruct prefix indices along the path from idx
        prefix_at[t] = idx;
        size_t cur = idx;
        for (int s = t - 1; s >= 0; --s) {
          cur /= ch.y_size;
          prefix_at[s] = cur;
        }
        (void)prefix;
        for (int w = 0; w < m; ++w) {
          int64_t s = 0;
          for (int step = 1; step <= t + 1; ++step)
            s = s * alphabet + code.symbol(user, step, w, static_cast<int>(prefix_at[step - 1]));
          sig[w] = s;
        }
        return sig;
      };
      auto class_mi = [&](int cond_user) {
        // cond_user's history is conditioned on; the other user's time-(t+1)
        // symbol is the variable of the per-class mutual information.
        int mc = cond_user == 1 ? m1 : m2;
        int mv = cond_user == 1 ? m2 : m1;
        const std::vector<int>& xc = cond_user == 1 ? x1 : x2;
        const std::vector<int>& xv = cond_user == 1 ? x2 : x1;
        int var_alpha = cond_user == 1 ? ch.x2_size : ch.x1_size;
        std::vector<int64_t> sig = history_classes(cond_user, mc);
        std::map<int64_t, std::vector<int>> classes;
        for (int w = 0; w < mc; ++w) classes[sig[w]].push_back(w);
        double total = 0.0;
        for (const auto& [s, members] : classes) {
          (void)s;
          double pc = 0.0;
          std::vector<double> joint(static_cast<size_t>(var_alpha) * ch.y_size, 0.0);
          for (int wc : members)
            for (int wv = 0; wv < mv; ++wv) {
              size_t pidx = cond_user == 1 ? static_cast<size_t>(wc) * m2 + wv
                                           : static_cast<size_t>(wv) * m2 + wc;
              double w = node.post[pidx];
              if (w == 0.0) continue;
              pc += w;
              int a1 = cond_user == 1 ? xc[wc] : xv[wv];
              int a2 = cond_user == 1 ? xv[wv] : xc[wc];
              for (int y = 0; y < ch.y_size; ++y)
                joint[static_cast<size_t>(xv[wv]) * ch.y_size + y] += w * ch.at(a1, a2, y);
            }
          if (pc == 0.0) continue;
          for (auto& v : joint) v /= pc;
          total += pc * mi_bits(joint, var_alpha, ch.y_size);
        }
        return total;
      };
      node.drift_j[0] = class_mi(2);  // J^1 conditions on user 2's history
      node.drift_j[1] = class_mi(1);

      // D constants: vertex-form divergence of the induced effective rows.
      auto d_constant = [&](int user) {
        int mine = user == 1 ? ch.x1_size : ch.x2_size;
        int other = user == 1 ? ch.x2_size : ch.x1_size;
        // nu(x_user, x_other) from the posterior
        std::vector<double> nu(static_cast<size_t>(mine) * other, 0.0);
        for (int w1 = 0; w1 < m1; ++w1)
          for (int w2 = 0; w2 < m2; ++w2) {
            double w = node.post[static_cast<size_t>(w1) * m2 + w2];
            int a = user == 1 ? x1[w1] : x2[w2];
            int b = user == 1 ? x2[w2] : x1[w1];
            nu[static_cast<size_t>(a) * other + b] += w;
          }
        double best = 0.0;
        for (int a = 0; a < mine; ++a) {
          double pa = 0.0;
          for (int b = 0; b < other; ++b) pa += nu[static_cast<size_t>(a) * other + b];
          if (pa == 0.0) continue;
          ProbVector eff(ch.y_size, 0.0);
          for (int b = 0; b < other; ++b) {
            double w = nu[static_cast<size_t>(a) * other + b] / pa;
            if (w == 0.0) continue;
            const double* r = user == 1 ? ch.row(a, b) : ch.row(b, a);
            for (int y = 0; y < ch.y_size; ++y) eff[y] += w * r[y];
          }
          for (int ap = 0; ap < mine; ++ap)
            for (int bp = 0; bp < other; ++bp) {
              ProbVector alt = user == 1 ? ch.row_vec(ap, bp) : ch.row_vec(bp, ap);
              best = std::max(best, kl(eff, alt));
            }
        }
        return best;
      };
      node.drift_d[0] = d_constant(1);
      node.drift_d[1] = d_constant(2);
      node.drift_d[2] = trace.dmax;
    }
  }
  return trace;
}

CheckReport check_linear_drift(const PosteriorTrace& trace) {
  CheckReport rep;
  rep.name = "linear_drift";
  int y = trace.ch.y_size;
  for (int t = 0; t < trace.horizon; ++t)
    for (size_t idx = 0; idx < trace.levels[t].size(); ++idx) {
      const TraceNode& node = trace.levels[t][idx];
      if (node.prob <= 0.0) continue;
      for (int i = 0; i < 3; ++i) {
        double drift = 0.0;
        for (int b = 0; b < y; ++b) {
          const TraceNode& child = trace.levels[t + 1][idx * y + b];
          drift += (child.prob / node.prob) * child.hbar[i];
        }
        drift -= node.hbar[i];
        note_violation(rep, drift + node.drift_j[i] + 1e-9, path_name(t, idx));
      }
    }
  return rep;
}

CheckReport check_eta_bound(const PosteriorTrace& trace) {
  CheckReport rep;
  rep.name = "eta_bound";
  int y = trace.ch.y_size;
  for (int t = 0; t < trace.horizon; ++t)
    for (size_t idx = 0; idx < trace.levels[t].size(); ++idx) {
      const TraceNode& node = trace.levels[t][idx];
      if (node.prob <= 0.0) continue;
      for (int i = 0; i < 3; ++i) {
        if (node.htld[i] <= 0.0) continue;  // point-mass posterior, by convention
        for (int b = 0; b < y; ++b) {
          const TraceNode& child = trace.levels[t + 1][idx * y + b];
          if (child.prob <= 0.0 || child.htld[i] <= 0.0) continue;
          double inc = std::fabs(std::log2(child.htld[i]) - std::log2(node.htld[i]));
          note_violation(rep, trace.eta + 1e-9 - inc, path_name(t, idx));
        }
      }
    }
  return rep;
}

double kappa_slack(const PosteriorTrace& trace, double eps) {
  double eta1 = binary_entropy_inv(eps);
  double root = std::sqrt(eta1);
  return (2.0 * std::log2(std::exp(1.0)) + trace.dmax) * eta1 +
         trace.ch.y_size * (binary_entropy(root) + (1.0 + trace.eta) * root);
}

CheckReport check_log_drift(const PosteriorTrace& trace, double eps) {
  CheckReport rep;
  rep.name = "log_drift";
  double slack = kappa_slack(trace, eps) + trace.dmax * binary_entropy_inv(eps);
  int y = trace.ch.y_size;
  for (int t = 0; t < trace.horizon; ++t)
    for (size_t idx = 0; idx < trace.levels[t].size(); ++idx) {
      const TraceNode& node = trace.levels[t][idx];
      if (node.prob <= 0.0) continue;
      for (int i = 0; i < 3; ++i) {
        if (node.htld[i] <= 0.0 || node.htld[i] >= eps) continue;
        double drift = 0.0;
        for (int b = 0; b < y; ++b) {
          const TraceNode& child = trace.levels[t + 1][idx * y + b];
          if (child.prob <= 0.0) continue;
          drift += (child.prob / node.prob) * std::log2(std::max(child.htld[i], 1e-300));
        }
        drift -= std::log2(node.htld[i]);
        note_violation(rep, drift + node.drift_d[i] + slack + 1e-9, path_name(t, idx));
      }
    }
  if (rep.checked == 0)
    fail(Err::NoQualifyingNodes, "no node with 0 < Htld < eps at this horizon");
  return rep;
}

CheckReport check_supermartingale(const PosteriorTrace& trace) {
  CheckReport rep;
  rep.name = "supermartingale";
  int y = trace.ch.y_size;
  for (int t = 0; t < trace.horizon; ++t)
    for (size_t idx = 0; idx < trace.levels[t].size(); ++idx) {
      const TraceNode& node = trace.levels[t][idx];
      if (node.prob <= 0.0) continue;
      for (int i = 0; i < 3; ++i) {
        double exp_child = 0.0;
        for (int b = 0; b < y; ++b) {
          const TraceNode& child = trace.levels[t + 1][idx * y + b];
          exp_child += (child.prob / node.prob) * child.htld[i];
        }
        note_violation(rep, node.htld[i] - exp_child + 1e-9, path_name(t, idx));
      }
    }
  return rep;
}

CheckReport check_grouping_identity(const PosteriorTrace& trace) {
  CheckReport rep;
  rep.name = "grouping_identity";
  int m1 = trace.code.m1, m2 = trace.code.m2;
  for (int t = 0; t <= trace.horizon; ++t)
    for (size_t idx = 0; idx < trace.levels[t].size(); ++idx) {
      const TraceNode& node = trace.levels[t][idx];
      if (node.prob <= 0.0) continue;
      std::vector<double> p1(m1, 0.0);
      for (int w1 = 0; w1 < m1; ++w1)
        for (int w2 = 0; w2 < m2; ++w2) p1[w1] += node.post[static_cast<size_t>(w1) * m2 + w2];
      int star = static_cast<int>(std::max_element(p1.begin(), p1.end()) - p1.begin());
      double mu = p1[star];
      double rest = 1.0 - mu;
      double h_hat = 0.0;
      if (rest > 1e-300) {
        for (int w1 = 0; w1 < m1; ++w1) {
          if (w1 == star || p1[w1] <= 0.0) continue;
          double v = p1[w1] / rest;
          h_hat -= v * std::log2(v);
        }
      }
      double rhs = binary_entropy(mu) + rest * h_hat;
      note_violation(rep, 1e-12 - std::fabs(rhs - node.htld[0]), path_name(t, idx));
    }
  return rep;
}

namespace {

struct PathData {
  double prob = 0.0;
  std::vector<const TraceNode*> nodes;  // depth 0..N
  // pruned-time data per process i
  std::array<int, 3> tau_lo{}, tau_hi{};
  std::array<std::vector<int>, 3> t_n;
};

std::vector<PathData> enumerate_paths(const PosteriorTrace& trace) {
  int N = trace.horizon, y = trace.ch.y_size;
  size_t n_paths = trace.levels[N].size();
  std::vector<PathData> paths(n_paths);
  for (size_t leaf = 0; leaf < n_paths; ++leaf) {
    PathData& pd = paths[leaf];
    pd.nodes.resize(N + 1);
    size_t idx = leaf;
    for (int t = N; t >= 0; --t) {
      pd.nodes[t] = &trace.levels[t][idx];
      idx /= y;
    }
    pd.prob = pd.nodes[N]->prob;
  }
  return paths;
}

void fill_pruned_times(PathData& pd, int i, double eps, int N) {
  // tau_eps = inf{t>0 : H_t <= eps} ^ N ; tau^eps = sup{t>0 : H_{t-1} >= eps} ^ N
  int lo = N;
  for (int t = 1; t <= N; ++t) {
    if (pd.nodes[t]->htld[i] <= eps) {
      lo = t;
      break;
    }
  }
  int hi = 0;
  for (int t = 1; t <= N; ++t)
    if (pd.nodes[t - 1]->htld[i] >= eps) hi = t;
  hi = std::min(hi, N);
  pd.tau_lo[i] = lo;
  pd.tau_hi[i] = hi;
  pd.t_n[i].resize(N + 1);
  for (int n = 0; n <= N; ++n) {
    int tn;
    if (n < lo) tn = n;
    else if (n <= N) tn = std::max(n, hi);
    else tn = N;
    pd.t_n[i][n] = std::min(tn, N);
  }
}

}  // namespace

std::vector<PrunedTimes> pruned_times(const PosteriorTrace& trace, int process, double eps) {
  if (process < 1 || process > 3) fail(Err::BadInput, "process index must be 1..3");
  std::vector<PathData> paths = enumerate_paths(trace);
  std::vector<PrunedTimes> out;
  out.reserve(paths.size());
  for (auto& pd : paths) {
    fill_pruned_times(pd, process - 1, eps, trace.horizon);
    out.push_back({pd.tau_lo[process - 1], pd.tau_hi[process - 1], pd.t_n[process - 1]});
  }
  return out;
}

CheckReport check_pruned_submartingale(const PosteriorTrace& trace, double eps, double I, double D,
                                       double mu) {
  CheckReport rep;
  rep.name = "pruned_submartingale";
  int N = trace.horizon;
  if (!(eps > 0.0 && eps < 1.0)) fail(Err::HypothesisViolated, "eps must be in (0,1)");
  if (!(I >= D && D > 0.0)) fail(Err::HypothesisViolated, "need I >= D > 0");
  if (!(mu > 0.0)) fail(Err::HypothesisViolated, "need mu > 0");

  double slack = kappa_slack(trace, eps) + trace.dmax * binary_entropy_inv(eps);
  std::array<double, 3> k4 = {std::log2(static_cast<double>(trace.code.m1)),
                              std::log2(static_cast<double>(trace.code.m2)),
                              std::log2(static_cast<double>(trace.code.m1) * trace.code.m2)};

  // Hypothesis gate: Hbar <= Htld, linear drift with k1, log drift with k2,
  // bounded increments with k3/k4, and k1 <= k2 per node.
  for (int t = 0; t <= N; ++t)
    for (const TraceNode& node : trace.levels[t]) {
      if (node.prob <= 0.0) continue;
      for (int i = 0; i < 3; ++i)
        if (node.hbar[i] > node.htld[i] + 1e-12)
          fail(Err::HypothesisViolated, "Hbar <= Htld failed");
      if (t < N)
        for (int i = 0; i < 3; ++i)
          if (node.drift_j[i] > node.drift_d[i] + slack + 1e-12)
            fail(Err::HypothesisViolated, "k1 <= k2 failed");
    }
  CheckReport lin = check_linear_drift(trace);
  if (!lin.pass()) fail(Err::HypothesisViolated, "linear drift hypothesis failed");
  CheckReport etab = check_eta_bound(trace);
  if (!etab.pass()) fail(Err::HypothesisViolated, "bounded log increments failed");
  try {
    CheckReport logd = check_log_drift(trace, eps);
    if (!logd.pass()) fail(Err::HypothesisViolated, "log drift hypothesis failed");
  } catch (const Error& e) {
    if (e.code() != Err::NoQualifyingNodes) throw;
    // no log-phase nodes: the hypothesis is vacuous at this horizon
  }

  std::vector<PathData> paths = enumerate_paths(trace);
  for (auto& pd : paths)
    for (int i = 0; i < 3; ++i) fill_pruned_times(pd, i, eps, N);

  double sqrt_eps = std::sqrt(eps);
  auto z_of = [&](const PathData& pd, int i, int t) {
    double hb = pd.nodes[t]->hbar[i], ht = pd.nodes[t]->htld[i];
    if (ht >= eps) return (hb - eps) / I;
    double y = std::log2(std::max(ht, 1e-300) / eps);
    double f = (1.0 - std::exp(mu * y)) / (mu * D);
    return (std::log2(std::max(ht, 1e-300)) - std::log2(eps)) / D + f;
  };
  auto s_of = [&](const PathData& pd, int i, int t) {
    int tlo = pd.tau_lo[i], thi = pd.tau_hi[i];
    double s = 0.0;
    for (int r = 1; r <= std::min(t, tlo); ++r) s += pd.nodes[r - 1]->drift_j[i] / I;
    for (int r = std::min(t, tlo) + 1; r <= std::min(t, thi); ++r)
      if (pd.nodes[r - 1]->htld[i] >= sqrt_eps) s += k4[i] / I;
    for (int r = std::min(t, thi) + 1; r <= t; ++r)
      s += (pd.nodes[r - 1]->drift_d[i] + slack) / D;
    if (t >= thi) s += sqrt_eps * N / I;
    return s;
  };

  // Constructive measurability of t_n, t_n ^ tau_eps, t_n ^ tau^eps w.r.t.
  // the pruned filtration: constant on every information set {y^{t_n}}.
  for (int i = 0; i < 3; ++i) {
    for (int n = 0; n <= N; ++n) {
      std::map<std::pair<int, const TraceNode*>, std::array<int, 3>> seen;
      for (const auto& pd : paths) {
        if (pd.prob <= 0.0) continue;
        int tn = pd.t_n[i][n];
        std::array<int, 3> vals = {tn, std::min(tn, pd.tau_lo[i]), std::min(tn, pd.tau_hi[i])};
        auto key = std::make_pair(tn, pd.nodes[tn]);
        auto [it, inserted] = seen.emplace(key, vals);
        if (!inserted && it->second != vals)
          fail(Err::HypothesisViolated, "pruned times not measurable w.r.t. the sampled filtration");
      }
    }
  }

  // Submartingale: E[L_{n+1} - L_n | y^{t_n}] >= 0 on every information set.
  for (int i = 0; i < 3; ++i) {
    for (int n = 0; n < N; ++n) {
      std::map<const TraceNode*, std::pair<double, double>> groups;  // node -> (mass, sum dL)
      for (const auto& pd : paths) {
        if (pd.prob <= 0.0) continue;
        int tn = pd.t_n[i][n], tn1 = pd.t_n[i][n + 1];
        double l0 = z_of(pd, i, tn) + s_of(pd, i, tn);
        double l1 = z_of(pd, i, tn1) + s_of(pd, i, tn1);
        auto& g = groups[pd.nodes[tn]];
        g.first += pd.prob;
        g.second += pd.prob * (l1 - l0);
      }
      for (const auto& [node, g] : groups) {
        (void)node;
        if (g.first <= 0.0) continue;
        note_violation(rep, g.second / g.first + 1e-9, "process " + std::to_string(i + 1) +
                                                            " step " + std::to_string(n));
      }
    }
  }
  return rep;
}

PrunedScanResult scan_pruned_submartingale(const PosteriorTrace& trace, double eps) {
  double slack = kappa_slack(trace, eps) + trace.dmax * binary_entropy_inv(eps);
  double k2max = 0.0;
  for (int t = 0; t < trace.horizon; ++t)
    for (const TraceNode& node : trace.levels[t]) {
      if (node.prob <= 0.0) continue;
      for (int i = 0; i < 3; ++i) k2max = std::max(k2max, node.drift_d[i] + slack);
    }
  double I = std::max(k2max, 1e-9), D = I;
  PrunedScanResult out;
  for (int k = 3; k <= 14; ++k) {
    double mu = std::ldexp(1.0, -k);
    CheckReport rep = check_pruned_submartingale(trace, eps, I, D, mu);
    if (rep.pass()) {
      out.found = true;
      out.mu = mu;
      out.report = std::move(rep);
      return out;
    }
    out.report = std::move(rep);
    out.mu = mu;
  }
  return out;
}

CheckReport check_doob(const PosteriorTrace& trace, int process, int tau, double c) {
  CheckReport rep;
  rep.name = "doob";
  if (process < 1 || process > 3) fail(Err::BadInput, "process index must be 1..3");
  if (tau < 0 || tau > trace.horizon) fail(Err::BadInput, "tau outside the horizon");
  if (c <= 0.0) fail(Err::BadInput, "c must be positive");
  CheckReport super = check_supermartingale(trace);
  if (!super.pass()) fail(Err::NotSupermartingale, "Htld is not a supermartingale on this trace");
  int i = process - 1;
  std::vector<PathData> paths = enumerate_paths(trace);
  double p_exceed = 0.0, e_tau = 0.0;
  for (const auto& pd : paths) {
    if (pd.prob <= 0.0) continue;
    double sup = 0.0;
    for (int t = tau; t <= trace.horizon; ++t) sup = std::max(sup, pd.nodes[t]->htld[i]);
    if (sup >= c) p_exceed += pd.prob;
    e_tau += pd.prob * pd.nodes[tau]->htld[i];
  }
  note_violation(rep, e_tau / c - p_exceed + 1e-12, "doob bound");
  return rep;
}

double fano_bound(double pe, int m_total) {
  if (pe < 0.0 || pe > 1.0) fail(Err::BadInput, "pe outside [0,1]");
  if (m_total < 2) fail(Err::BadInput, "m_total must be >= 2");
  return binary_entropy(pe) + pe * std::log2(static_cast<double>(m_total));
}

CheckReport check_fano(const PosteriorTrace& trace) {
  CheckReport rep;
  rep.name = "fano";
  double pe = 0.0, eh = 0.0;
  for (const TraceNode& leaf : trace.levels[trace.horizon]) {
    if (leaf.prob <= 0.0) continue;
    pe += leaf.prob * (1.0 - leaf.map_mass);
    eh += leaf.prob * leaf.htld[2];
  }
  double bound = fano_bound(std::min(std::max(pe, 0.0), 1.0), trace.code.m1 * trace.code.m2);
  note_violation(rep, bound - eh + 1e-9, "fano at horizon");
  return rep;
}

bool TraceChecks::all_pass() const {
  return linear.pass() && eta.pass() && logdrift.pass() && pruned.pass() && doob.pass() &&
         fano.pass() && grouping.pass() && supermartingale.pass();
}

TraceChecks run_all_checks(const PosteriorTrace& trace, double eps) {
  TraceChecks out;
  out.linear = check_linear_drift(trace);
  out.eta = check_eta_bound(trace);
  try {
    out.logdrift = check_log_drift(trace, eps);
  } catch (const Error& e) {
    if (e.code() != Err::NoQualifyingNodes) throw;
    out.logdrift.name = "log_drift";
    out.logdrift.notes.push_back("no qualifying nodes (vacuous)");
  }
  PrunedScanResult scan = scan_pruned_submartingale(trace, eps);
  out.pruned = scan.report;
  out.mu = scan.mu;
  out.doob = check_doob(trace, 3, std::min(1, trace.horizon), eps);
  out.fano = check_fano(trace);
  out.grouping = check_grouping_identity(trace);
  out.supermartingale = check_supermartingale(trace);
  return out;
}

}  // namespace macfb
