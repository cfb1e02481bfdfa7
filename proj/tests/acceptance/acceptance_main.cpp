// Acceptance suite: runs every release criterion at its pinned tolerance and
// prints one PASS/FAIL line each. Exit code 0 iff all criteria pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "macfb/bounds.hpp"
#include "macfb/channel.hpp"
#include "macfb/driftlab.hpp"
#include "macfb/hypotest.hpp"
#include "macfb/info.hpp"
#include "macfb/rng.hpp"
#include "macfb/tree.hpp"
#include "macfb/vlcsim.hpp"

using namespace macfb;

namespace {

struct Criterion {
  int id;
  std::string label;
  bool pass;
  std::string detail;
  double seconds;
};

std::vector<Criterion> g_results;

void run(int id, const std::string& label, double budget_s,
         const std::function<std::pair<bool, std::string>()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    auto [ok, info] = body();
    pass = ok;
    detail = info;
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    pass = false;
    detail += " [over runtime budget]";
  }
  g_results.push_back({id, label, pass, detail, secs});
  std::printf("[%2d] %-52s %s  (%s) [%.1fs]\n", id, label.c_str(), pass ? "PASS" : "FAIL",
              detail.c_str(), secs);
  std::fflush(stdout);
}

ChannelModel random_positive_channel(int x1, int x2, int y, Rng& rng) {
  std::vector<double> q(static_cast<size_t>(x1) * x2 * y);
  for (int a = 0; a < x1; ++a)
    for (int b = 0; b < x2; ++b) {
      double sum = 0.0;
      std::vector<double> row(y);
      for (auto& v : row) {
        v = 0.02 + rng.next_unit();
        sum += v;
      }
      for (int c = 0; c < y; ++c) q[(static_cast<size_t>(a) * x2 + b) * y + c] = row[c] / sum;
    }
  return validate_channel(x1, x2, y, std::move(q));
}

ConfirmationDesign ternary_repetition(int n2, double lambda) {
  ConfirmationDesign d;
  d.conf_user = 1;
  d.x0 = 0;
  d.x1 = 1;
  d.p_other = {1.0, 0.0, 0.0};
  d.n2 = n2;
  d.n3 = 0;
  d.lambda = lambda;
  d.pz.x1_size = 3;
  d.pz.x2_size = 3;
  d.pz.p.assign(d.pz.cells(), 0.0);
  d.pz.p[d.pz.idx(0, 0, 1, 1)] = 1.0;
  return d;
}

SchemeConfig ternary_scheme() {
  SchemeConfig cfg;
  cfg.n = 18;
  cfg.gamma[0] = 0.6;
  cfg.gamma[1] = 0.2;
  cfg.gamma[2] = 0.2;
  cfg.m1 = 8;
  cfg.m2 = 8;
  cfg.design = ternary_repetition(0, 0.0);
  return cfg;
}

char buf[512];

// ---------------------------------------------------------------------------

std::pair<bool, std::string> additive_tightness() {
  double worst = 0.0;
  for (int m : {3, 4, 5})
    for (double p : {0.05, 0.1, 0.15}) {
      ChannelModel ch = build_additive_mod_m(m, p);
      double closed = (1.0 - m * p) * std::log2((1.0 - (m - 1) * p) / p);
      double lb = d_lb(ch).value, ub = d_ub(ch);
      worst = std::max(worst, std::fabs(lb - closed) / closed);
      worst = std::max(worst, std::fabs(ub - closed) / closed);
    }
  std::snprintf(buf, sizeof(buf), "max rel err %.2e vs 1e-6", worst);
  return {worst <= 1e-6, buf};
}

std::pair<bool, std::string> two_phase_coincidence() {
  BoundsContext ctx = make_bounds_context(build_additive_mod_m(3, 0.1));
  RatePair r{0.2, 0.2};
  double lb = lower_two_phase(ctx, r).value;
  double ub = upper_two_phase(ctx, r).value;
  double target = 2.1 * (1.0 - 0.4 / (std::log2(3.0) - entropy({0.8, 0.1, 0.1})));
  double err = std::max(std::fabs(lb - target), std::fabs(ub - target));
  std::snprintf(buf, sizeof(buf), "lb %.6f ub %.6f target %.6f err %.2e vs 1e-3", lb, ub, target,
                err);
  return {err <= 1e-3 && std::fabs(lb - ub) <= 1e-3, buf};
}

std::pair<bool, std::string> parallel_matching() {
  ChannelModel ch = build_product(bsc_kernel(0.1), bsc_kernel(0.2));
  double d1 = 0.8 * std::log2(9.0), d2 = 0.6 * std::log2(4.0);
  double c1 = 1 - binary_entropy(0.1), c2 = 1 - binary_entropy(0.2);
  BoundsContext ctx = make_bounds_context(ch);
  double worst = 0.0;
  for (int i = 1; i <= 5; ++i)
    for (int j = 1; j <= 5; ++j) {
      RatePair r{(i / 6.0) * c1, (j / 6.0) * c2};
      double closed = closed_form_parallel(d1, c1, d2, c2, r);
      worst = std::max(worst, std::fabs(lower_three_phase(ctx, r).value - closed));
      worst = std::max(worst, std::fabs(upper_three_phase(ctx, r).value - closed));
    }
  RatePair star{0.8 * c1, 0.2 * c2};
  double gap = lower_three_phase(ctx, star).value - lower_two_phase(ctx, star).value;
  std::snprintf(buf, sizeof(buf), "max |bound-closed| %.4f vs 0.02; 3p-2p gap %.3f vs 0.2", worst,
                gap);
  return {worst <= 0.02 && gap >= 0.2, buf};
}

std::pair<bool, std::string> vl_entropy_checks() {
  OutputTree tree;
  tree.branching = 2;
  tree.horizon = 3;
  auto leaf = [](double p, bool stop) {
    TreeNode n;
    n.prob = p;
    n.stop = stop;
    return n;
  };
  TreeNode zz;
  zz.prob = 0.25;
  zz.children = {leaf(0.125, false), leaf(0.125, false)};
  TreeNode zero;
  zero.prob = 0.5;
  zero.children = {zz, leaf(0.25, true)};
  tree.root.prob = 1.0;
  tree.root.children = {zero, leaf(0.5, true)};
  VlEntropy v = vl_entropy(tree);
  bool exact = v.h_yt == 1.75 && v.h_t == 1.5 && v.h_yt_given_t == 0.25;
  Rng rng(20260810);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    OutputTree t = random_output_tree(i % 2 == 0 ? 2 : 3, 5, rng);
    VlEntropy e = vl_entropy(t);
    worst = std::max(worst, std::fabs(e.h_yt - e.h_t - e.h_yt_given_t));
  }
  std::snprintf(buf, sizeof(buf), "triple (%.2f, %.2f, %.2f); identity worst %.1e vs 1e-12",
                v.h_yt, v.h_t, v.h_yt_given_t, worst);
  return {exact && worst <= 1e-12, buf};
}

std::pair<bool, std::string> geometric_equivalence() {
  Rng rng(40);
  std::vector<ChannelModel> corpus;
  corpus.push_back(build_additive_mod_m(3, 0.1));
  corpus.push_back(build_additive_mod_m(4, 0.05));
  corpus.push_back(build_product(bsc_kernel(0.1), bsc_kernel(0.2)));
  corpus.push_back(random_positive_channel(2, 2, 2, rng));
  corpus.push_back(random_positive_channel(2, 2, 3, rng));
  int pairs = 0;
  double worst_agree = 0.0, worst_additive = 0.0;
  for (size_t c = 0; c < corpus.size(); ++c) {
    BoundsContext ctx = make_bounds_context(corpus[c]);
    for (double theta : {0.35, 0.9}) {
      RegionSample edge = region_boundary(ctx.lambda_table, theta);
      for (double f : {0.3, 0.7}) {
        RatePair r{f * edge.r1, f * edge.r2};
        GeometricResult geo = lower_geometric(ctx, r);
        worst_agree = std::max(worst_agree, std::fabs(geo.value - geo.lambda_form));
        if (c <= 1)
          worst_additive =
              std::max(worst_additive, std::fabs(geo.value - lower_two_phase(ctx, r).value));
        pairs++;
      }
    }
  }
  std::snprintf(buf, sizeof(buf),
                "%d pairs; polar-vs-lambda %.1e vs 1e-9; additive match %.1e vs 1e-3", pairs,
                worst_agree, worst_additive);
  return {pairs == 20 && worst_agree <= 1e-9 && worst_additive <= 1e-3, buf};
}

std::pair<bool, std::string> stein_slope() {
  ChannelModel ch = build_additive_mod_m(3, 0.1);
  // Neyman-Pearson schedule holding alpha <= 0.1 (see the project notes on
  // the lambda schedule); exact betas by lattice convolution.
  std::vector<ErrorCurvePoint> curve;
  double alpha200 = 0.0;
  for (int n : {50, 100, 150, 200}) {
    ConfirmationDesign d = ternary_repetition(n, 0.0);
    d.lambda = np_lambda(ch, d, 0.1);
    ExactErrors e = exact_errors(ch, d);
    curve.push_back({n, e.alpha, e.beta});
    if (n == 200) alpha200 = e.alpha;
  }
  double slope = exponent_slope(curve);
  EffectiveChannel eff = effective_channel(ch, 1, {1.0, 0.0, 0.0});
  double klpred = kl(eff.rows[0], eff.rows[1]);
  bool slope_ok = std::fabs(slope - klpred) <= 0.05 * klpred;
  std::snprintf(buf, sizeof(buf), "slope %.4f vs 2.1 (5%% gate [%.4f, %.4f]); alpha(200) %.3f",
                slope, 0.95 * klpred, 1.05 * klpred, alpha200);
  return {slope_ok && alpha200 <= 0.1, buf};
}

std::pair<bool, std::string> drift_corpus() {
  Rng rng(4242);
  int traces = 0, violations = 0, log_exercised = 0;
  for (int i = 0; i < 100; ++i) {
    int x1 = 2 + (i % 2), x2 = 2 + ((i / 2) % 2), y = 2 + (i % 3 == 0 ? 1 : 0);
    ChannelModel ch = random_positive_channel(x1, x2, y, rng);
    int m1 = (i % 4 < 2) ? 2 : 4, m2 = (i % 8 < 4) ? 2 : 4;
    int horizon = 3 + (i % 4);
    TinyCode code = random_tiny_code(ch, m1, m2, horizon, mix_seed(999, i));
    PosteriorTrace trace = enumerate_trace(ch, code);
    TraceChecks all = run_all_checks(trace, 0.3);
    traces++;
    if (!all.all_pass()) violations++;
    if (all.logdrift.checked > 0) log_exercised++;
  }
  std::snprintf(buf, sizeof(buf), "%d traces, %d with violations, log-drift exercised on %d",
                traces, violations, log_exercised);
  return {traces == 100 && violations == 0 && log_exercised > 0, buf};
}

std::pair<bool, std::string> renewal_identity() {
  ChannelModel ch = build_additive_mod_m(3, 0.1);
  SimResult res = run_scheme(ch, ternary_scheme(), 100000, 20260810);
  bool renewal = std::fabs(res.renewal_residual) <= res.renewal_tol;
  bool blocks = std::fabs(res.blocks_identity_residual) <= std::max(res.blocks_identity_tol, 1e-12);
  std::snprintf(buf, sizeof(buf), "pe %.4f; renewal |%.1e| <= %.1e; blocks |%.1e| <= %.1e",
                res.pe, res.renewal_residual, res.renewal_tol, res.blocks_identity_residual,
                res.blocks_identity_tol);
  return {renewal && blocks, buf};
}

std::pair<bool, std::string> sandwich_property() {
  Rng rng(606);
  std::vector<ChannelModel> corpus;
  corpus.push_back(build_additive_mod_m(3, 0.1));
  corpus.push_back(build_additive_mod_m(4, 0.05));
  corpus.push_back(build_product(bsc_kernel(0.1), bsc_kernel(0.2)));
  corpus.push_back(random_positive_channel(2, 2, 2, rng));
  corpus.push_back(random_positive_channel(2, 2, 3, rng));
  double worst_low = kInf, worst_up = kInf;
  int tested = 0;
  for (const ChannelModel& ch : corpus) {
    BoundsContext ctx = make_bounds_context(ch);
    for (double theta : {0.3, 0.8, 1.2}) {
      RegionSample edge = region_boundary(ctx.lambda_table, theta);
      for (double f : {0.25, 0.55, 0.85}) {
        RatePair r{f * edge.r1, f * edge.r2};
        double l2 = lower_two_phase(ctx, r).value;
        double l3 = lower_three_phase(ctx, r).value;
        double up = std::min({upper_three_phase(ctx, r).value, upper_two_phase(ctx, r).value,
                              upper_lambda_mixed(ctx, r).value});
        worst_low = std::min(worst_low, l3 - l2);
        worst_up = std::min(worst_up, up + 0.02 - l3);
        tested++;
      }
    }
  }
  std::snprintf(buf, sizeof(buf), "%d rate pairs; min(l3-l2) %.1e; min(ub+tol-l3) %.1e", tested,
                worst_low, worst_up);
  return {worst_low >= -1e-9 && worst_up >= 0.0, buf};
}

std::pair<bool, std::string> determinism() {
  ChannelModel ch = build_additive_mod_m(3, 0.1);
  ConfirmationDesign d = ternary_repetition(8, 0.0);
  d.n3 = 2;
  auto run_all = [&]() {
    std::string blob = result_to_json(run_scheme(ch, ternary_scheme(), 20000, 31337));
    McErrors mc = monte_carlo_errors(ch, d, 50000, 999);
    blob += std::to_string(mc.alpha) + "/" + std::to_string(mc.beta);
    for (int a = 0; a < 3; ++a) blob += "," + std::to_string(mc.beta_by_alt[a]);
    return blob;
  };
  setenv("MACFB_THREADS", "1", 1);
  std::string one = run_all();
  setenv("MACFB_THREADS", "8", 1);
  std::string eight = run_all();
  unsetenv("MACFB_THREADS");
  bool same = one == eight;
  std::snprintf(buf, sizeof(buf), "serialized outputs %s across MACFB_THREADS 1 vs 8",
                same ? "bit-identical" : "DIFFER");
  return {same, buf};
}

}  // namespace

int main() {
  std::printf("acceptance criteria\n");
  run(1, "additive-MAC tightness (m, p grid)", 5.0, additive_tightness);
  run(2, "two-phase coincidence on additive ternary", 30.0, two_phase_coincidence);
  run(3, "parallel-channel matching (5x5 grid + gap)", 120.0, parallel_matching);
  run(4, "variable-length entropy (exact + 500 trees)", 5.0, vl_entropy_checks);
  run(5, "geometric-form equivalence (20 pairs)", 120.0, geometric_equivalence);
  run(6, "confirmation exponent, Stein regime", 30.0, stein_slope);
  run(7, "drift-lab corpus (100 traces)", 180.0, drift_corpus);
  run(8, "renewal identity (1e5 trials)", 120.0, renewal_identity);
  run(9, "sandwich property on the corpus", 300.0, sandwich_property);
  run(10, "determinism across worker counts", 120.0, determinism);

  int passed = 0;
  for (const auto& c : g_results) passed += c.pass;
  std::printf("ACCEPTANCE: %d/%zu criteria passed\n", passed, g_results.size());
  return passed == static_cast<int>(g_results.size()) ? 0 : 1;
}
