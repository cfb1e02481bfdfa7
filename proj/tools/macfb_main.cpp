// macfb: reliability-function bounds, confirmation-stage analysis, entropy
// drift checks and scheme simulation for two-user MACs with feedback.
//
// Exit codes: 0 pass, 1 check failure, 2 usage error, 3 input error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "macfb/bounds.hpp"
#include "macfb/channel.hpp"
#include "macfb/driftlab.hpp"
#include "macfb/errors.hpp"
#include "macfb/hypotest.hpp"
#include "macfb/info.hpp"
#include "macfb/jsonutil.hpp"
#include "macfb/rng.hpp"
#include "macfb/tree.hpp"
#include "macfb/vlcsim.hpp"
#include "manifest.hpp"

namespace {

using namespace macfb;
using cli::RunManifest;

struct Range {
  double lo = 0.0, hi = 0.0, step = 1.0;
};

Range parse_range(const std::string& spec) {
  Range r;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &r.lo, &r.hi, &r.step) != 3 || r.step <= 0.0)
    fail(Err::BadInput, "expected range a:b:step, got: " + spec);
  return r;
}

// Channel specs that reference files get their digest recorded.
ChannelModel resolve_with_manifest(const std::string& spec, bool renormalize, RunManifest& man) {
  if (spec.find("additive:") != 0 && spec.find("product:") != 0) man.add_input(spec);
  man.params["channel"] = spec;
  return resolve_channel_spec(spec, renormalize);
}

void print_json_result(nlohmann::json j, const RunManifest& man) {
  j["manifest"] = man.to_json(false);
  std::cout << j.dump(2) << "\n";
}

// key,value rows for flat reports; arrays are joined with ';'
void print_csv_result(const nlohmann::json& j) {
  std::cout << "key,value\n";
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_object()) continue;
    if (it.value().is_array()) {
      std::string joined;
      for (const auto& v : it.value()) {
        if (!joined.empty()) joined += ';';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      std::cout << it.key() << "," << joined << "\n";
    } else if (it.value().is_string()) {
      std::cout << it.key() << "," << it.value().get<std::string>() << "\n";
    } else {
      std::cout << it.key() << "," << it.value().dump() << "\n";
    }
  }
}

bool want_csv(const std::string& out, bool csv_default) {
  if (out == "csv") return true;
  if (out == "json") return false;
  return csv_default;
}

// ---------------------------------------------------------------- bounds
int cmd_bounds(const std::string& channel, double r1, double r2, int grid, double gamma_step,
               double lambda_step, bool no_refine, bool raw, bool renormalize,
               const std::string& out) {
  RunManifest man;
  man.subcommand = "bounds";
  ChannelModel ch = resolve_with_manifest(channel, renormalize, man);
  man.params["r1"] = r1;
  man.params["r2"] = r2;
  man.params["grid"] = grid;
  man.params["gamma_step"] = gamma_step;
  man.print_header();
  BoundsOptions opts;
  opts.denom1 = grid;
  opts.denom2 = grid;
  opts.gamma_step = gamma_step;
  opts.lambda_step = lambda_step;
  opts.refine = !no_refine;
  BoundsContext ctx = make_bounds_context(ch, opts);
  ExponentReport rep = compute_report(ctx, RatePair{r1, r2});
  nlohmann::json j = nlohmann::json::parse(report_to_json(rep, raw));
  if (want_csv(out, false)) print_csv_result(j);
  else print_json_result(std::move(j), man);
  return 0;
}

// ------------------------------------------------------------------- dlb
int cmd_dlb(const std::string& channel, bool renormalize, const std::string& out) {
  RunManifest man;
  man.subcommand = "dlb";
  ChannelModel ch = resolve_with_manifest(channel, renormalize, man);
  man.print_header();
  nlohmann::json j = nlohmann::json::parse(pz_to_json(d_lb(ch)));
  if (want_csv(out, false)) print_csv_result(j);
  else print_json_result(std::move(j), man);
  return 0;
}

// ---------------------------------------------------------------- region
int cmd_region(const std::string& channel, const std::string& theta_spec, int grid,
               double lambda_step, bool renormalize, const std::string& out) {
  RunManifest man;
  man.subcommand = "region";
  ChannelModel ch = resolve_with_manifest(channel, renormalize, man);
  man.params["theta"] = theta_spec;
  man.print_header();
  InputGrid g = build_input_grid(ch, grid, grid);
  LambdaTable table = build_lambda_table(g, lambda_step);
  Range r = parse_range(theta_spec);
  if (want_csv(out, true)) {
    std::cout << "theta,radius,r1,r2\n";
    for (double theta = r.lo; theta <= r.hi + 1e-12; theta += r.step) {
      RegionSample s = region_boundary(table, theta);
      std::printf("%.12g,%.12g,%.12g,%.12g\n", round12(s.theta), round12(s.radius), round12(s.r1),
                  round12(s.r2));
    }
  } else {
    auto arr = nlohmann::json::array();
    for (double theta = r.lo; theta <= r.hi + 1e-12; theta += r.step) {
      RegionSample s = region_boundary(table, theta);
      arr.push_back({{"theta", num12(s.theta)},
                     {"radius", num12(s.radius)},
                     {"r1", num12(s.r1)},
                     {"r2", num12(s.r2)}});
    }
    print_json_result(nlohmann::json{{"samples", std::move(arr)}}, man);
  }
  return 0;
}

// --------------------------------------------------------------- confirm
int cmd_confirm(const std::string& channel, const std::string& design_file,
                const std::string& n_sweep, bool use_mc, int64_t trials,
                std::optional<uint64_t> seed, const std::string& lambda_rule, bool renormalize) {
  RunManifest man;
  man.subcommand = "confirm";
  ChannelModel ch = resolve_with_manifest(channel, renormalize, man);
  man.add_input(design_file);
  man.params["n_sweep"] = n_sweep;
  man.params["mode"] = use_mc ? "mc" : "exact";
  man.params["lambda_rule"] = lambda_rule;
  if (use_mc) {
    if (!seed) fail(Err::BadInput, "--seed is mandatory for --mc");
    man.has_seed = true;
    man.seed = *seed;
    man.params["trials"] = trials;
  }
  man.print_header();
  ConfirmationDesign base = load_design_file(design_file);
  double w2 = base.n2 + base.n3 > 0 ? static_cast<double>(base.n2) / (base.n2 + base.n3) : 1.0;

  double lin_c = 0.0, np_level = 0.0;
  enum { Fixed, Linear, Np } rule = Fixed;
  if (lambda_rule.rfind("linear:", 0) == 0) {
    rule = Linear;
    lin_c = std::stod(lambda_rule.substr(7));
  } else if (lambda_rule.rfind("np:", 0) == 0) {
    rule = Np;
    np_level = std::stod(lambda_rule.substr(3));
  } else if (lambda_rule != "fixed") {
    fail(Err::BadInput, "lambda rule must be fixed, linear:<c> or np:<level>");
  }

  Range r = parse_range(n_sweep);
  std::vector<ErrorCurvePoint> curve;
  std::cout << "n,n2,n3,lambda,alpha,beta\n";
  for (double nd = r.lo; nd <= r.hi + 1e-9; nd += r.step) {
    int n = static_cast<int>(std::lround(nd));
    ConfirmationDesign d = base;
    d.n2 = static_cast<int>(std::lround(n * w2));
    d.n3 = n - d.n2;
    switch (rule) {
      case Fixed: break;
      case Linear: d.lambda = lin_c * n; break;
      case Np: d.lambda = np_lambda(ch, d, np_level); break;
    }
    double alpha, beta;
    if (use_mc) {
      McErrors e = monte_carlo_errors(ch, d, trials, *seed);
      alpha = e.alpha;
      beta = e.beta;
    } else {
      ExactErrors e = exact_errors(ch, d);
      alpha = e.alpha;
      beta = e.beta;
    }
    curve.push_back({n, alpha, beta});
    std::printf("%d,%d,%d,%.12g,%.12g,%.12g\n", n, d.n2, d.n3, round12(d.lambda), round12(alpha),
                round12(beta));
  }
  // KL prediction: hybrid designs test x0 vs x1 through the effective
  // channel; pure-pz designs are governed by the min alternative divergence.
  double prediction;
  if (base.n2 > 0) {
    EffectiveChannel eff = effective_channel(ch, base.conf_user, base.p_other);
    prediction = kl(eff.rows.at(base.x0), eff.rows.at(base.x1));
  } else {
    prediction = kInf;
    for (auto [a1, a2] : kConfirmationAlts)
      prediction = std::min(prediction, d_bar_pz(ch, base.pz, a1, a2));
  }
  try {
    std::printf("# slope,%.12g\n", round12(exponent_slope(curve)));
  } catch (const Error&) {
    std::printf("# slope,nan\n");
  }
  std::printf("# kl_prediction,%.12g\n", round12(prediction));
  return 0;
}

// ----------------------------------------------------------------- drift
int cmd_drift(const std::string& channel, int m1, int m2, int horizon, const std::string& codes,
              double eps, bool renormalize) {
  RunManifest man;
  man.subcommand = "drift";
  ChannelModel ch = resolve_with_manifest(channel, renormalize, man);
  man.params["m1"] = m1;
  man.params["m2"] = m2;
  man.params["horizon"] = horizon;
  man.params["codes"] = codes;
  man.params["eps"] = eps;
  man.print_header();

  std::vector<TinyCode> code_list;
  int count = 0;
  unsigned long long seed_ull = 0;
  uint64_t seed = 0;
  if (std::sscanf(codes.c_str(), "random:%d:%llu", &count, &seed_ull) == 2 && count >= 1) {
    seed = seed_ull;
    // generated below, one per index
  } else if (codes.rfind("file:", 0) == 0) {
    std::string path = codes.substr(5);
    man.add_input(path);
    code_list.push_back(load_tiny_code_file(ch, path));
    count = 1;
  } else {
    fail(Err::BadInput, "expected --codes random:K:seed or file:PATH");
  }

  nlohmann::json checks = nlohmann::json::object();
  auto tally = [&](const char* name, const CheckReport& rep) {
    auto& slot = checks[name];
    if (slot.is_null()) slot = {{"checked", 0}, {"violations", 0}, {"worst_margin", nullptr}};
    slot["checked"] = slot["checked"].get<int>() + rep.checked;
    slot["violations"] = slot["violations"].get<int>() + rep.violations;
    double prev = slot["worst_margin"].is_null() ? kInf : parse_num(slot["worst_margin"]);
    slot["worst_margin"] = num12(std::min(prev, rep.worst_margin));
  };
  auto mus = nlohmann::json::array();
  int failures = 0;
  for (int i = 0; i < count; ++i) {
    TinyCode code = code_list.empty() ? random_tiny_code(ch, m1, m2, horizon, mix_seed(seed, i))
                                      : code_list[i];
    PosteriorTrace trace = enumerate_trace(ch, code);
    TraceChecks all = run_all_checks(trace, eps);
    tally("linear_drift", all.linear);
    tally("eta_bound", all.eta);
    tally("log_drift", all.logdrift);
    tally("pruned_submartingale", all.pruned);
    tally("doob", all.doob);
    tally("fano", all.fano);
    tally("grouping_identity", all.grouping);
    tally("supermartingale", all.supermartingale);
    mus.push_back(all.mu);
    if (!all.all_pass()) failures++;
  }
  nlohmann::json j;
  j["traces"] = count;
  j["traces_with_violations"] = failures;
  j["checks"] = std::move(checks);
  j["submartingale_mu"] = std::move(mus);
  print_json_result(std::move(j), man);
  return failures == 0 ? 0 : 1;
}

// -------------------------------------------------------------- simulate
int cmd_simulate(const std::string& channel, const std::string& config_file, int64_t trials,
                 std::optional<uint64_t> seed, bool renormalize, const std::string& out) {
  RunManifest man;
  man.subcommand = "simulate";
  ChannelModel ch = resolve_with_manifest(channel, renormalize, man);
  man.add_input(config_file);
  if (!seed) fail(Err::BadInput, "--seed is mandatory for simulate");
  man.has_seed = true;
  man.seed = *seed;
  man.params["trials"] = trials;
  man.print_header();
  SchemeConfig cfg = load_config_file(config_file);
  SimResult res = run_scheme(ch, cfg, trials, *seed);
  nlohmann::json j = nlohmann::json::parse(result_to_json(res));
  if (want_csv(out, false)) print_csv_result(j);
  else print_json_result(std::move(j), man);
  return 0;
}

// ----------------------------------------------------------------- sweep
int cmd_sweep(const std::string& channel, const std::string& config_file, double step,
              int64_t trials, std::optional<uint64_t> seed, bool renormalize,
              const std::string& out) {
  RunManifest man;
  man.subcommand = "sweep";
  ChannelModel ch = resolve_with_manifest(channel, renormalize, man);
  man.add_input(config_file);
  if (!seed) fail(Err::BadInput, "--seed is mandatory for sweep");
  man.has_seed = true;
  man.seed = *seed;
  man.params["trials"] = trials;
  man.params["gamma_step"] = step;
  man.print_header();
  SchemeConfig cfg = load_config_file(config_file);
  std::vector<SweepRow> rows = sweep_gamma(ch, cfg, step, trials, *seed);
  if (want_csv(out, true)) {
    std::cout << "gamma1,gamma2,gamma3,pe,q,peb,mean_t,exponent\n";
    for (const SweepRow& row : rows) {
      std::printf("%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", round12(row.gamma1),
                  round12(row.gamma2), round12(row.gamma3), round12(row.result.pe),
                  round12(row.result.q), round12(row.result.peb), round12(row.result.mean_t),
                  round12(row.result.exponent));
    }
  } else {
    auto arr = nlohmann::json::array();
    for (const SweepRow& row : rows) {
      nlohmann::json r = nlohmann::json::parse(result_to_json(row.result));
      r["gamma"] = {num12(row.gamma1), num12(row.gamma2), num12(row.gamma3)};
      arr.push_back(std::move(r));
    }
    print_json_result(nlohmann::json{{"rows", std::move(arr)}}, man);
  }
  return 0;
}

// --------------------------------------------------------------- example
struct ExampleRow {
  std::string name;
  double expected, computed, tol;
  bool pass() const {
    if (std::isinf(expected)) return std::isinf(computed);
    return std::fabs(computed - expected) <= tol;
  }
};

int print_example_table(const std::vector<ExampleRow>& rows) {
  int failures = 0;
  std::printf("%-44s %14s %14s %10s  %s\n", "check", "expected", "computed", "tol", "status");
  for (const auto& row : rows) {
    bool ok = row.pass();
    if (!ok) failures++;
    std::printf("%-44s %14.8g %14.8g %10.2g  %s\n", row.name.c_str(), row.expected, row.computed,
                row.tol, ok ? "PASS" : "FAIL");
  }
  std::printf("%d/%zu checks passed\n", static_cast<int>(rows.size()) - failures, rows.size());
  return failures == 0 ? 0 : 1;
}

OutputTree first_one_tree();

int cmd_example(const std::string& name) {
  RunManifest man;
  man.subcommand = "example";
  man.params["name"] = name;
  man.print_header();
  std::vector<ExampleRow> rows;
  if (name == "ternary") {
    ChannelModel ch = build_additive_mod_m(3, 0.1);
    double closed = 0.7 * std::log2(0.8 / 0.1);
    DlbResult lb = d_lb(ch);
    rows.push_back({"d_lb additive(3, 0.1)", closed, lb.value, 1e-6 * closed});
    rows.push_back({"d_ub additive(3, 0.1)", closed, d_ub(ch), 1e-6 * closed});
    BoundsContext ctx = make_bounds_context(ch);
    RatePair r{0.2, 0.2};
    double l2 = lower_two_phase(ctx, r).value;
    double u2 = upper_two_phase(ctx, r).value;
    rows.push_back({"two-phase coincidence at (0.2, 0.2)", l2, u2, 1e-3});
    rows.push_back({"lower_two_phase value", 0.833097419064, l2, 1e-3});
  } else if (name == "mary") {
    for (int m : {3, 4, 5})
      for (double p : {0.05, 0.1, 0.15}) {
        ChannelModel ch = build_additive_mod_m(m, p);
        double closed = (1.0 - m * p) * std::log2((1.0 - (m - 1) * p) / p);
        char label[64];
        std::snprintf(label, sizeof(label), "d_lb = d_ub, additive(%d, %.2f)", m, p);
        rows.push_back({std::string(label) + " [lb]", closed, d_lb(ch).value, 1e-6 * closed});
        rows.push_back({std::string(label) + " [ub]", closed, d_ub(ch), 1e-6 * closed});
      }
  } else if (name == "parallel") {
    ChannelModel ch = build_product(bsc_kernel(0.1), bsc_kernel(0.2));
    double d1 = 0.8 * std::log2(9.0), d2 = 0.6 * std::log2(4.0);
    double c1 = 1.0 - binary_entropy(0.1), c2 = 1.0 - binary_entropy(0.2);
    BoundsContext ctx = make_bounds_context(ch);
    RatePair r{0.8 * c1, 0.2 * c2};
    double closed = closed_form_parallel(d1, c1, d2, c2, r);
    ThreePhaseResult l3 = lower_three_phase(ctx, r);
    double u3 = upper_three_phase(ctx, r).value;
    double l2 = lower_two_phase(ctx, r).value;
    rows.push_back({"lower_three_phase vs closed form", closed, l3.value, 0.02});
    rows.push_back({"upper_three_phase vs closed form", closed, u3, 0.02});
    rows.push_back({"three-phase minus two-phase gap >= 0.2",
                    l3.value - l2 >= 0.2 ? 1.0 : 0.0, 1.0, 0.5});
  } else if (name == "vlentropy") {
    VlEntropy v = vl_entropy(first_one_tree());
    rows.push_back({"H(Y^T)", 1.75, v.h_yt, 1e-12});
    rows.push_back({"H(T)", 1.5, v.h_t, 1e-12});
    rows.push_back({"H(Y^T|T)", 0.25, v.h_yt_given_t, 1e-12});
    Rng rng(20240811);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      OutputTree t = random_output_tree(i % 2 == 0 ? 2 : 3, 5, rng);
      VlEntropy e = vl_entropy(t);
      worst = std::max(worst, std::fabs(e.h_yt - e.h_t - e.h_yt_given_t));
    }
    rows.push_back({"decomposition identity, 500 random trees", 0.0, worst, 1e-12});
  } else {
    fail(Err::BadInput, "unknown example: " + name);
  }
  return print_example_table(rows);
}

// Fair bits, stop at the first 1, horizon 3.
OutputTree first_one_tree() {
  OutputTree tree;
  tree.branching = 2;
  tree.horizon = 3;
  auto leaf = [](double p, bool stop) {
    TreeNode n;
    n.prob = p;
    n.stop = stop;
    return n;
  };
  TreeNode root;
  root.prob = 1.0;
  TreeNode zero;
  zero.prob = 0.5;
  TreeNode zz;
  zz.prob = 0.25;
  zz.children = {leaf(0.125, false), leaf(0.125, false)};  // depth 3 = horizon
  zero.children = {zz, leaf(0.25, true)};                  // "01" stops
  root.children = {zero, leaf(0.5, true)};                 // "1" stops
  tree.root = root;
  return tree;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reliability-function bounds and scheme analysis for two-user MACs with feedback"};
  app.require_subcommand(1);

  bool renormalize = false;
  app.add_flag("--renormalize", renormalize, "renormalize near-stochastic channel rows");
  std::string out_format = "auto";
  app.add_option("--out", out_format, "output format: json or csv (default per command)")
      ->check(CLI::IsMember({"auto", "json", "csv"}));

  std::string channel, design_file, config_file, n_sweep = "50:200:50";
  std::string theta_spec = "0:1.5707963267948966:0.19634954084936207";
  std::string codes = "random:100:1", lambda_rule = "fixed", example_name;
  double r1 = 0.0, r2 = 0.0, gamma_step = 0.02, lambda_step = 0.05, eps = 0.3, sweep_step = 0.1;
  int grid = 0, m1 = 2, m2 = 2, horizon = 4;
  int64_t trials = 100000;
  bool no_refine = false, raw = false, use_mc = false, use_exact = false;
  std::optional<uint64_t> seed;

  auto add_channel = [&](CLI::App* sub) {
    sub->add_option("--channel", channel, "channel file or shorthand (additive:..., product:...)")
        ->required();
  };

  CLI::App* bounds = app.add_subcommand("bounds", "full exponent-bound report at a rate pair");
  add_channel(bounds);
  bounds->add_option("--r1", r1)->required();
  bounds->add_option("--r2", r2)->required();
  bounds->add_option("--grid", grid, "input-grid denominator (0 = default)");
  bounds->add_option("--gamma-step", gamma_step);
  bounds->add_option("--lambda-step", lambda_step);
  bounds->add_flag("--no-refine", no_refine);
  bounds->add_flag("--raw", raw, "include unclamped diagnostic values");

  CLI::App* dlb = app.add_subcommand("dlb", "confirmation divergence D_lb and achieving pz");
  add_channel(dlb);

  CLI::App* region = app.add_subcommand("region", "capacity-region boundary samples (CSV)");
  add_channel(region);
  region->add_option("--theta", theta_spec, "angle sweep a:b:step (radians)");
  region->add_option("--grid", grid);
  region->add_option("--lambda-step", lambda_step);

  CLI::App* confirm = app.add_subcommand("confirm", "confirmation-stage error curve (CSV)");
  add_channel(confirm);
  confirm->add_option("--design", design_file)->required();
  confirm->add_option("--n-sweep", n_sweep, "a:b:step block lengths");
  confirm->add_flag("--mc", use_mc, "Monte Carlo instead of exact convolution");
  confirm->add_flag("--exact", use_exact, "exact convolution (default)");
  confirm->add_option("--trials", trials);
  confirm->add_option("--seed", seed);
  confirm->add_option("--lambda-rule", lambda_rule, "fixed | linear:<c> | np:<level>");

  CLI::App* drift = app.add_subcommand("drift", "entropy-drift checks on tiny codes");
  add_channel(drift);
  drift->add_option("--m1", m1);
  drift->add_option("--m2", m2);
  drift->add_option("--horizon", horizon);
  drift->add_option("--codes", codes, "random:K:seed or file:PATH");
  drift->add_option("--eps", eps);

  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo run of the three-phase scheme");
  add_channel(simulate);
  simulate->add_option("--config", config_file)->required();
  simulate->add_option("--trials", trials);
  simulate->add_option("--seed", seed);

  CLI::App* sweep = app.add_subcommand("sweep", "empirical-exponent surface over the gamma simplex");
  add_channel(sweep);
  sweep->add_option("--config", config_file)->required();
  sweep->add_option("--gamma-step", sweep_step);
  sweep->add_option("--trials", trials);
  sweep->add_option("--seed", seed);

  CLI::App* example =
      app.add_subcommand("example", "reproduction checks: ternary | mary | parallel | vlentropy");
  example->add_option("name", example_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  // --seed is mandatory for stochastic commands; a missing seed is a usage
  // error, not an input error.
  if (((simulate->parsed() || sweep->parsed()) && !seed) ||
      (confirm->parsed() && use_mc && !seed)) {
    std::cerr << "error: --seed is mandatory for stochastic commands\n";
    return 2;
  }

  try {
    if (bounds->parsed())
      return cmd_bounds(channel, r1, r2, grid, gamma_step, lambda_step, no_refine, raw,
                        renormalize, out_format);
    if (dlb->parsed()) return cmd_dlb(channel, renormalize, out_format);
    if (region->parsed())
      return cmd_region(channel, theta_spec, grid, lambda_step, renormalize, out_format);
    if (confirm->parsed())
      return cmd_confirm(channel, design_file, n_sweep, use_mc, trials, seed, lambda_rule,
                         renormalize);
    if (drift->parsed()) {
      if (out_format == "csv") {
        std::cerr << "error: drift reports are JSON only\n";
        return 2;
      }
      return cmd_drift(channel, m1, m2, horizon, codes, eps, renormalize);
    }
    if (simulate->parsed())
      return cmd_simulate(channel, config_file, trials, seed, renormalize, out_format);
    if (sweep->parsed())
      return cmd_sweep(channel, config_file, sweep_step, trials, seed, renormalize, out_format);
    if (example->parsed()) return cmd_example(example_name);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
