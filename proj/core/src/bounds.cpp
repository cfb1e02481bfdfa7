#include "macfb/bounds.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "macfb/errors.hpp"
#include "macfb/jsonutil.hpp"
#include "macfb/lp.hpp"

namespace macfb {

namespace {

double ratio(double rate, double info) {
  if (rate <= 0.0) return 0.0;
  if (info <= 0.0) return kInf;
  return rate / info;
}

// a * b with the 0 * inf convention used by the clamped bounds: a zero slack
// kills an infinite divergence.
double dmul(double d, double slack) {
  if (slack <= 0.0) return slack == 0.0 ? 0.0 : (std::isinf(d) ? -kInf : d * slack);
  return d * slack;
}

double clamp0(double v) { return std::max(v, 0.0); }

// KL between the quadruple-selected rows for one alternative, per pz cell.
std::vector<double> alt_kl_table(const ChannelModel& ch, int a, int b) {
  JointConfirmationDist shape;
  shape.x1_size = ch.x1_size;
  shape.x2_size = ch.x2_size;
  std::vector<double> k(shape.cells());
  for (int z10 = 0; z10 < ch.x1_size; ++z10)
    for (int z20 = 0; z20 < ch.x2_size; ++z20) {
      ProbVector base = ch.row_vec(z10, z20);
      for (int z11 = 0; z11 < ch.x1_size; ++z11)
        for (int z21 = 0; z21 < ch.x2_size; ++z21)
          k[shape.idx(z10, z20, z11, z21)] =
              kl(base, ch.row_vec(a ? z11 : z10, b ? z21 : z20));
    }
  return k;
}

constexpr std::array<std::pair<int, int>, 3> kAlts{{{0, 1}, {1, 0}, {1, 1}}};

double refine_step(const BoundsOptions& opts, const ChannelModel& ch) {
  int d1 = opts.denom1 > 0 ? opts.denom1 : default_denominator(ch.x1_size);
  int d2 = opts.denom2 > 0 ? opts.denom2 : default_denominator(ch.x2_size);
  return 1.0 / std::min(d1, d2);
}

// max-min of (scale * <K_ab, pz> + offset_ab) over the pz simplex. Returns
// the optimum and the achieving pz. Infinite K cells ride on a big-M
// surrogate that cannot bind unless the true optimum is infinite, which the
// caller screens for beforehand.
std::pair<double, std::vector<double>> maxmin_pz_lp(const std::array<std::vector<double>, 3>& k,
                                                    double scale,
                                                    const std::array<double, 3>& offset) {
  size_t n = k[0].size();
  double finite_max = 0.0;
  for (const auto& tab : k)
    for (double v : tab)
      if (std::isfinite(v)) finite_max = std::max(finite_max, v);
  double big = 1e3 * (1.0 + finite_max);
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  for (int alt = 0; alt < 3; ++alt) {
    std::vector<double> row(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i) {
      double v = std::isfinite(k[alt][i]) ? k[alt][i] : big;
      row[i] = -scale * v;
    }
    row[n] = 1.0;
    A.push_back(std::move(row));
    b.push_back(offset[alt]);
  }
  std::vector<double> ones(n + 1, 1.0);
  ones[n] = 0.0;
  A.push_back(ones);
  b.push_back(1.0);
  std::vector<double> neg(n + 1, -1.0);
  neg[n] = 0.0;
  A.push_back(std::move(neg));
  b.push_back(-1.0);
  std::vector<double> c(n + 1, 0.0);
  c[n] = 1.0;
  lp::Result res = lp::maximize(A, b, c);
  if (res.status != lp::Status::Optimal) fail(Err::BadInput, "pz LP did not solve");
  std::vector<double> pz(res.x.begin(), res.x.begin() + n);
  double mass = 0.0;
  for (double& v : pz) {
    v = std::max(v, 0.0);
    mass += v;
  }
  for (double& v : pz) v /= mass;
  return {res.value, std::move(pz)};
}

// True iff every alternative can be driven to infinite divergence, in which
// case a mixture of the witnesses yields an infinite max-min.
bool all_alternatives_singular(const std::array<std::vector<double>, 3>& k) {
  for (const auto& tab : k) {
    if (std::none_of(tab.begin(), tab.end(), [](double v) { return std::isinf(v); })) return false;
  }
  return true;
}

// pz mixing one singular witness per alternative (used when the max-min is
// unbounded).
std::vector<double> singular_witness_pz(const std::array<std::vector<double>, 3>& k) {
  std::vector<double> pz(k[0].size(), 0.0);
  for (const auto& tab : k) {
    size_t cell =
        std::find_if(tab.begin(), tab.end(), [](double v) { return std::isinf(v); }) - tab.begin();
    pz[cell] += 1.0 / 3.0;
  }
  return pz;
}

}  // namespace

void validate_pz(const JointConfirmationDist& pz) {
  if (pz.p.size() != pz.cells()) fail(Err::BadInput, "pz tensor size mismatch");
  double sum = 0.0;
  for (double v : pz.p) {
    if (v < 0.0) fail(Err::NegativeEntry, "pz has a negative entry");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > kProbTol) fail(Err::NonStochasticRow, "pz mass is not 1");
}

JointConfirmationDist uniform_pz(const ChannelModel& ch) {
  JointConfirmationDist pz;
  pz.x1_size = ch.x1_size;
  pz.x2_size = ch.x2_size;
  pz.p.assign(pz.cells(), 1.0 / pz.cells());
  return pz;
}

double e_o(const MiTriple& mi, const RatePair& r) {
  double worst = std::max({ratio(r.r1, mi.i1), ratio(r.r2, mi.i2), ratio(r.r3(), mi.i3)});
  return 1.0 - worst;
}

double d_bar_pz(const ChannelModel& ch, const JointConfirmationDist& pz, int a, int b) {
  validate_pz(pz);
  if (pz.x1_size != ch.x1_size || pz.x2_size != ch.x2_size)
    fail(Err::AlphabetMismatch, "pz alphabets do not match the channel");
  std::vector<double> k = alt_kl_table(ch, a, b);
  double acc = 0.0;
  for (size_t i = 0; i < k.size(); ++i) {
    if (pz.p[i] == 0.0) continue;
    if (std::isinf(k[i])) return kInf;
    acc += pz.p[i] * k[i];
  }
  return acc;
}

DlbResult d_lb(const ChannelModel& ch) {
  std::array<std::vector<double>, 3> k;
  for (int alt = 0; alt < 3; ++alt) k[alt] = alt_kl_table(ch, kAlts[alt].first, kAlts[alt].second);
  DlbResult out;
  out.pz.x1_size = ch.x1_size;
  out.pz.x2_size = ch.x2_size;
  if (all_alternatives_singular(k)) {
    // Mix one singular witness per alternative; the max-min is unbounded.
    out.value = kInf;
    out.pz.p = singular_witness_pz(k);
    return out;
  }
  auto [value, pz] = maxmin_pz_lp(k, 1.0, {0.0, 0.0, 0.0});
  out.value = value;
  out.pz.p = std::move(pz);
  // Certify: the returned pz must attain the optimum.
  double attained = kInf;
  for (int alt = 0; alt < 3; ++alt)
    attained = std::min(attained, d_bar_pz(ch, out.pz, kAlts[alt].first, kAlts[alt].second));
  if (attained + 1e-8 < out.value)
    fail(Err::NonConvergence, "d_lb certificate failed: pz does not attain the LP value");
  out.value = std::min(out.value, attained + 1e-8);
  return out;
}

double BoundsContext::sup_eo(const RatePair& r) const {
  auto objective = [&](const MiTriple& mi) { return e_o(mi, r); };
  auto [best, idx] = grid_max(grid, objective);
  if (opts.refine && std::isfinite(best)) {
    size_t n2 = grid.p2s.size();
    auto [p1, p2] = refine_product_input(ch, grid.p1s[idx / n2], grid.p2s[idx % n2], objective,
                                         refine_step(opts, ch));
    best = std::max(best, objective(mac_mi_triple(ch, p1, p2)));
  }
  return best;
}

BoundsContext make_bounds_context(const ChannelModel& ch, const BoundsOptions& opts) {
  BoundsContext ctx{ch, opts, build_input_grid(ch, opts.denom1, opts.denom2), {}, d_lb(ch), d_ub(ch)};
  ctx.lambda_table = build_lambda_table(ctx.grid, opts.lambda_step);
  return ctx;
}

BoundValue lower_two_phase(const BoundsContext& ctx, const RatePair& r) {
  double raw = dmul(ctx.dlb.value, ctx.sup_eo(r));
  return {clamp0(raw), raw};
}

BoundValue upper_two_phase(const BoundsContext& ctx, const RatePair& r) {
  auto objective = [&](const MiTriple& mi) {
    return std::min({1.0 - ratio(r.r1, mi.i1), 1.0 - ratio(r.r2, mi.i2), 1.0 - ratio(r.r3(), mi.i3)});
  };
  auto [best, idx] = grid_max(ctx.grid, objective);
  if (ctx.opts.refine && std::isfinite(best)) {
    size_t n2 = ctx.grid.p2s.size();
    auto [p1, p2] = refine_product_input(ctx.ch, ctx.grid.p1s[idx / n2], ctx.grid.p2s[idx % n2],
                                         objective, refine_step(ctx.opts, ctx.ch));
    best = std::max(best, objective(mac_mi_triple(ctx.ch, p1, p2)));
  }
  double raw = dmul(ctx.dub, best);
  return {clamp0(raw), raw};
}

BoundValue upper_three_phase(const BoundsContext& ctx, const RatePair& r) {
  // Deterministic phase-split specialization. Confirmation-window
  // divergences: the same-mixture effective divergence is convex in the
  // other user's input, so the window optimum sits at a point mass (the
  // fixed-other column/row divergences). Data-window informations: the user
  // that keeps transmitting through the hybrid window sees up to the
  // conditional capacity against the confirming symbol, so its rate is
  // measured against the larger of the data-window MI and that capacity
  // (upper envelope over the window split).
  double d1 = fixed_other_divergence(ctx.ch, 1);
  double d2 = fixed_other_divergence(ctx.ch, 2);
  double d3 = ctx.dub;
  double best = -kInf;
  for (int conf_user : {1, 2}) {
    double hybrid_cap = 0.0;
    for (int x = 0; x < ctx.ch.input_size(conf_user); ++x)
      hybrid_cap = std::max(hybrid_cap, conditional_capacity(ctx.ch, conf_user, x).capacity);
    auto objective = [&](const MiTriple& mi) {
      double i1 = conf_user == 2 ? std::max(mi.i1, hybrid_cap) : mi.i1;
      double i2 = conf_user == 1 ? std::max(mi.i2, hybrid_cap) : mi.i2;
      double i3 = std::max(mi.i3, hybrid_cap);
      return std::min({dmul(d1, 1.0 - ratio(r.r1, i1)), dmul(d2, 1.0 - ratio(r.r2, i2)),
                       dmul(d3, 1.0 - ratio(r.r3(), i3))});
    };
    auto [role_best, idx] = grid_max(ctx.grid, objective);
    if (ctx.opts.refine && std::isfinite(role_best)) {
      size_t n2 = ctx.grid.p2s.size();
      auto [p1, p2] = refine_product_input(ctx.ch, ctx.grid.p1s[idx / n2], ctx.grid.p2s[idx % n2],
                                           objective, refine_step(ctx.opts, ctx.ch));
      role_best = std::max(role_best, objective(mac_mi_triple(ctx.ch, p1, p2)));
    }
    best = std::max(best, role_best);
  }
  return {clamp0(best), best};
}

BoundValue upper_lambda_mixed(const BoundsContext& ctx, const RatePair& r) {
  double rates[3] = {r.r1, r.r2, r.r3()};
  double raw = kInf;
  for (size_t i = 0; i < ctx.lambda_table.lambdas.size(); ++i) {
    const auto& l = ctx.lambda_table.lambdas[i];
    double lr = l[0] * rates[0] + l[1] * rates[1] + l[2] * rates[2];
    double term = dmul(ctx.dub, 1.0 - ratio(lr, ctx.lambda_table.c[i]));
    raw = std::min(raw, term);
  }
  double value = std::min(std::max(raw, 0.0), std::isinf(ctx.dub) ? kInf : ctx.dub);
  return {value, raw};
}

namespace {

struct ThreePhaseBranchEval {
  double value = -kInf;
  std::vector<double> pz;
};

// One (conf_user, x_symbol, gamma2) cell: LP over pz of the min over the
// three confirmation alternatives. g is the phase-3 budget E_o(shifted)-g2.
// The caller screens the all-singular case before getting here.
ThreePhaseBranchEval eval_three_phase_cell(const std::array<std::vector<double>, 3>& k,
                                           int conf_user, double g, double gamma2, double dq) {
  ThreePhaseBranchEval out;
  if (g < 0.0) return out;
  // Offsets gamma2 * DQbar apply to the alternatives where the hybrid-phase
  // confirming bit is wrong: a1 = 1 for user 1; a2 = 1 for user 2.
  std::array<double, 3> offset{};
  for (int alt = 0; alt < 3; ++alt) {
    int wrong = conf_user == 1 ? kAlts[alt].first : kAlts[alt].second;
    offset[alt] = wrong ? gamma2 * dq : 0.0;
  }
  if (g == 0.0) {
    out.value = *std::min_element(offset.begin(), offset.end());
    out.pz.assign(k[0].size(), 1.0 / k[0].size());
    return out;
  }
  auto [value, pz] = maxmin_pz_lp(k, g, offset);
  out.value = value;
  out.pz = std::move(pz);
  return out;
}

}  // namespace

ThreePhaseResult lower_three_phase(const BoundsContext& ctx, const RatePair& r) {
  std::array<std::vector<double>, 3> k;
  for (int alt = 0; alt < 3; ++alt)
    k[alt] = alt_kl_table(ctx.ch, kAlts[alt].first, kAlts[alt].second);
  bool singular = all_alternatives_singular(k);

  ThreePhaseResult best;
  best.raw = -kInf;
  auto consider = [&](int user, int x, double gamma2, double c_conf, double dq) {
    RatePair shifted = r;
    if (user == 1)
      shifted.r2 = std::max(r.r2 - gamma2 * c_conf, 0.0);
    else
      shifted.r1 = std::max(r.r1 - gamma2 * c_conf, 0.0);
    double g = ctx.sup_eo(shifted) - gamma2;
    if (singular && g > 0.0) {
      best.raw = kInf;
      best.value = kInf;
      best.conf_user = user;
      best.x_symbol = x;
      best.gamma2 = gamma2;
      best.conf_capacity = c_conf;
      best.pz.x1_size = ctx.ch.x1_size;
      best.pz.x2_size = ctx.ch.x2_size;
      best.pz.p = singular_witness_pz(k);
      return;
    }
    ThreePhaseBranchEval eval = eval_three_phase_cell(k, user, g, gamma2, dq);
    if (eval.value > best.raw) {
      best.raw = eval.value;
      best.value = clamp0(eval.value);
      best.conf_user = user;
      best.x_symbol = x;
      best.gamma2 = gamma2;
      best.conf_capacity = c_conf;
      best.pz.x1_size = ctx.ch.x1_size;
      best.pz.x2_size = ctx.ch.x2_size;
      best.pz.p = std::move(eval.pz);
    }
  };

  for (int user : {1, 2}) {
    int alphabet = ctx.ch.input_size(user);
    int other_size = ctx.ch.input_size(3 - user);
    for (int x = 0; x < alphabet; ++x) {
      double c_conf = conditional_capacity(ctx.ch, user, x).capacity;
      // sup over P_other of DQbar(x, P_other); convex in P_other, so the
      // vertex scan is exact.
      double dq = 0.0;
      for (int z = 0; z < other_size; ++z)
        dq = std::max(dq, d_bar_j(ctx.ch, user, x, point_mass(other_size, z)));
      for (double gamma2 = 0.0; gamma2 < 1.0; gamma2 += ctx.opts.gamma_step)
        consider(user, x, gamma2, c_conf, dq);
    }
  }
  if (std::isinf(best.raw) || !ctx.opts.refine) return best;
  // One local-refinement pass at step/10 around the best gamma2.
  int user = best.conf_user;
  int x = best.x_symbol;
  double c_conf = best.conf_capacity;
  double dq = 0.0;
  for (int z = 0; z < ctx.ch.input_size(3 - user); ++z)
    dq = std::max(dq, d_bar_j(ctx.ch, user, x, point_mass(ctx.ch.input_size(3 - user), z)));
  double fine = ctx.opts.gamma_step / 10.0;
  double center = best.gamma2;
  for (int i = -9; i <= 9; ++i) {
    double gamma2 = center + i * fine;
    if (gamma2 < 0.0 || gamma2 >= 1.0 || i == 0) continue;
    consider(user, x, gamma2, c_conf, dq);
  }
  return best;
}

GeometricResult lower_geometric(const BoundsContext& ctx, const RatePair& r) {
  GeometricResult out;
  double rates[3] = {r.r1, r.r2, r.r3()};
  double lam_raw = kInf;
  for (size_t i = 0; i < ctx.lambda_table.lambdas.size(); ++i) {
    const auto& l = ctx.lambda_table.lambdas[i];
    double lr = l[0] * rates[0] + l[1] * rates[1] + l[2] * rates[2];
    lam_raw = std::min(lam_raw, dmul(ctx.dlb.value, 1.0 - ratio(lr, ctx.lambda_table.c[i])));
  }
  out.lambda_form = clamp0(lam_raw);
  if (r.r1 == 0.0 && r.r2 == 0.0) {
    // Degenerate polar case by convention.
    out.value = std::isinf(ctx.dlb.value) ? kInf : ctx.dlb.value;
    out.theta = 0.0;
    out.boundary_radius = region_boundary(ctx.lambda_table, 0.0).radius;
    return out;
  }
  out.theta = std::atan2(r.r2, r.r1);
  RegionSample sample = region_boundary(ctx.lambda_table, out.theta);
  out.boundary_radius = sample.radius;
  double norm = std::hypot(r.r1, r.r2);
  out.outside_region = norm > sample.radius + 1e-12;
  double slack = sample.radius > 0.0 ? 1.0 - norm / sample.radius : (norm > 0.0 ? -kInf : 1.0);
  out.value = clamp0(dmul(ctx.dlb.value, slack));
  return out;
}

double closed_form_parallel(double d1, double c1, double d2, double c2, const RatePair& r) {
  if (c1 <= 0.0 || c2 <= 0.0) fail(Err::BadInput, "closed_form_parallel needs positive capacities");
  return clamp0(std::min(d1 * (1.0 - r.r1 / c1), d2 * (1.0 - r.r2 / c2)));
}

ExponentReport compute_report(const BoundsContext& ctx, const RatePair& r) {
  ExponentReport rep;
  rep.rate = r;
  rep.d_lb = ctx.dlb.value;
  rep.d_ub = ctx.dub;
  BoundValue l2 = lower_two_phase(ctx, r);
  BoundValue u2 = upper_two_phase(ctx, r);
  BoundValue u3 = upper_three_phase(ctx, r);
  BoundValue ul = upper_lambda_mixed(ctx, r);
  rep.three_phase = lower_three_phase(ctx, r);
  GeometricResult geo = lower_geometric(ctx, r);
  rep.lb_two_phase = l2.value;
  rep.raw_lb_two_phase = l2.raw;
  rep.lb_three_phase = rep.three_phase.value;
  rep.raw_lb_three_phase = rep.three_phase.raw;
  rep.ub_two_phase = u2.value;
  rep.raw_ub_two_phase = u2.raw;
  rep.ub_three_phase = u3.value;
  rep.raw_ub_three_phase = u3.raw;
  rep.ub_lambda_mixed = ul.value;
  rep.lb_geometric = geo.value;
  rep.outside_region = geo.outside_region;
  return rep;
}

std::string report_to_json(const ExponentReport& rep, bool include_raw) {
  nlohmann::json j;
  j["r1"] = num12(rep.rate.r1);
  j["r2"] = num12(rep.rate.r2);
  j["d_lb"] = num12(rep.d_lb);
  j["d_ub"] = num12(rep.d_ub);
  j["lb_two_phase"] = num12(rep.lb_two_phase);
  j["lb_three_phase"] = num12(rep.lb_three_phase);
  j["ub_two_phase"] = num12(rep.ub_two_phase);
  j["ub_three_phase"] = num12(rep.ub_three_phase);
  j["lb_geometric"] = num12(rep.lb_geometric);
  j["ub_lambda_mixed"] = num12(rep.ub_lambda_mixed);
  j["outside_region"] = rep.outside_region;
  nlohmann::json tp;
  tp["conf_user"] = rep.three_phase.conf_user;
  tp["x_symbol"] = rep.three_phase.x_symbol;
  tp["gamma2"] = num12(rep.three_phase.gamma2);
  tp["conf_capacity"] = num12(rep.three_phase.conf_capacity);
  auto arr = nlohmann::json::array();
  for (double v : rep.three_phase.pz.p) arr.push_back(num12(v));
  tp["pz"] = std::move(arr);
  tp["pz_x1_size"] = rep.three_phase.pz.x1_size;
  tp["pz_x2_size"] = rep.three_phase.pz.x2_size;
  j["three_phase"] = std::move(tp);
  if (include_raw) {
    j["raw_lb_two_phase"] = num12(rep.raw_lb_two_phase);
    j["raw_lb_three_phase"] = num12(rep.raw_lb_three_phase);
    j["raw_ub_two_phase"] = num12(rep.raw_ub_two_phase);
    j["raw_ub_three_phase"] = num12(rep.raw_ub_three_phase);
  }
  return j.dump(2);
}

ExponentReport report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExponentReport rep;
  rep.rate.r1 = parse_num(j.at("r1"));
  rep.rate.r2 = parse_num(j.at("r2"));
  rep.d_lb = parse_num(j.at("d_lb"));
  rep.d_ub = parse_num(j.at("d_ub"));
  rep.lb_two_phase = parse_num(j.at("lb_two_phase"));
  rep.lb_three_phase = parse_num(j.at("lb_three_phase"));
  rep.ub_two_phase = parse_num(j.at("ub_two_phase"));
  rep.ub_three_phase = parse_num(j.at("ub_three_phase"));
  rep.lb_geometric = parse_num(j.at("lb_geometric"));
  rep.ub_lambda_mixed = parse_num(j.at("ub_lambda_mixed"));
  rep.outside_region = j.at("outside_region").get<bool>();
  const auto& tp = j.at("three_phase");
  rep.three_phase.conf_user = tp.at("conf_user").get<int>();
  rep.three_phase.x_symbol = tp.at("x_symbol").get<int>();
  rep.three_phase.gamma2 = parse_num(tp.at("gamma2"));
  rep.three_phase.conf_capacity = parse_num(tp.at("conf_capacity"));
  rep.three_phase.pz.x1_size = tp.at("pz_x1_size").get<int>();
  rep.three_phase.pz.x2_size = tp.at("pz_x2_size").get<int>();
  for (const auto& v : tp.at("pz")) rep.three_phase.pz.p.push_back(parse_num(v));
  rep.three_phase.value = rep.lb_three_phase;
  if (j.contains("raw_lb_two_phase")) {
    rep.raw_lb_two_phase = parse_num(j["raw_lb_two_phase"]);
    rep.raw_lb_three_phase = parse_num(j["raw_lb_three_phase"]);
    rep.raw_ub_two_phase = parse_num(j["raw_ub_two_phase"]);
    rep.raw_ub_three_phase = parse_num(j["raw_ub_three_phase"]);
  }
  return rep;
}

std::string pz_to_json(const DlbResult& dlb) {
  nlohmann::json j;
  j["value"] = num12(dlb.value);
  j["x1_size"] = dlb.pz.x1_size;
  j["x2_size"] = dlb.pz.x2_size;
  auto arr = nlohmann::json::array();
  for (double v : dlb.pz.p) arr.push_back(num12(v));
  j["pz"] = std::move(arr);
  return j.dump(2);
}

}  // namespace macfb
