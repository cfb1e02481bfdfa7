#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "macfb/channel.hpp"
#include "macfb/info.hpp"

namespace macfb {

struct RatePair {
  double r1 = 0.0, r2 = 0.0;
  double r3() const { return r1 + r2; }
};

/// Joint law of the confirmation quadruple Z = (Z1(0), Z2(0), Z1(1), Z2(1)).
struct JointConfirmationDist {
  int x1_size = 0, x2_size = 0;
  std::vector<double> p;  // [z1_0][z2_0][z1_1][z2_1]

  size_t cells() const { return static_cast<size_t>(x1_size) * x2_size * x1_size * x2_size; }
  size_t idx(int a, int b, int c, int d) const {
    return ((static_cast<size_t>(a) * x2_size + b) * x1_size + c) * x2_size + d;
  }
  double at(int a, int b, int c, int d) const { return p[idx(a, b, c, d)]; }
};

void validate_pz(const JointConfirmationDist& pz);
JointConfirmationDist uniform_pz(const ChannelModel& ch);

/// 1 - max{ r1/i1, r2/i2, (r1+r2)/i3 }; the capacity-slack factor of the
/// lower bounds. Zero rates contribute ratio 0; a positive rate against a
/// zero information contributes +inf (so e_o = -inf).
double e_o(const MiTriple& mi, const RatePair& r);

/// E_pz[ D(Q(.|Z1(0),Z2(0)) || Q(.|Z1(a),Z2(b))) ], linear in pz.
double d_bar_pz(const ChannelModel& ch, const JointConfirmationDist& pz, int a, int b);

struct DlbResult {
  double value = 0.0;  // +inf possible
  JointConfirmationDist pz;
};

/// sup_pz min_{ab != 00} Dbar_pz(00 || ab), solved exactly as an LP over the
/// pz simplex; the returned pz attains the value within 1e-8.
DlbResult d_lb(const ChannelModel& ch);

struct BoundsOptions {
  int denom1 = 0;           // data-input grid density per user (0 = default)
  int denom2 = 0;
  double gamma_step = 0.02;
  double lambda_step = 0.05;
  bool refine = true;       // local refinement pass on grid optima
};

/// Shared precomputation for the bound evaluations at one channel.
struct BoundsContext {
  ChannelModel ch;
  BoundsOptions opts;
  InputGrid grid;
  LambdaTable lambda_table;
  DlbResult dlb;
  double dub = 0.0;

  /// sup over the data-input grid (plus refinement) of e_o at rate r.
  double sup_eo(const RatePair& r) const;
};

BoundsContext make_bounds_context(const ChannelModel& ch, const BoundsOptions& opts = {});

struct BoundValue {
  double value = 0.0;  // clamped at >= 0
  double raw = 0.0;    // unclamped diagnostic value
};

BoundValue lower_two_phase(const BoundsContext& ctx, const RatePair& r);
BoundValue upper_two_phase(const BoundsContext& ctx, const RatePair& r);
BoundValue upper_three_phase(const BoundsContext& ctx, const RatePair& r);
BoundValue upper_lambda_mixed(const BoundsContext& ctx, const RatePair& r);

struct ThreePhaseResult {
  double value = 0.0;
  double raw = 0.0;
  int conf_user = 1;       // who confirms during the hybrid phase
  int x_symbol = 0;        // that user's repetition symbol x(0)
  double gamma2 = 0.0;
  double conf_capacity = 0.0;  // C_other(x_symbol), bits
  JointConfirmationDist pz;
};

ThreePhaseResult lower_three_phase(const BoundsContext& ctx, const RatePair& r);

struct GeometricResult {
  double value = 0.0;
  double lambda_form = 0.0;  // min over lambda of d_lb (1 - sum li Ri / C_lambda)
  double theta = 0.0;
  double boundary_radius = 0.0;
  bool outside_region = false;
};

GeometricResult lower_geometric(const BoundsContext& ctx, const RatePair& r);

/// Matched exponent of two independent point-to-point channels
/// (Example-2 closed form), clamped at 0.
double closed_form_parallel(double d1, double c1, double d2, double c2, const RatePair& r);

struct ExponentReport {
  RatePair rate;
  double d_lb = 0.0, d_ub = 0.0;
  double lb_two_phase = 0.0, lb_three_phase = 0.0;
  double ub_two_phase = 0.0, ub_three_phase = 0.0;
  double lb_geometric = 0.0, ub_lambda_mixed = 0.0;
  // raw (unclamped) companions for diagnostics
  double raw_lb_two_phase = 0.0, raw_lb_three_phase = 0.0;
  double raw_ub_two_phase = 0.0, raw_ub_three_phase = 0.0;
  bool outside_region = false;
  ThreePhaseResult three_phase;
};

ExponentReport compute_report(const BoundsContext& ctx, const RatePair& r);

std::string report_to_json(const ExponentReport& rep, bool include_raw = false);
ExponentReport report_from_json(const std::string& text);

std::string pz_to_json(const DlbResult& dlb);

}  // namespace macfb
