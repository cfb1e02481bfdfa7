#include <doctest.h>

#include <cmath>
#include <functional>

#include "macfb/bounds.hpp"
#include "macfb/channel.hpp"
#include "macfb/errors.hpp"
#include "macfb/rng.hpp"

using namespace macfb;

namespace {

const double kD1 = 0.8 * std::log2(9.0);       // BSC(0.1) divergence
const double kD2 = 0.6 * std::log2(4.0);       // BSC(0.2) divergence
const double kC1 = 1.0 - binary_entropy(0.1);  // BSC(0.1) capacity
const double kC2 = 1.0 - binary_entropy(0.2);

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

std::array<std::pair<int, int>, 3> kConfirmationAltsForTest() {
  return {{{0, 1}, {1, 0}, {1, 1}}};
}

JointConfirmationDist point_pz(const ChannelModel& ch, int a, int b, int c, int d) {
  JointConfirmationDist pz;
  pz.x1_size = ch.x1_size;
  pz.x2_size = ch.x2_size;
  pz.p.assign(pz.cells(), 0.0);
  pz.p[pz.idx(a, b, c, d)] = 1.0;
  return pz;
}

}  // namespace

TEST_CASE("e_o evaluation") {
  MiTriple mi{0.663034405834, 0.663034405834, 0.663034405834};
  CHECK(e_o(mi, {0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(e_o(mi, {0.663034405834, 0.0}) == doctest::Approx(0.0));
  CHECK(e_o(mi, {0.2, 0.3}) == doctest::Approx(0.2458913208716087).epsilon(1e-9));
  // positive rate over zero information: -inf
  CHECK(std::isinf(e_o(MiTriple{0.0, 1.0, 1.0}, {0.1, 0.0})));
  CHECK(e_o(MiTriple{0.0, 1.0, 1.0}, {0.1, 0.0}) < 0.0);
  // the second slot pairs R2 with i2 (asymmetric triple pins the slot)
  CHECK(e_o(MiTriple{10.0, 0.5, 10.0}, {0.01, 0.4}) == doctest::Approx(1.0 - 0.8));
}

TEST_CASE("d_bar_pz examples and weighted-sum oracle") {
  ChannelModel add = build_additive_mod_m(3, 0.1);
  JointConfirmationDist self = point_pz(add, 0, 0, 0, 0);
  for (auto [a, b] : kConfirmationAltsForTest())
    CHECK(d_bar_pz(add, self, a, b) == doctest::Approx(0.0));

  JointConfirmationDist tilt = point_pz(add, 0, 0, 1, 0);
  CHECK(d_bar_pz(add, tilt, 1, 0) == doctest::Approx(2.1).epsilon(1e-12));
  CHECK(d_bar_pz(add, tilt, 0, 1) == doctest::Approx(0.0));

  // uniform pz on the parallel channel vs a spelled-out expectation
  ChannelModel prod = build_product(bsc_kernel(0.1), bsc_kernel(0.2));
  JointConfirmationDist uni = uniform_pz(prod);
  double oracle = 0.0;
  for (int z10 = 0; z10 < 2; ++z10)
    for (int z20 = 0; z20 < 2; ++z20)
      for (int z11 = 0; z11 < 2; ++z11)
        for (int z21 = 0; z21 < 2; ++z21) {
          // alternative (1,1) selects (z11, z21)
          double term = kl(prod.row_vec(z10, z20), prod.row_vec(z11, z21));
          oracle += term / 16.0;
        }
  CHECK(d_bar_pz(prod, uni, 1, 1) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(d_bar_pz(prod, uni, 1, 1) <= kD1 + kD2);
}

TEST_CASE("d_lb closed forms") {
  CHECK(d_lb(build_additive_mod_m(3, 0.1)).value == doctest::Approx(2.1).epsilon(1e-8));
  double m4 = (1 - 0.2) * std::log2(0.85 / 0.05);
  CHECK(d_lb(build_additive_mod_m(4, 0.05)).value == doctest::Approx(m4).epsilon(1e-8));

  ChannelModel prod = build_product(bsc_kernel(0.1), bsc_kernel(0.2));
  DlbResult res = d_lb(prod);
  CHECK(res.value == doctest::Approx(std::min(kD1, kD2)).epsilon(1e-8));

  // linearity certificate: the optimum pz attains the value and at least two
  // functionals are tight (or pz is a vertex)
  double f[3];
  int tight = 0;
  for (int i = 0; i < 3; ++i) {
    auto [a, b] = kConfirmationAltsForTest()[i];
    f[i] = d_bar_pz(prod, res.pz, a, b);
    CHECK(f[i] >= res.value - 1e-8);
    if (f[i] <= res.value + 1e-8) tight++;
  }
  bool vertex = false;
  for (double v : res.pz.p) vertex = vertex || v > 1.0 - 1e-9;
  CHECK((tight >= 2 || vertex));
}

TEST_CASE("d_lb dominates sampled and vertex pz (grid cross-check)") {
  ChannelModel prod = build_product(bsc_kernel(0.1), bsc_kernel(0.2));
  double opt = d_lb(prod).value;
  auto alts = kConfirmationAltsForTest();
  double best = 0.0;
  // all vertex pz
  JointConfirmationDist pz = uniform_pz(prod);
  for (size_t cell = 0; cell < pz.cells(); ++cell) {
    std::fill(pz.p.begin(), pz.p.end(), 0.0);
    pz.p[cell] = 1.0;
    double mn = kInf;
    for (auto [a, b] : alts) mn = std::min(mn, d_bar_pz(prod, pz, a, b));
    best = std::max(best, mn);
  }
  // random mixtures
  Rng rng(7);
  for (int s = 0; s < 500; ++s) {
    double sum = 0.0;
    for (auto& v : pz.p) {
      v = -std::log(1.0 - rng.next_unit());
      sum += v;
    }
    for (auto& v : pz.p) v /= sum;
    double mn = kInf;
    for (auto [a, b] : alts) mn = std::min(mn, d_bar_pz(prod, pz, a, b));
    best = std::max(best, mn);
  }
  CHECK(opt >= best - 1e-8);
  CHECK(opt <= best + 0.35);  // sampling gets close on this small instance
}

TEST_CASE("d_lb <= d_ub on assorted channels") {
  Rng rng(11);
  for (int i = 0; i < 10; ++i) {
    ChannelModel ch = random_positive_channel(2 + i % 2, 2 + (i / 2) % 2, 2 + i % 3, rng);
    CHECK(d_lb(ch).value <= d_ub(ch) + 1e-9);
  }
  // deterministic distinct rows: both infinite
  ChannelModel det = build_product({{1.0, 0.0}, {0.0, 1.0}}, {{1.0, 0.0}, {0.0, 1.0}});
  CHECK(std::isinf(d_lb(det).value));
  CHECK(std::isinf(d_ub(det)));
}

TEST_CASE("two-phase bounds on the additive channel") {
  BoundsContext ctx = make_bounds_context(build_additive_mod_m(3, 0.1));
  RatePair r{0.2, 0.2};
  double expect = 2.1 * (1.0 - 0.4 / 0.663034405834);
  CHECK(lower_two_phase(ctx, r).value == doctest::Approx(expect).epsilon(1e-4));
  CHECK(upper_two_phase(ctx, r).value == doctest::Approx(expect).epsilon(1e-4));
  // boundary rate: zero
  double c = 0.663034405834;
  CHECK(lower_two_phase(ctx, {c / 2, c / 2}).value == doctest::Approx(0.0).epsilon(1e-6));
  // rate (0,0): d_ub
  CHECK(upper_two_phase(ctx, {0.0, 0.0}).value == doctest::Approx(2.1).epsilon(1e-9));
}

TEST_CASE("two-phase bounds on parallel BSCs") {
  BoundsContext ctx = make_bounds_context(build_product(bsc_kernel(0.1), bsc_kernel(0.2)));
  RatePair r{0.8 * kC1, 0.2 * kC2};
  CHECK(lower_two_phase(ctx, r).value == doctest::Approx(1.2 * 0.2).epsilon(1e-6));
  // D_ub of the product channel is the max row-pair divergence D1 + D2, and
  // the capacity point maximizes the min slack.
  double expect_ub = (kD1 + kD2) * std::min(1.0 - 0.8, 1.0 - 0.2);
  CHECK(upper_two_phase(ctx, r).value == doctest::Approx(expect_ub).epsilon(1e-6));
}

TEST_CASE("three-phase lower bound") {
  ChannelModel prod = build_product(bsc_kernel(0.1), bsc_kernel(0.2));
  BoundsContext ctx = make_bounds_context(prod);
  RatePair r{0.8 * kC1, 0.2 * kC2};
  ThreePhaseResult res = lower_three_phase(ctx, r);
  double closed = closed_form_parallel(kD1, kC1, kD2, kC2, r);
  CHECK(res.value == doctest::Approx(closed).epsilon(2e-2));
  CHECK(res.conf_user == 2);  // user 1's load is higher, so user 2 confirms early
  CHECK(res.gamma2 == doctest::Approx(0.6).epsilon(0.05));
  // strict two-phase suboptimality
  CHECK(res.value - lower_two_phase(ctx, r).value >= 0.2);

  // gamma2 = 0 slice present: never below the two-phase bound
  for (double f1 : {0.2, 0.5, 0.8})
    for (double f2 : {0.3, 0.6}) {
      RatePair rp{f1 * kC1, f2 * kC2};
      CHECK(lower_three_phase(ctx, rp).value >= lower_two_phase(ctx, rp).value - 1e-9);
    }
}

TEST_CASE("three-phase equals two-phase when one user has a single symbol") {
  // X2 alphabet of size 1: no confirmation bit is expressible for user 2
  ChannelModel thin = validate_channel(2, 1, 2, {0.9, 0.1, 0.2, 0.8});
  BoundsContext ctx = make_bounds_context(thin);
  RatePair r{0.2, 0.0};
  CHECK(d_lb(thin).value == doctest::Approx(0.0));
  CHECK(lower_three_phase(ctx, r).value ==
        doctest::Approx(lower_two_phase(ctx, r).value).epsilon(1e-9));
}

TEST_CASE("upper three-phase specialization") {
  BoundsContext add = make_bounds_context(build_additive_mod_m(3, 0.1));
  RatePair r{0.2, 0.2};
  CHECK(upper_three_phase(add, r).value ==
        doctest::Approx(upper_two_phase(add, r).value).epsilon(1e-6));

  BoundsContext prod = make_bounds_context(build_product(bsc_kernel(0.1), bsc_kernel(0.2)));
  RatePair rp{0.8 * kC1, 0.2 * kC2};
  CHECK(upper_three_phase(prod, rp).value ==
        doctest::Approx(closed_form_parallel(kD1, kC1, kD2, kC2, rp)).epsilon(2e-2));
  CHECK(upper_three_phase(prod, {0.0, 0.0}).value ==
        doctest::Approx(std::min(kD1, kD2)).epsilon(1e-9));
  CHECK(upper_three_phase(prod, {0.0, 0.0}).value <= d_ub(prod.ch) + 1e-12);
}

TEST_CASE("lambda-mixed upper bound") {
  BoundsContext ctx = make_bounds_context(build_additive_mod_m(3, 0.1));
  CHECK(upper_lambda_mixed(ctx, {0.0, 0.0}).value == doctest::Approx(2.1).epsilon(1e-9));
  RatePair r{0.2, 0.2};
  double two_phase = lower_two_phase(ctx, r).value;
  double mixed = upper_lambda_mixed(ctx, r).value;
  CHECK(mixed == doctest::Approx(0.833097419064).epsilon(1e-3));
  CHECK(mixed >= two_phase - 1e-3);
  // boundary along the binding face: zero
  double c = 0.663034405834;
  CHECK(upper_lambda_mixed(ctx, {c / 2, c / 2}).value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("geometric lower bound and lambda-form agreement") {
  BoundsContext ctx = make_bounds_context(build_additive_mod_m(3, 0.1));
  RatePair r{0.2, 0.2};
  GeometricResult geo = lower_geometric(ctx, r);
  CHECK(geo.value == doctest::Approx(0.833097419064).epsilon(1e-3));
  CHECK(geo.value == doctest::Approx(geo.lambda_form).epsilon(1e-9));
  CHECK_FALSE(geo.outside_region);

  // on the boundary ray: zero and flagged outside just beyond
  double c = 0.663034405834;
  GeometricResult edge = lower_geometric(ctx, {c / 2, c / 2});
  CHECK(edge.value == doctest::Approx(0.0).epsilon(1e-6));
  GeometricResult out = lower_geometric(ctx, {c, c});
  CHECK(out.outside_region);
  CHECK(out.value == 0.0);

  // degenerate polar case
  CHECK(lower_geometric(ctx, {0.0, 0.0}).value == doctest::Approx(2.1).epsilon(1e-8));
}

TEST_CASE("closed-form parallel exponent") {
  CHECK(closed_form_parallel(kD1, kC1, kD2, kC2, {kC1, 0.0}) == doctest::Approx(0.0));
  CHECK(closed_form_parallel(2.0, 0.5, 2.0, 0.5, {0.25, 0.25}) == doctest::Approx(1.0));
  CHECK(closed_form_parallel(kD1, kC1, kD2, kC2, {0.8 * kC1, 0.2 * kC2}) ==
        doctest::Approx(0.5071880002307698).epsilon(1e-12));
  CHECK_THROWS_AS(closed_form_parallel(1.0, 0.0, 1.0, 1.0, {0.1, 0.1}), Error);
}

TEST_CASE("sandwich and monotonicity on a corpus") {
  Rng rng(17);
  std::vector<ChannelModel> corpus;
  corpus.push_back(build_additive_mod_m(3, 0.1));
  corpus.push_back(build_product(bsc_kernel(0.1), bsc_kernel(0.2)));
  corpus.push_back(random_positive_channel(2, 2, 2, rng));
  corpus.push_back(random_positive_channel(2, 2, 3, rng));
  for (const ChannelModel& ch : corpus) {
    BoundsContext ctx = make_bounds_context(ch);
    RegionSample edge = region_boundary(ctx.lambda_table, 0.7);
    double prev_l2 = kInf, prev_l3 = kInf, prev_geo = kInf;
    for (int k = 1; k <= 10; ++k) {
      double f = 0.09 * k;  // radii up to 90% of the boundary
      RatePair r{f * edge.r1, f * edge.r2};
      double l2 = lower_two_phase(ctx, r).value;
      double l3 = lower_three_phase(ctx, r).value;
      double u2 = upper_two_phase(ctx, r).value;
      double u3 = upper_three_phase(ctx, r).value;
      double ul = upper_lambda_mixed(ctx, r).value;
      double geo = lower_geometric(ctx, r).value;
      CHECK(l2 <= l3 + 1e-9);
      CHECK(l3 <= std::min({u3, u2, ul}) + 0.02);
      // lower bounds are nonincreasing along the ray
      CHECK(l2 <= prev_l2 + 1e-9);
      CHECK(l3 <= prev_l3 + 1e-9);
      CHECK(geo <= prev_geo + 1e-9);
      prev_l2 = l2;
      prev_l3 = l3;
      prev_geo = geo;
    }
  }
}

TEST_CASE("tightness on additive channels") {
  for (int m : {3, 4}) {
    for (double p : {0.05, 0.1}) {
      BoundsContext ctx = make_bounds_context(build_additive_mod_m(m, p));
      CHECK(ctx.dlb.value == doctest::Approx(ctx.dub).epsilon(1e-6));
      RatePair r{0.15, 0.1};
      CHECK(lower_two_phase(ctx, r).value ==
            doctest::Approx(upper_two_phase(ctx, r).value).epsilon(1e-6));
    }
  }
}

TEST_CASE("exponent report JSON round trip is a fixed point") {
  BoundsContext ctx = make_bounds_context(build_additive_mod_m(3, 0.1));
  ExponentReport rep = compute_report(ctx, {0.2, 0.1});
  std::string once = report_to_json(rep, true);
  ExponentReport parsed = report_from_json(once);
  CHECK(report_to_json(parsed, true) == once);
  CHECK(parsed.lb_two_phase == doctest::Approx(rep.lb_two_phase));
}
