#include <benchmark/benchmark.h>

#include "macfb/bounds.hpp"
#include "macfb/channel.hpp"
#include "macfb/driftlab.hpp"
#include "macfb/hypotest.hpp"
#include "macfb/info.hpp"

namespace bm = benchmark;
using namespace macfb;

static void BM_DlbLP(bm::State& st) {
  ChannelModel ch = build_additive_mod_m(static_cast<int>(st.range(0)), 0.05);
  for (auto _ : st) {
    DlbResult res = d_lb(ch);
    bm::DoNotOptimize(res.value);
  }
}
BENCHMARK(BM_DlbLP)->Arg(3)->Arg(4)->Arg(5);

static void BM_InputGridTernary(bm::State& st) {
  ChannelModel ch = build_additive_mod_m(3, 0.1);
  for (auto _ : st) {
    InputGrid grid = build_input_grid(ch);
    bm::DoNotOptimize(grid.triples.size());
  }
}
BENCHMARK(BM_InputGridTernary);

static void BM_LowerThreePhase(bm::State& st) {
  BoundsContext ctx = make_bounds_context(build_product(bsc_kernel(0.1), bsc_kernel(0.2)));
  RatePair r{0.8 * (1 - binary_entropy(0.1)), 0.2 * (1 - binary_entropy(0.2))};
  for (auto _ : st) {
    ThreePhaseResult res = lower_three_phase(ctx, r);
    bm::DoNotOptimize(res.value);
  }
}
BENCHMARK(BM_LowerThreePhase);

static void BM_ExactErrorsConvolution(bm::State& st) {
  ChannelModel ch = build_additive_mod_m(3, 0.1);
  ConfirmationDesign d;
  d.conf_user = 1;
  d.x0 = 0;
  d.x1 = 1;
  d.p_other = {1.0, 0.0, 0.0};
  d.n2 = static_cast<int>(st.range(0));
  d.n3 = 0;
  d.lambda = -0.05 * d.n2;
  d.pz.x1_size = 3;
  d.pz.x2_size = 3;
  d.pz.p.assign(d.pz.cells(), 0.0);
  d.pz.p[d.pz.idx(0, 0, 1, 1)] = 1.0;
  for (auto _ : st) {
    ExactErrors e = exact_errors(ch, d);
    bm::DoNotOptimize(e.beta);
  }
}
BENCHMARK(BM_ExactErrorsConvolution)->Arg(50)->Arg(200);

static void BM_EnumerateTrace(bm::State& st) {
  ChannelModel ch = build_additive_mod_m(3, 0.1);
  TinyCode code = random_tiny_code(ch, 4, 4, static_cast<int>(st.range(0)), 7);
  for (auto _ : st) {
    PosteriorTrace trace = enumerate_trace(ch, code);
    bm::DoNotOptimize(trace.levels.back().size());
  }
}
BENCHMARK(BM_EnumerateTrace)->Arg(4)->Arg(6);

BENCHMARK_MAIN();
