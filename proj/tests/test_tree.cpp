#include <doctest.h>

#include <cmath>
#include <functional>

#include "macfb/errors.hpp"
#include "macfb/rng.hpp"
#include "macfb/tree.hpp"

using namespace macfb;

namespace {

TreeNode leaf(double p, bool stop = false) {
  TreeNode n;
  n.prob = p;
  n.stop = stop;
  return n;
}

// Fair bits, stop at the first 1, horizon 3.
OutputTree first_one_tree() {
  OutputTree tree;
  tree.branching = 2;
  tree.horizon = 3;
  TreeNode zz;
  zz.prob = 0.25;
  zz.children = {leaf(0.125), leaf(0.125)};
  TreeNode zero;
  zero.prob = 0.5;
  zero.children = {zz, leaf(0.25, true)};
  tree.root.prob = 1.0;
  tree.root.children = {zero, leaf(0.5, true)};
  return tree;
}

}  // namespace

TEST_CASE("variable-length entropy on the first-one tree") {
  VlEntropy v = vl_entropy(first_one_tree());
  CHECK(v.h_yt == doctest::Approx(1.75).epsilon(1e-14));
  CHECK(v.h_t == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(v.h_yt_given_t == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("degenerate stopping times") {
  // deterministic T = N with deterministic outputs: everything is zero
  OutputTree det;
  det.branching = 2;
  det.horizon = 2;
  TreeNode mid;
  mid.prob = 1.0;
  mid.children = {leaf(1.0), leaf(0.0)};
  det.root.prob = 1.0;
  det.root.children = {mid, leaf(0.0)};
  VlEntropy v = vl_entropy(det);
  CHECK(v.h_yt == 0.0);
  CHECK(v.h_t == 0.0);
  CHECK(v.h_yt_given_t == 0.0);

  // T = 1 with a fair first bit
  OutputTree one;
  one.branching = 2;
  one.horizon = 3;
  one.root.prob = 1.0;
  one.root.children = {leaf(0.5, true), leaf(0.5, true)};
  VlEntropy w = vl_entropy(one);
  CHECK(w.h_yt == doctest::Approx(1.0));
  CHECK(w.h_t == 0.0);
}

TEST_CASE("decomposition identity on random trees") {
  Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    OutputTree t = random_output_tree(i % 2 == 0 ? 2 : 3, 5, rng);
    VlEntropy v = vl_entropy(t);
    worst = std::max(worst, std::fabs(v.h_yt - v.h_t - v.h_yt_given_t));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("stopping-time validation") {
  OutputTree bad = first_one_tree();
  bad.root.children[1].stop = false;  // live leaf below the horizon
  try {
    vl_entropy(bad);
    FAIL("expected InvalidStoppingTime");
  } catch (const Error& e) {
    CHECK(e.code() == Err::InvalidStoppingTime);
  }

  OutputTree mass = first_one_tree();
  mass.root.children[0].prob = 0.4;  // children no longer resolve the parent
  CHECK_THROWS_AS(vl_entropy(mass), Error);

  OutputTree stopped = first_one_tree();
  stopped.root.children[0].stop = true;  // stopped node with children
  CHECK_THROWS_AS(vl_entropy(stopped), Error);
}

namespace {

// joint[x][z][y] helper for labeled nodes
std::vector<double> joint_xy(const std::vector<double>& px, const std::vector<ProbVector>& w) {
  // P(x, z=0, y) = px[x] w[x][y]
  std::vector<double> out;
  for (size_t x = 0; x < px.size(); ++x)
    for (double wy : w[x]) out.push_back(px[x] * wy);
  return out;
}

double cmi_oracle(const std::vector<double>& joint, int nx, int nz, int ny) {
  // I(X;Y|Z) computed with a different decomposition: H(X|Z)+H(Y|Z)-H(XY|Z)
  auto H = [](const std::vector<double>& p) {
    double h = 0;
    for (double v : p)
      if (v > 0) h -= v * std::log2(v);
    return h;
  };
  std::vector<double> pz(nz, 0.0), pxz(nx * nz, 0.0), pyz(ny * nz, 0.0);
  for (int x = 0; x < nx; ++x)
    for (int z = 0; z < nz; ++z)
      for (int y = 0; y < ny; ++y) {
        double v = joint[(static_cast<size_t>(x) * nz + z) * ny + y];
        pz[z] += v;
        pxz[x * nz + z] += v;
        pyz[y * nz + z] += v;
      }
  return H(pxz) + H(pyz) - H(joint) - H(pz);
}

}  // namespace

TEST_CASE("directed information: independence, chain rule, weighted tree") {
  // X independent of Y at every node -> 0
  OutputTree ind;
  ind.branching = 2;
  ind.horizon = 2;
  auto labeled = [&](TreeNode n, const std::vector<double>& joint, int nx) {
    n.nx = nx;
    n.nz = 1;
    n.joint = joint;
    return n;
  };
  TreeNode l0 = leaf(0.5), l1 = leaf(0.5);
  TreeNode root;
  root.prob = 1.0;
  std::vector<double> indep = {0.35, 0.35, 0.15, 0.15};  // P(x)P(y), y-marginal (.5,.5)
  TreeNode mid0 = labeled(leaf(0.5), indep, 2);
  mid0.children = {leaf(0.25), leaf(0.25)};
  TreeNode mid1 = labeled(leaf(0.5), indep, 2);
  mid1.children = {leaf(0.25), leaf(0.25)};
  root = labeled(root, indep, 2);
  root.children = {mid0, mid1};
  ind.root = root;
  CHECK(vl_directed_information(ind) == doctest::Approx(0.0));

  // fixed T = N, memoryless X -> Y: N * I(X;Y)
  std::vector<ProbVector> w = {{0.9, 0.1}, {0.2, 0.8}};
  std::vector<double> px = {0.4, 0.6};
  std::vector<double> joint = joint_xy(px, w);
  double single = cmi_oracle(joint, 2, 1, 2);
  ProbVector ymarg = {0.4 * 0.9 + 0.6 * 0.2, 0.4 * 0.1 + 0.6 * 0.8};
  int N = 3;
  std::function<TreeNode(int, double)> build = [&](int depth, double p) {
    TreeNode n;
    n.prob = p;
    if (depth == N) return n;
    n.nx = 2;
    n.nz = 1;
    n.joint = joint;
    for (int y = 0; y < 2; ++y) n.children.push_back(build(depth + 1, p * ymarg[y]));
    return n;
  };
  OutputTree chain;
  chain.branching = 2;
  chain.horizon = N;
  chain.root = build(0, 1.0);
  CHECK(vl_directed_information(chain) == doctest::Approx(N * single).epsilon(1e-12));

  // three-node weighted example: I1 + a I2 + b I3
  std::vector<double> j1 = {0.4, 0.1, 0.1, 0.4};          // nx=2, nz=1, strongly informative
  std::vector<double> j2 = {0.3, 0.2, 0.2, 0.3};          // weaker
  std::vector<double> j3 = {0.25, 0.25, 0.25, 0.25};      // independent
  double a = 0.5, b = 0.25;                               // P(Y1=0), P(Y^2=00)
  OutputTree wt;
  wt.branching = 2;
  wt.horizon = 3;
  TreeNode n3 = labeled(leaf(b), j3, 2);
  n3.children = {leaf(b * 0.5), leaf(b * 0.5)};
  TreeNode n2 = labeled(leaf(a), j2, 2);
  n2.children = {n3, leaf(a * 0.5, true)};
  TreeNode top = labeled(leaf(1.0), j1, 2);
  top.children = {n2, leaf(0.5, true)};
  wt.root = top;
  double expect = cmi_oracle(j1, 2, 1, 2) + a * cmi_oracle(j2, 2, 1, 2) + b * cmi_oracle(j3, 2, 1, 2);
  CHECK(vl_directed_information(wt) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("directed information label validation") {
  OutputTree t;
  t.branching = 2;
  t.horizon = 1;
  t.root.prob = 1.0;
  t.root.children = {leaf(0.5), leaf(0.5)};
  // no labels on a live node
  CHECK_THROWS_AS(vl_directed_information(t), Error);
  // labels whose y-marginal disagrees with the branch probabilities
  t.root.nx = 2;
  t.root.nz = 1;
  t.root.joint = {0.6, 0.1, 0.2, 0.1};  // y-marginal (0.8, 0.2) != (0.5, 0.5)
  try {
    vl_directed_information(t);
    FAIL("expected InconsistentLabels");
  } catch (const Error& e) {
    CHECK(e.code() == Err::InconsistentLabels);
  }
}

TEST_CASE("tree JSON round trip") {
  OutputTree t = first_one_tree();
  std::string json = R"({
    "branching": 2, "horizon": 3,
    "root": {"p": 1.0, "children": [
      {"p": 0.5, "children": [
        {"p": 0.25, "children": [{"p": 0.125}, {"p": 0.125}]},
        {"p": 0.25, "stop": true}]},
      {"p": 0.5, "stop": true}]}
  })";
  OutputTree parsed = tree_from_json(json);
  VlEntropy a = vl_entropy(t), b = vl_entropy(parsed);
  CHECK(a.h_yt == doctest::Approx(b.h_yt));
  CHECK(a.h_t == doctest::Approx(b.h_t));
}
