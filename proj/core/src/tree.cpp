#include "macfb/tree.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "macfb/errors.hpp"
#include "macfb/rng.hpp"

namespace macfb {

namespace {

constexpr double kTreeTol = 1e-9;

void validate_node(const TreeNode& node, int depth, const OutputTree& tree) {
  if (node.prob < -kTreeTol) fail(Err::InvalidStoppingTime, "negative node probability");
  bool leaf = node.children.empty();
  if (node.stop && !leaf)
    fail(Err::InvalidStoppingTime, "stopped node has children");
  if (!node.stop && leaf && depth < tree.horizon && node.prob > kTreeTol)
    fail(Err::InvalidStoppingTime, "live node below the horizon does not branch");
  if (!leaf) {
    if (depth >= tree.horizon) fail(Err::InvalidStoppingTime, "node beyond the horizon");
    if (static_cast<int>(node.children.size()) != tree.branching)
      fail(Err::InvalidStoppingTime, "node does not have `branching` children");
    double mass = 0.0;
    for (const auto& c : node.children) mass += c.prob;
    if (std::fabs(mass - node.prob) > kTreeTol)
      fail(Err::InvalidStoppingTime, "children probabilities do not resolve the parent");
    for (const auto& c : node.children) validate_node(c, depth + 1, tree);
  }
}

void collect_leaves(const TreeNode& node, int depth, std::vector<std::pair<int, double>>& leaves) {
  if (node.children.empty()) {
    if (node.prob > 0.0) leaves.emplace_back(depth, node.prob);
    return;
  }
  for (const auto& c : node.children) collect_leaves(c, depth + 1, leaves);
}

}  // namespace

void validate_tree(const OutputTree& tree) {
  if (tree.branching < 1 || tree.horizon < 1) fail(Err::BadInput, "tree needs branching, horizon >= 1");
  if (std::fabs(tree.root.prob - 1.0) > kTreeTol)
    fail(Err::InvalidStoppingTime, "root probability must be 1");
  validate_node(tree.root, 0, tree);
}

VlEntropy vl_entropy(const OutputTree& tree) {
  validate_tree(tree);
  std::vector<std::pair<int, double>> leaves;
  collect_leaves(tree.root, 0, leaves);
  VlEntropy out;
  std::map<int, double> length_mass;
  for (auto [depth, p] : leaves) {
    out.h_yt -= p * std::log2(p);
    length_mass[depth] += p;
  }
  for (auto [depth, p] : length_mass) {
    (void)depth;
    out.h_t -= p * std::log2(p);
  }
  // H(Y^T | T = t) over the normalized leaves of length t.
  for (auto [t, mass] : length_mass) {
    double h = 0.0;
    for (auto [depth, p] : leaves)
      if (depth == t) h -= (p / mass) * std::log2(p / mass);
    out.h_yt_given_t += mass * h;
  }
  return out;
}

namespace {

double node_cmi_bits(const TreeNode& node, int branching) {
  // I(X; Y | Z) of the node's joint law, in bits.
  int nx = node.nx, nz = node.nz, ny = branching;
  auto at = [&](int x, int z, int y) { return node.joint[(static_cast<size_t>(x) * nz + z) * ny + y]; };
  double mi = 0.0;
  for (int z = 0; z < nz; ++z) {
    double pz = 0.0;
    std::vector<double> px(nx, 0.0), py(ny, 0.0);
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) {
        double v = at(x, z, y);
        pz += v;
        px[x] += v;
        py[y] += v;
      }
    if (pz <= 0.0) continue;
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) {
        double v = at(x, z, y);
        if (v > 0.0) mi += v * std::log2(v * pz / (px[x] * py[y]));
      }
  }
  return std::max(mi, 0.0);
}

double directed_info_walk(const TreeNode& node, int branching) {
  if (node.children.empty() || node.prob <= 0.0) return 0.0;
  if (node.nx < 1 || node.nz < 1 ||
      node.joint.size() != static_cast<size_t>(node.nx) * node.nz * branching)
    fail(Err::InconsistentLabels, "live node lacks a well-formed label law");
  double total = 0.0;
  std::vector<double> py(branching, 0.0);
  for (int x = 0; x < node.nx; ++x)
    for (int z = 0; z < node.nz; ++z)
      for (int y = 0; y < branching; ++y) {
        double v = node.joint[(static_cast<size_t>(x) * node.nz + z) * branching + y];
        if (v < -1e-12) fail(Err::InconsistentLabels, "negative label probability");
        py[y] += v;
        total += v;
      }
  if (std::fabs(total - 1.0) > 1e-9) fail(Err::InconsistentLabels, "label law does not sum to 1");
  for (int y = 0; y < branching; ++y) {
    double branch = node.children[y].prob / node.prob;
    if (std::fabs(py[y] - branch) > 1e-9)
      fail(Err::InconsistentLabels, "label y-marginal disagrees with branch probabilities");
  }
  double acc = node.prob * node_cmi_bits(node, branching);
  for (const auto& c : node.children) acc += directed_info_walk(c, branching);
  return acc;
}

}  // namespace

double vl_directed_information(const OutputTree& tree) {
  validate_tree(tree);
  return directed_info_walk(tree.root, tree.branching);
}

namespace {

TreeNode node_from_json(const nlohmann::json& j, int branching) {
  TreeNode node;
  node.prob = j.at("p").get<double>();
  node.stop = j.value("stop", false);
  if (j.contains("children")) {
    for (const auto& c : j["children"]) node.children.push_back(node_from_json(c, branching));
  }
  if (j.contains("labels")) {
    const auto& lab = j["labels"];
    node.nx = lab.at("nx").get<int>();
    node.nz = lab.at("nz").get<int>();
    node.joint = lab.at("joint").get<std::vector<double>>();
  }
  return node;
}

}  // namespace

OutputTree tree_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Err::BadInput, std::string("tree JSON parse error: ") + e.what());
  }
  OutputTree tree;
  tree.branching = j.at("branching").get<int>();
  tree.horizon = j.at("horizon").get<int>();
  tree.root = node_from_json(j.at("root"), tree.branching);
  validate_tree(tree);
  return tree;
}

OutputTree load_tree_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Err::BadInput, "cannot open tree file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return tree_from_json(ss.str());
}

namespace {

TreeNode random_node(int branching, int horizon, int depth, double prob, Rng& rng,
                     double stop_prob) {
  TreeNode node;
  node.prob = prob;
  if (depth == horizon || (depth > 0 && rng.next_unit() < stop_prob)) {
    node.stop = depth < horizon;
    return node;
  }
  std::vector<double> weights(branching);
  double total = 0.0;
  for (double& w : weights) {
    w = 0.05 + rng.next_unit();
    total += w;
  }
  for (int b = 0; b < branching; ++b)
    node.children.push_back(
        random_node(branching, horizon, depth + 1, prob * weights[b] / total, rng, stop_prob));
  return node;
}

}  // namespace

OutputTree random_output_tree(int branching, int horizon, Rng& rng, double stop_prob) {
  OutputTree tree;
  tree.branching = branching;
  tree.horizon = horizon;
  tree.root = random_node(branching, horizon, 0, 1.0, rng, stop_prob);
  validate_tree(tree);
  return tree;
}

}  // namespace macfb
