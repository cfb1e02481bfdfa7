#pragma once

#include <string>
#include <vector>

#include "macfb/prob.hpp"

namespace macfb {

/// Node of an exhaustively enumerated output tree. `prob` is the absolute
/// probability of reaching the node; a node is a realized value of Y^T when
/// it stops or sits at the horizon. Internal nodes may carry a joint label
/// law P(x, z, y_next | node) used by the directed-information functional.
struct TreeNode {
  double prob = 0.0;
  bool stop = false;
  std::vector<TreeNode> children;  // empty, or exactly `branching` entries
  int nx = 0, nz = 0;              // label alphabet sizes; 0 = unlabeled
  std::vector<double> joint;       // [x][z][y], size nx * nz * branching
};

struct OutputTree {
  int branching = 0;
  int horizon = 0;
  TreeNode root;
};

/// Structural validation: root mass 1, children masses resolve the parent,
/// stopped nodes are leaves, every live node below the horizon branches.
/// Throws InvalidStoppingTime otherwise.
void validate_tree(const OutputTree& tree);

struct VlEntropy {
  double h_yt = 0.0;          // H(Y^T)
  double h_t = 0.0;           // H(T)
  double h_yt_given_t = 0.0;  // H(Y^T | T)
};

/// Exact leaf-enumeration evaluation; H(Y^T) = H(T) + H(Y^T|T) holds to
/// 1e-12 because T is a function of Y^T.
VlEntropy vl_entropy(const OutputTree& tree);

/// Variable-length directed information E[sum_{t<=T} I(X^t; Y_t | Z^t, F_{Y,t-1})]:
/// the per-node conditional mutual informations of the label laws, weighted
/// by node probabilities. Throws InconsistentLabels when a live node lacks
/// labels or its label law disagrees with the branch probabilities.
double vl_directed_information(const OutputTree& tree);

OutputTree tree_from_json(const std::string& text);
OutputTree load_tree_file(const std::string& path);

class Rng;

/// Random unlabeled tree fixture: uniform-ish branch masses and Bernoulli
/// stopping away from the horizon (for the decomposition-identity checks).
OutputTree random_output_tree(int branching, int horizon, Rng& rng, double stop_prob = 0.3);

}  // namespace macfb
