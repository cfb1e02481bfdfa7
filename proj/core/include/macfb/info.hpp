#pragma once

#include <array>
#include <functional>
#include <vector>

#include "macfb/channel.hpp"
#include "macfb/prob.hpp"

namespace macfb {

/// Conditional/joint mutual informations of a MAC under independent inputs,
/// in bits: i1 = I(X1;Y|X2), i2 = I(X2;Y|X1), i3 = I(X1,X2;Y).
struct MiTriple {
  double i1 = 0.0, i2 = 0.0, i3 = 0.0;
};

MiTriple mac_mi_triple(const ChannelModel& ch, const ProbVector& p1, const ProbVector& p2);

struct PtpCapacity {
  double capacity = 0.0;  // bits
  ProbVector input;
  int iterations = 0;
};

/// Blahut-Arimoto capacity of a point-to-point kernel (rows = W(.|x)).
/// Stops when the standard upper/lower capacity bounds are within tol.
PtpCapacity ptp_capacity(const std::vector<ProbVector>& kernel, double tol = 1e-10,
                         int max_iter = 200000);

/// I(X2;Y | X1 = x1) maximized over P_X2 (the hybrid-phase data capacity
/// C_2(x1)); user selects which input is frozen.
PtpCapacity conditional_capacity(const ChannelModel& ch, int frozen_user, int frozen_symbol,
                                 double tol = 1e-10);

/// All pmfs over k symbols with entries i/denom; the L=1 optimization
/// lattice. k=2 defaults to denom 20 (21 points), k=3 to 12.
std::vector<ProbVector> simplex_grid(int k, int denom);
int default_denominator(int k);

/// Product-input grid with the MI triples of every (p1, p2) pair cached;
/// the basic object behind C_lambda, E_o sweeps and the bound sups.
/// Grid sweeps parallelize over partitions and combine by (value, index),
/// so results do not depend on the worker count.
struct InputGrid {
  std::vector<ProbVector> p1s, p2s;
  std::vector<MiTriple> triples;  // row-major: index = a * p2s.size() + b
  const MiTriple& at(size_t a, size_t b) const { return triples[a * p2s.size() + b]; }
};

InputGrid build_input_grid(const ChannelModel& ch, int denom1 = 0, int denom2 = 0);

/// max over a function of the cached triples; returns best value and the
/// lexicographically first achieving grid index.
std::pair<double, size_t> grid_max(const InputGrid& grid,
                                   const std::function<double(const MiTriple&)>& objective);

/// Deterministic local pattern search around (p1, p2), maximizing
/// objective(mac_mi_triple(ch, p1, p2)); the refinement pass behind the
/// --refine flag. step shrinks by 5x each round.
std::pair<ProbVector, ProbVector> refine_product_input(
    const ChannelModel& ch, ProbVector p1, ProbVector p2,
    const std::function<double(const MiTriple&)>& objective, double step0, int rounds = 3);

std::vector<std::array<double, 3>> lambda_simplex_grid(double step);

/// C_lambda: sup over product inputs of lambda . (i1, i2, i3). The weighted
/// objective is linear in the achievable triple, so 3-point time sharing
/// cannot increase it and a single grid point attains the max.
double c_lambda(const InputGrid& grid, const std::array<double, 3>& lambda);

/// C_lambda evaluated over a whole lambda grid (shared by the geometric and
/// lambda-mixed bounds).
struct LambdaTable {
  std::vector<std::array<double, 3>> lambdas;
  std::vector<double> c;  // c_lambda per entry
};
LambdaTable build_lambda_table(const InputGrid& grid, double step = 0.05);

struct RegionSample {
  double theta = 0.0;
  double radius = 0.0;  // C(theta)
  double r1 = 0.0, r2 = 0.0;
};

/// Boundary radius along angle theta via the supporting-hyperplane form:
/// C(theta) = min_lambda C_lambda / (l1 cos + l2 sin + l3 (cos + sin)).
RegionSample region_boundary(const LambdaTable& table, double theta);
RegionSample region_boundary(const InputGrid& grid, double theta, double lambda_step = 0.05);

}  // namespace macfb
