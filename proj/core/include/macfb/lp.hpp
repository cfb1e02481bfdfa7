#pragma once

#include <vector>

namespace macfb::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Result {
  Status status;
  double value;            // objective at optimum (valid when Optimal)
  std::vector<double> x;   // primal solution (valid when Optimal)
};

/// Solves  max c'x  s.t.  A x <= b, x >= 0  with a dense tableau simplex.
/// Equality rows are expressed as a <= / >= pair by the caller. Sized for
/// the small programs in this project (hundreds of variables, a handful of
/// rows); not a general-purpose LP code.
Result maximize(const std::vector<std::vector<double>>& A,
                const std::vector<double>& b,
                const std::vector<double>& c);

}  // namespace macfb::lp
