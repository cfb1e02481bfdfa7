#pragma once

#include <limits>
#include <vector>

namespace macfb {

using ProbVector = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kProbTol = 1e-9;

enum class LogBase { Two, Natural };

/// Throws unless entries are >= 0 and sum to 1 within kProbTol.
void validate_prob_vector(const ProbVector& p);

bool is_prob_vector(const ProbVector& p, double tol = kProbTol);

ProbVector point_mass(int size, int index);
ProbVector uniform_dist(int size);

/// Shannon entropy, 0 log 0 = 0.
double entropy(const ProbVector& p, LogBase base = LogBase::Two);

/// Kullback-Leibler divergence D(p || q). Returns +inf when p is not
/// absolutely continuous w.r.t. q. Throws LengthMismatch on size mismatch.
double kl(const ProbVector& p, const ProbVector& q, LogBase base = LogBase::Two);

/// Binary entropy in bits.
double binary_entropy(double p);

/// Lower-half inverse of binary entropy: h_b(x) = v with x in [0, 1/2].
/// Bisection to 1e-12.
double binary_entropy_inv(double v);

}  // namespace macfb
