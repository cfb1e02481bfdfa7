#pragma once

#include <string>
#include <vector>

#include "macfb/prob.hpp"

namespace macfb {

/// Finite-alphabet two-user multiple-access channel Q(y | x1, x2).
/// Immutable after validation; all operations on it are pure, so instances
/// can be shared read-only across workers.
struct ChannelModel {
  int x1_size = 0;
  int x2_size = 0;
  int y_size = 0;
  std::vector<double> q;  // [x1][x2][y], row-major

  double at(int x1, int x2, int y) const { return q[(static_cast<size_t>(x1) * x2_size + x2) * y_size + y]; }
  const double* row(int x1, int x2) const { return &q[(static_cast<size_t>(x1) * x2_size + x2) * y_size]; }
  ProbVector row_vec(int x1, int x2) const {
    const double* r = row(x1, x2);
    return ProbVector(r, r + y_size);
  }
  int input_size(int user) const { return user == 1 ? x1_size : x2_size; }

  bool strictly_positive() const;
  double min_entry() const;
};

/// Marginalized channel seen by one user when the other transmits i.i.d.
/// from a fixed distribution.
struct EffectiveChannel {
  int user = 1;                          // whose perspective
  std::vector<ProbVector> rows;          // [x_user] -> distribution over y
};

/// Validates dimensions/stochasticity and builds the model. With
/// `renormalize`, rows within 1e-3 of stochastic are rescaled instead of
/// rejected (ingestion flag --renormalize).
ChannelModel validate_channel(int x1_size, int x2_size, int y_size, std::vector<double> q,
                              bool renormalize = false);

/// m-ary additive MAC: Y = X1 (+) X2 (+) N mod m with P(N=i) = p for i != 0.
/// Requires 0 <= p <= 1/m.
ChannelModel build_additive_mod_m(int m, double p);

/// Product MAC from two point-to-point kernels: Y = (Y1, Y2),
/// Q(y1,y2 | x1,x2) = k1(y1|x1) k2(y2|x2).
ChannelModel build_product(const std::vector<ProbVector>& kernel1,
                           const std::vector<ProbVector>& kernel2);

/// Binary symmetric kernel with crossover p.
std::vector<ProbVector> bsc_kernel(double p);

/// Max over ordered row pairs of D(Q(.|x1,x2) || Q(.|x1',x2')): the
/// confirmation-stage exponent ceiling. +inf when some pair is singular.
double d_ub(const ChannelModel& ch);

EffectiveChannel effective_channel(const ChannelModel& ch, int user, const ProbVector& other_input);

/// sup_z D(Qbar(.|x) || Qbar(.|z)) for the effective channel of `user`.
double d_bar_j(const ChannelModel& ch, int user, int x, const ProbVector& other_input);

/// max_{x,x'} sup over vertex mixtures x'_other of
/// D(Qbar_user(.|x) || Q(.|x', x'_other)). The sup over the other user's
/// mixing distribution is attained at a vertex because KL is convex in its
/// second argument.
double d_star_upper(const ChannelModel& ch, int user, const ProbVector& other_input);

/// Largest divergence `user` can create while the other user's symbol is
/// held fixed: max_{x_other} max_{x,x'} D(Q(.|x, x_other) || Q(.|x', x_other)).
double fixed_other_divergence(const ChannelModel& ch, int user);

/// Max log2 ratio of channel entries over a common output symbol; bounds
/// every one-step log-entropy increment. +inf unless strictly positive.
double max_log_ratio(const ChannelModel& ch);

// --- serialization ------------------------------------------------------

std::string channel_to_json(const ChannelModel& ch);
ChannelModel channel_from_json(const std::string& text, bool renormalize = false);
ChannelModel load_channel_file(const std::string& path, bool renormalize = false);

/// Accepts a file path or a builder shorthand:
///   additive:m=3,p=0.1      product:bsc=0.1,bsc=0.2
ChannelModel resolve_channel_spec(const std::string& spec, bool renormalize = false);

}  // namespace macfb
