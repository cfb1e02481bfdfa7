#include "macfb/info.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "macfb/errors.hpp"
#include "macfb/parallel.hpp"

namespace macfb {

MiTriple mac_mi_triple(const ChannelModel& ch, const ProbVector& p1, const ProbVector& p2) {
  if (static_cast<int>(p1.size()) != ch.x1_size || static_cast<int>(p2.size()) != ch.x2_size)
    fail(Err::AlphabetMismatch, "mac_mi_triple: input size mismatch");
  MiTriple mi;
  ProbVector out(ch.y_size, 0.0);
  double h_rows = 0.0;
  // i1: average over x2 of I(X1; Y) through the column kernel.
  for (int x2 = 0; x2 < ch.x2_size; ++x2) {
    if (p2[x2] == 0.0) continue;
    ProbVector col_out(ch.y_size, 0.0);
    double h_cond = 0.0;
    for (int x1 = 0; x1 < ch.x1_size; ++x1) {
      if (p1[x1] == 0.0) continue;
      const double* r = ch.row(x1, x2);
      for (int y = 0; y < ch.y_size; ++y) col_out[y] += p1[x1] * r[y];
      h_cond += p1[x1] * entropy(ch.row_vec(x1, x2));
    }
    mi.i1 += p2[x2] * (entropy(col_out) - h_cond);
    for (int y = 0; y < ch.y_size; ++y) out[y] += p2[x2] * col_out[y];
    h_rows += p2[x2] * h_cond;
  }
  for (int x1 = 0; x1 < ch.x1_size; ++x1) {
    if (p1[x1] == 0.0) continue;
    ProbVector row_out(ch.y_size, 0.0);
    double h_cond = 0.0;
    for (int x2 = 0; x2 < ch.x2_size; ++x2) {
      if (p2[x2] == 0.0) continue;
      const double* r = ch.row(x1, x2);
      for (int y = 0; y < ch.y_size; ++y) row_out[y] += p2[x2] * r[y];
      h_cond += p2[x2] * entropy(ch.row_vec(x1, x2));
    }
    mi.i2 += p1[x1] * (entropy(row_out) - h_cond);
  }
  mi.i3 = entropy(out) - h_rows;
  mi.i1 = std::max(mi.i1, 0.0);
  mi.i2 = std::max(mi.i2, 0.0);
  mi.i3 = std::max(mi.i3, 0.0);
  return mi;
}

PtpCapacity ptp_capacity(const std::vector<ProbVector>& kernel, double tol, int max_iter) {
  int n = static_cast<int>(kernel.size());
  if (n == 0) fail(Err::BadInput, "ptp_capacity: empty kernel");
  int m = static_cast<int>(kernel[0].size());
  for (const auto& r : kernel) validate_prob_vector(r);
  ProbVector p(n, 1.0 / n);
  std::vector<double> d(n, 0.0);
  for (int it = 1; it <= max_iter; ++it) {
    ProbVector out(m, 0.0);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y) out[y] += p[x] * kernel[x][y];
    double c_low = 0.0, c_up = 0.0;
    for (int x = 0; x < n; ++x) {
      d[x] = kl(kernel[x], out, LogBase::Natural);
      c_low += p[x] * d[x];
      c_up = std::max(c_up, d[x]);
    }
    if (c_up - c_low <= tol * std::log(2.0)) {
      return PtpCapacity{c_low / std::log(2.0), p, it};
    }
    double norm = 0.0;
    for (int x = 0; x < n; ++x) {
      p[x] *= std::exp(d[x] - c_low);  // centered to avoid overflow
      norm += p[x];
    }
    for (int x = 0; x < n; ++x) p[x] /= norm;
  }
  fail(Err::NonConvergence, "ptp_capacity: iteration cap exceeded");
}

PtpCapacity conditional_capacity(const ChannelModel& ch, int frozen_user, int frozen_symbol,
                                 double tol) {
  std::vector<ProbVector> kernel;
  int free_size = ch.input_size(3 - frozen_user);
  kernel.reserve(free_size);
  for (int x = 0; x < free_size; ++x)
    kernel.push_back(frozen_user == 1 ? ch.row_vec(frozen_symbol, x) : ch.row_vec(x, frozen_symbol));
  return ptp_capacity(kernel, tol);
}

int default_denominator(int k) {
  switch (k) {
    case 1: return 1;
    case 2: return 20;
    case 3: return 12;
    case 4: return 9;
    default: return std::max(2, 24 / k);
  }
}

namespace {
void emit_compositions(int k, int denom, int pos, int left, std::vector<int>& cur,
                       std::vector<ProbVector>& out) {
  if (pos == k - 1) {
    cur[pos] = left;
    ProbVector p(k);
    for (int i = 0; i < k; ++i) p[i] = static_cast<double>(cur[i]) / denom;
    out.push_back(std::move(p));
    return;
  }
  for (int v = left; v >= 0; --v) {
    cur[pos] = v;
    emit_compositions(k, denom, pos + 1, left - v, cur, out);
  }
}
}  // namespace

std::vector<ProbVector> simplex_grid(int k, int denom) {
  std::vector<ProbVector> out;
  std::vector<int> cur(k, 0);
  emit_compositions(k, denom, 0, denom, cur, out);
  return out;
}

InputGrid build_input_grid(const ChannelModel& ch, int denom1, int denom2) {
  InputGrid grid;
  grid.p1s = simplex_grid(ch.x1_size, denom1 > 0 ? denom1 : default_denominator(ch.x1_size));
  grid.p2s = simplex_grid(ch.x2_size, denom2 > 0 ? denom2 : default_denominator(ch.x2_size));
  size_t n1 = grid.p1s.size(), n2 = grid.p2s.size();
  grid.triples.resize(n1 * n2);
  parallel_for_blocks(static_cast<int64_t>(n1), [&](int64_t a) {
    for (size_t b = 0; b < n2; ++b)
      grid.triples[a * n2 + b] = mac_mi_triple(ch, grid.p1s[a], grid.p2s[b]);
  });
  return grid;
}

std::pair<double, size_t> grid_max(const InputGrid& grid,
                                   const std::function<double(const MiTriple&)>& objective) {
  size_t n = grid.triples.size();
  int workers = max_threads();
  size_t chunk = (n + workers - 1) / std::max(workers, 1);
  std::vector<std::pair<double, size_t>> best(workers, {-kInf, 0});
  parallel_for_blocks(workers, [&](int64_t w) {
    size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    double bv = -kInf;
    size_t bi = 0;
    for (size_t i = lo; i < hi; ++i) {
      double v = objective(grid.triples[i]);
      if (v > bv) {
        bv = v;
        bi = i;
      }
    }
    best[w] = {bv, bi};
  });
  std::pair<double, size_t> out{-kInf, 0};
  for (const auto& cand : best) {
    if (cand.first > out.first || (cand.first == out.first && cand.second < out.second)) out = cand;
  }
  return out;
}

std::pair<ProbVector, ProbVector> refine_product_input(
    const ChannelModel& ch, ProbVector p1, ProbVector p2,
    const std::function<double(const MiTriple&)>& objective, double step0, int rounds) {
  double best = objective(mac_mi_triple(ch, p1, p2));
  double step = step0;
  for (int round = 0; round < rounds; ++round) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (ProbVector* p : {&p1, &p2}) {
        int k = static_cast<int>(p->size());
        for (int i = 0; i < k; ++i) {
          if ((*p)[i] < step) continue;
          for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            (*p)[i] -= step;
            (*p)[j] += step;
            double v = objective(mac_mi_triple(ch, p1, p2));
            if (v > best + 1e-15) {
              best = v;
              improved = true;
            } else {
              (*p)[i] += step;
              (*p)[j] -= step;
            }
          }
        }
      }
    }
    step /= 5.0;
  }
  return {p1, p2};
}

std::vector<std::array<double, 3>> lambda_simplex_grid(double step) {
  int denom = std::max(1, static_cast<int>(std::lround(1.0 / step)));
  std::vector<std::array<double, 3>> out;
  for (int i = 0; i <= denom; ++i)
    for (int j = 0; j + i <= denom; ++j) {
      int k = denom - i - j;
      out.push_back({static_cast<double>(i) / denom, static_cast<double>(j) / denom,
                     static_cast<double>(k) / denom});
    }
  return out;
}

double c_lambda(const InputGrid& grid, const std::array<double, 3>& lambda) {
  auto [v, idx] = grid_max(grid, [&](const MiTriple& mi) {
    return lambda[0] * mi.i1 + lambda[1] * mi.i2 + lambda[2] * mi.i3;
  });
  (void)idx;
  return v;
}

LambdaTable build_lambda_table(const InputGrid& grid, double step) {
  LambdaTable table;
  table.lambdas = lambda_simplex_grid(step);
  table.c.resize(table.lambdas.size());
  for (size_t i = 0; i < table.lambdas.size(); ++i) table.c[i] = c_lambda(grid, table.lambdas[i]);
  return table;
}

RegionSample region_boundary(const LambdaTable& table, double theta) {
  double ct = std::cos(theta), st = std::sin(theta);
  double radius = kInf;
  for (size_t i = 0; i < table.lambdas.size(); ++i) {
    const auto& l = table.lambdas[i];
    double g = l[0] * ct + l[1] * st + l[2] * (ct + st);
    if (g <= 1e-12) continue;
    radius = std::min(radius, table.c[i] / g);
  }
  if (!std::isfinite(radius)) radius = 0.0;
  return RegionSample{theta, radius, radius * ct, radius * st};
}

RegionSample region_boundary(const InputGrid& grid, double theta, double lambda_step) {
  return region_boundary(build_lambda_table(grid, lambda_step), theta);
}

}  // namespace macfb
