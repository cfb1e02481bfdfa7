#include "macfb/lp.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace macfb::lp {

namespace {

constexpr double kEps = 1e-9;

// Dense two-phase simplex over the tableau D with nonbasic/basic index sets
// N and B; the classic competitive-programming formulation, which is compact
// and robust at these sizes.
class Simplex {
public:
  Simplex(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
          const std::vector<double>& c)
      : m_(static_cast<int>(b.size())),
        n_(static_cast<int>(c.size())),
        N_(n_ + 1),
        B_(m_),
        D_(m_ + 2, std::vector<double>(n_ + 2)) {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) D_[i][j] = A[i][j];
    for (int i = 0; i < m_; ++i) {
      B_[i] = n_ + i;
      D_[i][n_] = -1.0;
      D_[i][n_ + 1] = b[i];
    }
    for (int j = 0; j < n_; ++j) {
      N_[j] = j;
      D_[m_][j] = -c[j];
    }
    N_[n_] = -1;
    D_[m_ + 1][n_] = 1.0;
  }

  Result solve() {
    int r = 0;
    for (int i = 1; i < m_; ++i)
      if (D_[i][n_ + 1] < D_[r][n_ + 1]) r = i;
    if (m_ > 0 && D_[r][n_ + 1] < -kEps) {
      pivot(r, n_);
      if (!run(2) || D_[m_ + 1][n_ + 1] < -kEps) return {Status::Infeasible, 0.0, {}};
      for (int i = 0; i < m_; ++i) {
        if (B_[i] != -1) continue;
        int s = 0;
        for (int j = 1; j <= n_; ++j)
          if (less(i, j, s)) s = j;
        pivot(i, s);
      }
    }
    bool bounded = run(1);
    std::vector<double> x(n_, 0.0);
    for (int i = 0; i < m_; ++i)
      if (B_[i] < n_) x[B_[i]] = D_[i][n_ + 1];
    if (!bounded) return {Status::Unbounded, 0.0, {}};
    return {Status::Optimal, D_[m_][n_ + 1], std::move(x)};
  }

private:
  bool less(int row, int j, int s) const {
    double a = D_[row][j], b = D_[row][s];
    if (a != b) return a < b;
    return N_[j] < N_[s];
  }

  void pivot(int r, int s) {
    std::vector<double>& a = D_[r];
    double inv = 1.0 / a[s];
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r || std::fabs(D_[i][s]) <= kEps) continue;
      std::vector<double>& row = D_[i];
      double factor = row[s] * inv;
      for (int j = 0; j < n_ + 2; ++j) row[j] -= a[j] * factor;
      row[s] = a[s] * factor;
    }
    for (int j = 0; j < n_ + 2; ++j)
      if (j != s) D_[r][j] *= inv;
    for (int i = 0; i < m_ + 2; ++i)
      if (i != r) D_[i][s] *= -inv;
    D_[r][s] = inv;
    std::swap(B_[r], N_[s]);
  }

  bool run(int phase) {
    int x = m_ + phase - 1;
    for (;;) {
      int s = -1;
      for (int j = 0; j <= n_; ++j) {
        if (N_[j] == -phase) continue;
        if (s == -1 || less(x, j, s)) s = j;
      }
      if (D_[x][s] >= -kEps) return true;
      int r = -1;
      for (int i = 0; i < m_; ++i) {
        if (D_[i][s] <= kEps) continue;
        if (r == -1 || ratio_less(i, r, s)) r = i;
      }
      if (r == -1) return false;
      pivot(r, s);
    }
  }

  bool ratio_less(int i, int r, int s) const {
    double a = D_[i][n_ + 1] / D_[i][s];
    double b = D_[r][n_ + 1] / D_[r][s];
    if (a != b) return a < b;
    return B_[i] < B_[r];
  }

  int m_, n_;
  std::vector<int> N_, B_;
  std::vector<std::vector<double>> D_;
};

}  // namespace

Result maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                const std::vector<double>& c) {
  return Simplex(A, b, c).solve();
}

}  // namespace macfb::lp
