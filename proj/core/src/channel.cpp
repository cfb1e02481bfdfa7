#include "macfb/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "macfb/errors.hpp"

namespace macfb {

bool ChannelModel::strictly_positive() const {
  return std::all_of(q.begin(), q.end(), [](double v) { return v > 0.0; });
}

double ChannelModel::min_entry() const {
  return *std::min_element(q.begin(), q.end());
}

ChannelModel validate_channel(int x1_size, int x2_size, int y_size, std::vector<double> q,
                              bool renormalize) {
  if (x1_size < 1 || x2_size < 1 || y_size < 1) fail(Err::BadInput, "alphabet sizes must be >= 1");
  if (q.size() != static_cast<size_t>(x1_size) * x2_size * y_size)
    fail(Err::BadInput, "channel tensor size does not match declared alphabets");
  for (double v : q)
    if (v < 0.0) fail(Err::NegativeEntry, "channel tensor has a negative entry");
  for (int x1 = 0; x1 < x1_size; ++x1) {
    for (int x2 = 0; x2 < x2_size; ++x2) {
      double* row = &q[(static_cast<size_t>(x1) * x2_size + x2) * y_size];
      double sum = 0.0;
      for (int y = 0; y < y_size; ++y) sum += row[y];
      if (std::fabs(sum - 1.0) > kProbTol) {
        if (renormalize && sum > 0.0 && std::fabs(sum - 1.0) <= 1e-3) {
          for (int y = 0; y < y_size; ++y) row[y] /= sum;
        } else {
          char buf[128];
          std::snprintf(buf, sizeof(buf), "row (x1=%d, x2=%d) sums to %.12g", x1, x2, sum);
          fail(Err::NonStochasticRow, buf);
        }
      }
    }
  }
  return ChannelModel{x1_size, x2_size, y_size, std::move(q)};
}

ChannelModel build_additive_mod_m(int m, double p) {
  if (m < 2) fail(Err::BadInput, "additive MAC needs m >= 2");
  if (p < 0.0 || p > 1.0 / m) fail(Err::InvalidNoise, "additive noise requires 0 <= p <= 1/m");
  std::vector<double> q(static_cast<size_t>(m) * m * m);
  double hit = 1.0 - (m - 1) * p;
  for (int x1 = 0; x1 < m; ++x1)
    for (int x2 = 0; x2 < m; ++x2)
      for (int y = 0; y < m; ++y)
        q[(static_cast<size_t>(x1) * m + x2) * m + y] = (y == (x1 + x2) % m) ? hit : p;
  return validate_channel(m, m, m, std::move(q));
}

ChannelModel build_product(const std::vector<ProbVector>& kernel1,
                           const std::vector<ProbVector>& kernel2) {
  if (kernel1.empty() || kernel2.empty()) fail(Err::BadInput, "empty component kernel");
  int y1 = static_cast<int>(kernel1[0].size()), y2 = static_cast<int>(kernel2[0].size());
  for (const auto& r : kernel1) validate_prob_vector(r);
  for (const auto& r : kernel2) validate_prob_vector(r);
  int n1 = static_cast<int>(kernel1.size()), n2 = static_cast<int>(kernel2.size());
  std::vector<double> q(static_cast<size_t>(n1) * n2 * y1 * y2);
  size_t idx = 0;
  for (int x1 = 0; x1 < n1; ++x1)
    for (int x2 = 0; x2 < n2; ++x2)
      for (int a = 0; a < y1; ++a)
        for (int b = 0; b < y2; ++b) q[idx++] = kernel1[x1][a] * kernel2[x2][b];
  return validate_channel(n1, n2, y1 * y2, std::move(q));
}

std::vector<ProbVector> bsc_kernel(double p) {
  if (p < 0.0 || p > 1.0) fail(Err::InvalidNoise, "BSC crossover must be in [0,1]");
  return {{1.0 - p, p}, {p, 1.0 - p}};
}

double d_ub(const ChannelModel& ch) {
  double best = 0.0;
  for (int a1 = 0; a1 < ch.x1_size; ++a1)
    for (int a2 = 0; a2 < ch.x2_size; ++a2) {
      ProbVector p = ch.row_vec(a1, a2);
      for (int b1 = 0; b1 < ch.x1_size; ++b1)
        for (int b2 = 0; b2 < ch.x2_size; ++b2)
          best = std::max(best, kl(p, ch.row_vec(b1, b2)));
    }
  return best;
}

EffectiveChannel effective_channel(const ChannelModel& ch, int user, const ProbVector& other_input) {
  int other = 3 - user;
  if (static_cast<int>(other_input.size()) != ch.input_size(other))
    fail(Err::AlphabetMismatch, "effective_channel: other_input alphabet mismatch");
  validate_prob_vector(other_input);
  EffectiveChannel eff;
  eff.user = user;
  int mine = ch.input_size(user);
  eff.rows.assign(mine, ProbVector(ch.y_size, 0.0));
  for (int x = 0; x < mine; ++x)
    for (int z = 0; z < static_cast<int>(other_input.size()); ++z) {
      const double* r = (user == 1) ? ch.row(x, z) : ch.row(z, x);
      for (int y = 0; y < ch.y_size; ++y) eff.rows[x][y] += other_input[z] * r[y];
    }
  return eff;
}

double d_bar_j(const ChannelModel& ch, int user, int x, const ProbVector& other_input) {
  EffectiveChannel eff = effective_channel(ch, user, other_input);
  double best = 0.0;
  for (const auto& alt : eff.rows) best = std::max(best, kl(eff.rows.at(x), alt));
  return best;
}

double d_star_upper(const ChannelModel& ch, int user, const ProbVector& other_input) {
  EffectiveChannel eff = effective_channel(ch, user, other_input);
  int mine = ch.input_size(user), other = ch.input_size(3 - user);
  double best = 0.0;
  for (int x = 0; x < mine; ++x)
    for (int xp = 0; xp < mine; ++xp)
      for (int z = 0; z < other; ++z) {
        ProbVector alt = (user == 1) ? ch.row_vec(xp, z) : ch.row_vec(z, xp);
        best = std::max(best, kl(eff.rows[x], alt));
      }
  return best;
}

double fixed_other_divergence(const ChannelModel& ch, int user) {
  int mine = ch.input_size(user), other = ch.input_size(3 - user);
  double best = 0.0;
  for (int z = 0; z < other; ++z)
    for (int x = 0; x < mine; ++x) {
      ProbVector p = (user == 1) ? ch.row_vec(x, z) : ch.row_vec(z, x);
      for (int xp = 0; xp < mine; ++xp) {
        ProbVector q = (user == 1) ? ch.row_vec(xp, z) : ch.row_vec(z, xp);
        best = std::max(best, kl(p, q));
      }
    }
  return best;
}

double max_log_ratio(const ChannelModel& ch) {
  if (!ch.strictly_positive()) return kInf;
  double lo = kInf, hi = 0.0;
  for (double v : ch.q) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // The extreme ratio is only attained when the max and min sit over a
  // common y; scan per output symbol.
  double best = 0.0;
  for (int y = 0; y < ch.y_size; ++y) {
    double mn = kInf, mx = 0.0;
    for (int x1 = 0; x1 < ch.x1_size; ++x1)
      for (int x2 = 0; x2 < ch.x2_size; ++x2) {
        double v = ch.at(x1, x2, y);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
    best = std::max(best, std::log2(mx / mn));
  }
  return best;
}

std::string channel_to_json(const ChannelModel& ch) {
  nlohmann::json j;
  j["x1_size"] = ch.x1_size;
  j["x2_size"] = ch.x2_size;
  j["y_size"] = ch.y_size;
  auto tensor = nlohmann::json::array();
  for (int x1 = 0; x1 < ch.x1_size; ++x1) {
    auto plane = nlohmann::json::array();
    for (int x2 = 0; x2 < ch.x2_size; ++x2) {
      auto row = nlohmann::json::array();
      for (int y = 0; y < ch.y_size; ++y) row.push_back(ch.at(x1, x2, y));
      plane.push_back(std::move(row));
    }
    tensor.push_back(std::move(plane));
  }
  j["Q"] = std::move(tensor);
  return j.dump(2);
}

ChannelModel channel_from_json(const std::string& text, bool renormalize) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Err::BadInput, std::string("channel JSON parse error: ") + e.what());
  }
  if (!j.contains("x1_size") || !j.contains("x2_size") || !j.contains("y_size") || !j.contains("Q"))
    fail(Err::BadInput, "channel JSON must contain x1_size, x2_size, y_size, Q");
  int x1 = j["x1_size"], x2 = j["x2_size"], ys = j["y_size"];
  std::vector<double> q;
  q.reserve(static_cast<size_t>(x1) * x2 * ys);
  const auto& tensor = j["Q"];
  if (static_cast<int>(tensor.size()) != x1) fail(Err::BadInput, "Q first dimension mismatch");
  for (const auto& plane : tensor) {
    if (static_cast<int>(plane.size()) != x2) fail(Err::BadInput, "Q second dimension mismatch");
    for (const auto& row : plane) {
      if (static_cast<int>(row.size()) != ys) fail(Err::BadInput, "Q third dimension mismatch");
      for (const auto& v : row) q.push_back(v.get<double>());
    }
  }
  return validate_channel(x1, x2, ys, std::move(q), renormalize);
}

ChannelModel load_channel_file(const std::string& path, bool renormalize) {
  std::ifstream in(path);
  if (!in) fail(Err::BadInput, "cannot open channel file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return channel_from_json(ss.str(), renormalize);
}

namespace {

// key=value list "m=3,p=0.1" -> ordered pairs
std::vector<std::pair<std::string, std::string>> split_kv(const std::string& s) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) fail(Err::BadInput, "expected key=value in channel shorthand: " + item);
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

}  // namespace

ChannelModel resolve_channel_spec(const std::string& spec, bool renormalize) {
  auto colon = spec.find(':');
  if (colon != std::string::npos) {
    std::string kind = spec.substr(0, colon), args = spec.substr(colon + 1);
    if (kind == "additive") {
      int m = -1;
      double p = -1.0;
      for (auto& [k, v] : split_kv(args)) {
        if (k == "m") m = std::stoi(v);
        else if (k == "p") p = std::stod(v);
        else fail(Err::BadInput, "unknown additive parameter: " + k);
      }
      if (m < 0 || p < 0) fail(Err::BadInput, "additive shorthand needs m= and p=");
      return build_additive_mod_m(m, p);
    }
    if (kind == "product") {
      std::vector<std::vector<ProbVector>> kernels;
      for (auto& [k, v] : split_kv(args)) {
        if (k == "bsc") kernels.push_back(bsc_kernel(std::stod(v)));
        else fail(Err::BadInput, "unknown product component: " + k);
      }
      if (kernels.size() != 2) fail(Err::BadInput, "product shorthand needs exactly two components");
      return build_product(kernels[0], kernels[1]);
    }
    // fall through: a path may legitimately contain ':'
  }
  return load_channel_file(spec, renormalize);
}

}  // namespace macfb
