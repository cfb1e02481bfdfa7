#include <doctest.h>

#include <cmath>

#include "macfb/errors.hpp"
#include "macfb/prob.hpp"
#include "macfb/rng.hpp"

using namespace macfb;

TEST_CASE("entropy basics") {
  CHECK(entropy({0.5, 0.5}) == doctest::Approx(1.0));
  CHECK(entropy({0.8, 0.1, 0.1}) == doctest::Approx(0.9219280948873623).epsilon(1e-12));
  CHECK(entropy({1.0, 0.0, 0.0}) == 0.0);
  CHECK(entropy({0.5, 0.5}, LogBase::Natural) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("kl basics and conventions") {
  CHECK(kl({0.5, 0.5}, {0.5, 0.5}) == 0.0);
  // Example-1 divergence at p = 0.1, base 2
  CHECK(kl({0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}) == doctest::Approx(2.1).epsilon(1e-12));
  CHECK(std::isinf(kl({1.0, 0.0}, {0.0, 1.0})));
  CHECK(kl({0.0, 1.0}, {0.5, 0.5}) == doctest::Approx(1.0));  // 0 log 0 = 0
  CHECK_THROWS_AS(kl({0.5, 0.5}, {1.0}), Error);
}

TEST_CASE("kl nonnegativity with equality iff equal") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    int k = 2 + static_cast<int>(rng.next_unit() * 3);
    ProbVector p(k), q(k);
    double sp = 0, sq = 0;
    for (int i = 0; i < k; ++i) {
      p[i] = 0.01 + rng.next_unit();
      q[i] = 0.01 + rng.next_unit();
      sp += p[i];
      sq += q[i];
    }
    for (int i = 0; i < k; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    double d = kl(p, q);
    CHECK(d >= 0.0);
    bool same = true;
    for (int i = 0; i < k; ++i) same = same && std::fabs(p[i] - q[i]) < 1e-12;
    if (d < 1e-12) {
      // numerically-zero divergence only for (near-)identical vectors
      for (int i = 0; i < k; ++i) CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-4));
    }
    if (same) CHECK(d <= 1e-12);
  }
}

TEST_CASE("binary entropy inverse") {
  CHECK(binary_entropy_inv(0.5) == doctest::Approx(0.110027).epsilon(1e-4));
  CHECK(binary_entropy(binary_entropy_inv(0.3)) == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(binary_entropy_inv(0.0) == 0.0);
  CHECK(binary_entropy_inv(1.0) == 0.5);
}

TEST_CASE("prob vector validation") {
  CHECK_NOTHROW(validate_prob_vector({0.25, 0.75}));
  CHECK_THROWS_AS(validate_prob_vector({0.5, 0.4}), Error);
  CHECK_THROWS_AS(validate_prob_vector({1.2, -0.2}), Error);
}
