#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gestalt/rng.hpp"

using namespace gestalt;

TEST_CASE("streams are reproducible and distinct") {
  Rng a(123, 5), b(123, 5), c(123, 6), d(124, 5);
  bool same_ab = true, same_ac = false, same_ad = false;
  int equal_ac = 0, equal_ad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto va = a.next_u64();
    same_ab = same_ab && (va == b.next_u64());
    equal_ac += (va == c.next_u64());
    equal_ad += (va == d.next_u64());
  }
  CHECK(same_ab);
  CHECK(equal_ac == 0);
  CHECK(equal_ad == 0);
  (void)same_ac;
  (void)same_ad;
}

TEST_CASE("uniform stays in [0,1) and looks flat") {
  Rng rng(7);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::fabs(sum / 100000 - 0.5) < 0.01);
}

TEST_CASE("gaussian moments") {
  Rng rng(11);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.gaussian();
    s1 += z;
    s2 += z * z;
    s3 += z * z * z;
  }
  CHECK(std::fabs(s1 / n) < 0.01);
  CHECK(std::fabs(s2 / n - 1.0) < 0.02);
  CHECK(std::fabs(s3 / n) < 0.05);
}
