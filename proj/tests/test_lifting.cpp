#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <initializer_list>
#include <vector>

#include "gestalt/gabor.hpp"

using namespace gestalt;

namespace {

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double l1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

/// Anti-aliased bar of the given half-width through the image center.
Image bar_image(int size, double angle, double half_width = 1.5) {
  Image img(size, size);
  const double cx = (size - 1) / 2.0, cy = (size - 1) / 2.0;
  const double nx = -std::sin(angle), ny = std::cos(angle);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double d = std::fabs((x - cx) * nx + (y - cy) * ny);
      img.at(x, y) = std::clamp(half_width + 0.5 - d, 0.0, 1.0);
    }
  return img;
}

/// Independent filter-response oracle: direct correlation of one bank
/// orientation at one pixel.
double oracle_response(const Image& img, const FilterBank& bank, int k, int x,
                       int y) {
  const int r = bank.radius();
  double acc = 0.0;
  for (int v = -r; v <= r; ++v)
    for (int u = -r; u <= r; ++u)
      acc += bank.tap(bank.rotated[k], u, v) * img.at(x + u, y + v);
  return acc;
}

}  // namespace

TEST_CASE("bank profiles have zero mean and matched norms") {
  const auto bank = make_odd_gabor_bank();
  const double mother_norm = l2(bank.mother);
  for (int k = 0; k < bank.orientations; ++k) {
    double mean = 0.0;
    for (double t : bank.rotated[k]) mean += t;
    CHECK(std::fabs(mean) <= 1e-10 * l1(bank.rotated[k]));
    CHECK(std::fabs(l2(bank.rotated[k]) - mother_norm) <= 1e-6 * mother_norm);
  }
  CHECK_THROWS_AS(make_odd_gabor_bank(3), std::invalid_argument);
  CHECK_THROWS_AS(make_odd_gabor_bank(8, 7.0, 2.5, 20), std::invalid_argument);
}

TEST_CASE("gabor_at: identity action returns the mother profile") {
  const auto bank = make_odd_gabor_bank();
  const auto taps = gabor_at(CorticalPoint(0, 0, 0), bank);
  REQUIRE(taps.size() == bank.mother.size());
  bool identical = true;
  for (std::size_t i = 0; i < taps.size(); ++i)
    identical = identical && taps[i] == bank.mother[i];
  CHECK(identical);
}

TEST_CASE("gabor_at: pi rotation flips the sign of an odd profile") {
  const auto bank = make_odd_gabor_bank();
  const auto taps = gabor_at(CorticalPoint(0, 0, kPi), bank);
  const double scale = l2(bank.mother);
  double worst = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i)
    worst = std::max(worst, std::fabs(taps[i] + bank.mother[i]));
  CHECK(worst < 1e-10 * scale);
}

TEST_CASE("gabor_at preserves the L2 norm across rotations") {
  const auto bank = make_odd_gabor_bank();
  const double mother_norm = l2(bank.mother);
  for (double theta : {0.3, 0.7, 1.1, 2.0, 2.9, 4.4}) {
    const auto taps = gabor_at(CorticalPoint(0, 0, theta), bank);
    CHECK(std::fabs(l2(taps) - mother_norm) <= 1e-6 * mother_norm);
  }
}

TEST_CASE("tap-array rotation round trip") {
  // Resampling error scales as (px/wavelength)^4; a profile sampled at 24 px
  // per cycle round-trips within 1e-3, the default 8 px bank within 2.5e-2.
  const auto smooth_bank = make_odd_gabor_bank(8, 24.0, 7.2, 53);
  for (double theta : {0.4, 1.0, 2.2}) {
    const auto once = rotate_taps(smooth_bank.mother, smooth_bank.support, theta);
    const auto back = rotate_taps(once, smooth_bank.support, -theta);
    double err = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i)
      err += (back[i] - smooth_bank.mother[i]) * (back[i] - smooth_bank.mother[i]);
    CHECK(std::sqrt(err) <= 1e-3 * l2(smooth_bank.mother));
  }

  const auto bank = make_odd_gabor_bank();
  for (double theta : {0.4, 1.0, 2.2}) {
    const auto once = rotate_taps(bank.mother, bank.support, theta);
    const auto back = rotate_taps(once, bank.support, -theta);
    double err = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i)
      err += (back[i] - bank.mother[i]) * (back[i] - bank.mother[i]);
    CHECK(std::sqrt(err) <= 2.5e-2 * l2(bank.mother));
  }
}

TEST_CASE("lifting a horizontal step edge finds orientation zero") {
  const auto bank = make_odd_gabor_bank();
  Image img(64, 64);
  for (int y = 32; y < 64; ++y)
    for (int x = 0; x < 64; ++x) img.at(x, y) = 1.0;

  LiftOptions opt;
  opt.nms_radius = 0;
  const auto lifted = lift_image(img, bank, 2.0, 1.0, opt);
  REQUIRE(lifted.size() > 0);
  for (const auto& e : lifted.elements)
    CHECK(angle_distance(e.theta, 0.0, AngleMode::HalfCircle) < 1e-12);

  // brute-force argmax oracle at a pixel on the edge
  const int px = 32, py = 32;
  int best_k = -1;
  double best = 0.0;
  for (int k = 0; k < bank.orientations; ++k) {
    const double r = std::fabs(oracle_response(img, bank, k, px, py));
    if (r > best) {
      best = r;
      best_k = k;
    }
  }
  CHECK(best_k == 0);
}

TEST_CASE("lifting is equivariant under image rotation by bank angles") {
  const auto bank = make_odd_gabor_bank();  // K = 8 over pi
  const int size = 96;
  for (int step = 0; step < 4; ++step) {
    const double phi = step * kTwoPi / bank.orientations;  // multiples of 2pi/K
    const auto img = bar_image(size, phi);
    LiftOptions opt;
    opt.nms_radius = 2;
    const auto lifted = lift_image(img, bank, 1.0, 1.0, opt);
    REQUIRE(lifted.size() > 0);

    const double cx = (size - 1) / 2.0, cy = (size - 1) / 2.0;
    const double nx = -std::sin(phi), ny = std::cos(phi);
    for (const auto& e : lifted.elements) {
      CHECK(angle_distance(e.theta, phi, AngleMode::HalfCircle) < 1e-12);
      CHECK(std::fabs((e.x - cx) * nx + (e.y - cy) * ny) <= 2.5);
    }
  }
}

TEST_CASE("degenerate lifts") {
  const auto bank = make_odd_gabor_bank();

  SECTION("constant image lifts to nothing") {
    Image img(48, 48, 0.6);
    CHECK(lift_image(img, bank, 1e-6, 1.0).size() == 0);
  }

  SECTION("threshold above the peak response lifts to nothing") {
    const auto img = bar_image(64, 0.0);
    double peak = 0.0;
    for (int y = bank.radius(); y < 64 - bank.radius(); ++y)
      for (int x = bank.radius(); x < 64 - bank.radius(); ++x)
        for (int k = 0; k < bank.orientations; ++k)
          peak = std::max(peak, std::fabs(oracle_response(img, bank, k, x, y)));
    CHECK(lift_image(img, bank, peak * 1.01, 1.0).size() == 0);
  }

  SECTION("tiny images lift to nothing") {
    Image img(8, 8, 1.0);
    CHECK(lift_image(img, bank, 0.5, 1.0).size() == 0);
  }
}

TEST_CASE("raising the threshold never adds elements") {
  const auto bank = make_odd_gabor_bank();
  const auto img = bar_image(64, 0.5);
  std::size_t prev = static_cast<std::size_t>(-1);
  for (double t : {0.2, 0.5, 1.0, 2.0, 4.0}) {
    const auto lifted = lift_image(img, bank, t, 1.0);
    CHECK(lifted.size() <= prev);
    prev = lifted.size();
  }
}

TEST_CASE("full-circle mode resolves contrast polarity") {
  const auto bank = make_odd_gabor_bank();
  Image img(64, 64);
  for (int y = 32; y < 64; ++y)
    for (int x = 0; x < 64; ++x) img.at(x, y) = 1.0;

  LiftOptions full;
  full.angle_mode = AngleMode::FullCircle;
  full.nms_radius = 0;
  const auto lifted = lift_image(img, bank, 2.0, 1.0, full);
  REQUIRE(lifted.size() > 0);
  // opposite-contrast edge flips every lifted direction by pi
  Image inv(64, 64);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 64; ++x) inv.at(x, y) = 1.0;
  const auto lifted_inv = lift_image(inv, bank, 2.0, 1.0, full);
  REQUIRE(lifted_inv.size() == lifted.size());
  for (std::size_t i = 0; i < lifted.size(); ++i) {
    CHECK(angle_distance(lifted.elements[i].theta,
                         lifted_inv.elements[i].theta + kPi,
                         AngleMode::FullCircle) < 1e-12);
  }
}
