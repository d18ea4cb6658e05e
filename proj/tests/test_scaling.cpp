#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "paircorr/scaling.hpp"

using namespace paircorr;

TEST_CASE("expression grammar") {
  auto e = Expression::parse("1 + x", 1);
  double x = 0.5;
  CHECK(e.eval(&x) == doctest::Approx(1.5));

  auto poly = Expression::parse("2*x1^2 - x2/4 + (x1 - 1)", 2);
  double p[2] = {0.5, 2.0};
  CHECK(poly.eval(p) == doctest::Approx(2 * 0.25 - 0.5 + (0.5 - 1.0)));

  auto rassoc = Expression::parse("2^3^2", 1);
  CHECK(rassoc.eval(&x) == doctest::Approx(512.0));

  auto neg = Expression::parse("-x + 1", 1);
  CHECK(neg.eval(&x) == doctest::Approx(0.5));

  CHECK_THROWS(Expression::parse("x3", 2));   // coordinate out of range
  CHECK_THROWS(Expression::parse("1 +", 1));  // truncated
  CHECK_THROWS(Expression::parse("(1", 1));   // missing paren
  CHECK_THROWS(Expression::parse("y", 1));    // unknown symbol
  CHECK_THROWS(Expression::parse("1 2", 1));  // trailing input
}

TEST_CASE("normalize_frame leaves Lebesgue probability alone") {
  auto square = EuclideanDomain::unit_box(2);
  auto f = normalize_frame(FrameField::identity(2), square);
  CHECK(f.scalar() == doctest::Approx(1.0).epsilon(1e-9));
  const double x[2] = {0.3, 0.7};
  CHECK(f.density(x) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("normalize_frame on a ball of volume 4") {
  // volume pi r^2 = 4 in d=2
  const double r = std::sqrt(4.0 / std::numbers::pi);
  auto ball = EuclideanDomain::ball({0.0, 0.0}, r);
  auto f = normalize_frame(FrameField::identity(2), ball);
  // MC integral, so the scalar carries ~1e-3 relative noise
  CHECK(f.scalar() == doctest::Approx(std::pow(4.0, -0.5)).epsilon(5e-3));
  const double x[2] = {0.1, 0.0};
  CHECK(f.density(x) == doctest::Approx(0.25).epsilon(1e-2));
}

TEST_CASE("normalize_frame with density 1+x on the interval") {
  auto interval = EuclideanDomain::unit_box(1);
  auto f = normalize_frame(FrameField::conformal(1, "1+x"), interval);
  // integral 3/2, so scalar (3/2)^{-1} and density (2/3)(1+x)
  CHECK(f.scalar() == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  for (double x : {0.0, 0.25, 0.9})
    CHECK(f.density(&x) == doctest::Approx((2.0 / 3.0) * (1.0 + x)).epsilon(1e-9));

  // quadrature oracle for the same integral
  const auto integral = integrate_density(FrameField::conformal(1, "1+x"), interval);
  CHECK(integral.value == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(integral.stderr_ == 0.0);
}

TEST_CASE("normalize_frame is idempotent") {
  auto interval = EuclideanDomain::unit_box(1);
  auto once = normalize_frame(FrameField::conformal(1, "1+x^2"), interval);
  auto twice = normalize_frame(once, interval);
  CHECK(std::abs(twice.scalar() / once.scalar() - 1.0) < 1e-6);
}

TEST_CASE("normalize_frame rejects nonpositive densities") {
  auto interval = EuclideanDomain::unit_box(1);
  CHECK_THROWS(normalize_frame(FrameField::conformal(1, "x - 2"), interval));
}

TEST_CASE("conformal frames scale norms by the density root") {
  auto square = EuclideanDomain::unit_box(2);
  auto f = normalize_frame(FrameField::conformal(2, "1 + x1*x2"), square);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double x[2] = {u(rng), u(rng)};
    const double v[2] = {u(rng) - 0.5, u(rng) - 0.5};
    double out[2];
    f.apply(x, v, out);
    const double expect = std::pow(f.density(x), 0.5) * norm(v, 2);
    CHECK(norm(out, 2) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(f.rescaled_norm(x, v) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("constant frames agree with explicit matrix products") {
  auto f = FrameField::constant(2, {2.0, 1.0, 0.0, 0.5});
  const double v[2] = {1.0, -2.0};
  double out[2];
  f.apply(nullptr, v, out);
  CHECK(out[0] == doctest::Approx(0.0));
  CHECK(out[1] == doctest::Approx(-1.0));
  CHECK(f.density(nullptr) == doctest::Approx(1.0));  // |det| = 1
  CHECK_THROWS(FrameField::constant(2, {1.0, 2.0, 2.0, 4.0}));  // singular
}

TEST_CASE("sigma sampling: uniform density reproduces the uniform stream") {
  auto square = EuclideanDomain::unit_box(2);
  PointSet via_sigma = sigma_sample(FrameField::identity(2), square, 500, 123);
  PointSet direct = sample_uniform(Space{square}, 500, 123);
  CHECK(via_sigma.coords == direct.coords);
  CHECK(sigma_sample(FrameField::identity(2), square, 0, 1).size() == 0);
}

TEST_CASE("sigma sampling matches the first moment of (2/3)(1+x)") {
  auto interval = EuclideanDomain::unit_box(1);
  auto f = normalize_frame(FrameField::conformal(1, "1+x"), interval);
  const std::size_t n = 1000000;
  PointSet pts = sigma_sample(f, interval, n, 2024);
  CompensatedSum sum, sumsq;
  for (std::size_t j = 0; j < n; ++j) {
    sum.add(pts[j][0]);
    sumsq.add(pts[j][0] * pts[j][0]);
  }
  const double mean = sum.value() / n;
  const double var = sumsq.value() / n - mean * mean;
  const double target = 5.0 / 9.0;
  CHECK(std::abs(mean - target) < 4.0 * std::sqrt(var / n));

  // sigma(Omega) check: MC estimate of the normalized mass
  const auto total = integrate_density(f, interval);
  CHECK(std::abs(total.value - 1.0) < 1e-6);
}

TEST_CASE("sigma sampling aborts when acceptance collapses") {
  auto interval = EuclideanDomain::unit_box(1);
  // huge spike at the right edge: acceptance ~ 1/5000
  auto f = FrameField::conformal(1, "1 + 5000*x^10000");
  CHECK_THROWS(sigma_sample(f, interval, 1000, 5));
}

TEST_CASE("scale sequences") {
  ScaleSequence full(1.0, 1.0, true);
  CHECK(full.at(0, 1024) == doctest::Approx(1024.0));
  ScaleSequence half(1.0, 0.5, true);
  CHECK(half.at(0, 10000) == doctest::Approx(100.0));
  ScaleSequence clamped(2.0, 0.9, true);
  CHECK(clamped.at(0, 2) == doctest::Approx(2.0));  // min(2*2^0.9, 2)
  ScaleSequence unclamped(2.0, 0.9, false);
  CHECK(unclamped.at(0, 2) == doctest::Approx(2.0 * std::pow(2.0, 0.9)));
  CHECK_THROWS(ScaleSequence(1.0, 0.0, true));
  CHECK_THROWS(ScaleSequence(1.0, 1.5, true));
  CHECK_THROWS(ScaleSequence(-1.0, 0.5, true));
  auto list = ScaleSequence::explicit_list({10.0, 20.0}, false);
  CHECK(list.at(1, 5) == doctest::Approx(20.0));
  CHECK_THROWS(ScaleSequence::explicit_list({10.0, -1.0}, false));
}
