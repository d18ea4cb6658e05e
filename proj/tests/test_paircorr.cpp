#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "paircorr/arrays.hpp"
#include "paircorr/paircorr.hpp"

using namespace paircorr;

namespace {

PointSet from_values(int dim, std::initializer_list<double> flat) {
  PointSet p(dim);
  p.coords.assign(flat);
  return p;
}

}  // namespace

TEST_CASE("two points on the interval") {
  PointSet pts = from_values(1, {0.0, 0.5});
  auto f = TestFunction::indicator(ShapeD::box({-1.5}, {1.5}));
  // rescaled displacement 2^{1} * (+-0.5) = +-1, both ordered pairs inside
  CHECK(pc_euclidean(pts, FrameField::identity(1), 2.0, f) ==
        doctest::Approx(1.0));
  CHECK(pc_euclidean_brute(pts, FrameField::identity(1), 2.0, f) ==
        doctest::Approx(1.0));
}

TEST_CASE("degenerate rows give zero") {
  PointSet one = from_values(1, {0.5});
  auto f = TestFunction::indicator(ShapeD::ball(1, 1.0));
  CHECK(pc_euclidean(one, FrameField::identity(1), 2.0, f) == 0.0);
  auto curve = pc_distance_curve(one, FrameField::identity(1), 2.0, {1.0});
  CHECK(curve.values[0] == 0.0);
  CHECK(curve.pair_counts[0] == 0);
}

TEST_CASE("grid row distance curve on the interval") {
  auto arr = TriangularArray(Space{EuclideanDomain::unit_box(1)},
                             RowSchedule({8}), ArrayFamily::grid());
  PointSet pts = arr.row(0);
  auto curve = pc_distance_curve(pts, FrameField::identity(1), 8.0, {1.5});
  // 14 ordered pairs with |j1-j2| = 1, so (8/64)*14
  CHECK(curve.pair_counts[0] == 14);
  CHECK(curve.values[0] == doctest::Approx(1.75));
}

TEST_CASE("torus wrap: two nearly coincident points modulo 1") {
  PointSet pts = from_values(1, {0.0, 0.9});
  FlatTorus t = FlatTorus::standard(1);
  auto curve = pc_torus_curve(pts, t, 2.0, {0.3});
  // wrapped distance 0.1, rescaled 0.2
  CHECK(curve.pair_counts[0] == 2);
  CHECK(curve.values[0] == doctest::Approx(1.0));
}

TEST_CASE("grid on the circle counts 2 floor(r) exactly") {
  const std::int64_t n = 16;
  auto arr = TriangularArray(Space{FlatTorus::standard(1)}, RowSchedule({n}),
                             ArrayFamily::grid());
  PointSet pts = arr.row(0);
  auto radii = default_radii(5.0, 20);  // bin edges 0.25, 0.5, ..., 5
  auto curve =
      pc_torus_curve(pts, FlatTorus::standard(1), static_cast<double>(n), radii);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double expect = 2.0 * std::floor(radii[k]);
    CHECK(curve.values[k] == expect);  // exact: integer count * 16/256
    // per-difference-class count before wrap symmetrization: 2(n - j)
    // ordered pairs at class j, but both images coincide on the circle
    CHECK(curve.pair_counts[k] ==
          static_cast<std::int64_t>(expect * static_cast<double>(n)));
  }
}

TEST_CASE("curves are nonnegative, nondecreasing, and exactly rational") {
  PointSet pts = sample_uniform(Space{EuclideanDomain::unit_box(2)}, 700, 50);
  auto curve = pc_distance_curve(pts, FrameField::identity(2), 300.0,
                                 default_radii(3.0, 60));
  double prev = 0.0;
  for (std::size_t k = 0; k < curve.values.size(); ++k) {
    CHECK(curve.values[k] >= prev);
    prev = curve.values[k];
    CHECK(curve.values[k] ==
          300.0 / (700.0 * 700.0) * static_cast<double>(curve.pair_counts[k]));
    CHECK(curve.pair_counts[k] % 2 == 0);  // constant frame: ordered pairs
  }
}

TEST_CASE("cell list and brute force agree on every space") {
  const auto radii = default_radii(2.0, 40);
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> npick(100, 600);
  std::uniform_real_distribution<double> mpick(1.0, 400.0);
  std::vector<Space> spaces = {
      Space{EuclideanDomain::unit_box(1)}, Space{EuclideanDomain::unit_box(2)},
      Space{FlatTorus::standard(1)},       Space{FlatTorus::standard(2)},
      Space{FlatTorus(2, {1.0, 0.0, 0.5, 1.0})}, Space{UnitAreaSphere(2)}};
  for (int rep = 0; rep < 4; ++rep)
    for (const Space& space : spaces) {
      const int n = npick(rng);
      const double m = mpick(rng);
      PointSet pts = sample_uniform(space, n, rng());
      FrameField frame = FrameField::identity(space_dim(space));
      auto fast = pc_curve(pts, space, frame, m, radii);
      auto slow = pc_brute_force(pts, space, frame, m, radii);
      CHECK(fast.pair_counts == slow.pair_counts);
    }
}

TEST_CASE("torus lattice-sum fallback agrees with the direct sum") {
  FlatTorus t = FlatTorus::standard(2);
  PointSet pts = sample_uniform(Space{t}, 80, 9);
  // cutoff 2.0 / 1 exceeds half the injectivity scale: lattice-sum path
  auto radii = default_radii(2.0, 10);
  auto fast = pc_torus_curve(pts, t, 1.0, radii);
  auto slow = pc_brute_force(pts, Space{t}, FrameField::identity(2), 1.0, radii);
  CHECK(fast.pair_counts == slow.pair_counts);
  // lattice translates make values exceed the single-image count
  CHECK(fast.pair_counts.back() > 80 * 79);
}

TEST_CASE("conformal frames agree between engines too") {
  auto square = EuclideanDomain::unit_box(2);
  auto frame = normalize_frame(FrameField::conformal(2, "1 + x1"), square);
  PointSet pts = sample_uniform(Space{square}, 400, 77);
  auto radii = default_radii(2.0, 40);
  auto fast = pc_distance_curve(pts, frame, 150.0, radii);
  auto slow = pc_brute_force(pts, Space{square}, frame, 150.0, radii);
  CHECK(fast.pair_counts == slow.pair_counts);
}

TEST_CASE("rotating a constant frame never changes the curve") {
  const double a = 0.7;  // rotation angle
  auto q = FrameField::constant(
      2, {std::cos(a), -std::sin(a), std::sin(a), std::cos(a)});
  PointSet pts = sample_uniform(Space{EuclideanDomain::unit_box(2)}, 500, 8);
  auto radii = default_radii(2.5, 50);
  auto plain = pc_distance_curve(pts, FrameField::identity(2), 200.0, radii);
  auto rotated = pc_distance_curve(pts, q, 200.0, radii);
  CHECK(plain.pair_counts == rotated.pair_counts);
}

TEST_CASE("smooth test functions match the brute oracle to 1e-12") {
  PointSet pts = sample_uniform(Space{EuclideanDomain::unit_box(2)}, 400, 31);
  auto frame = FrameField::identity(2);
  for (auto f : {TestFunction::hat(2, 1.5), TestFunction::truncated_gaussian(2, 2.0),
                 TestFunction::overlap_profile(2, 0.8)}) {
    const double fast = pc_euclidean(pts, frame, 120.0, f);
    const double slow = pc_euclidean_brute(pts, frame, 120.0, f);
    CHECK(fast > 0.0);
    CHECK(std::abs(fast - slow) <= 1e-12 * std::abs(slow));
  }
}

TEST_CASE("sphere degenerate cases") {
  UnitAreaSphere s(2);
  const double R = s.radius();
  PointSet two = from_values(3, {0, 0, R, 0, 0, -R});
  // antipodal geodesic sqrt(pi)/2; rescaled by 10^3 it clears any grid
  auto curve = pc_sphere_curve(two, s, 1.0e6, default_radii());
  for (double v : curve.values) CHECK(v == 0.0);

  PointSet off = from_values(3, {0, 0, 2 * R, 0, 0, -R});
  CHECK_THROWS(pc_sphere_curve(off, s, 1.0, {1.0}));
}

TEST_CASE("radius grids are validated") {
  PointSet pts = sample_uniform(Space{EuclideanDomain::unit_box(1)}, 10, 1);
  auto frame = FrameField::identity(1);
  CHECK_THROWS(pc_distance_curve(pts, frame, 4.0, {}));
  CHECK_THROWS(pc_distance_curve(pts, frame, 4.0, {1.0, 0.5}));
  CHECK_THROWS(pc_distance_curve(pts, frame, 4.0, {-1.0, 0.5}));
  CHECK_THROWS(default_radii(-1.0));
}

TEST_CASE("test function shapes") {
  auto overlap = TestFunction::overlap_profile(2, 0.5);
  CHECK(overlap.support_radius() == doctest::Approx(1.0));
  // f(0) = vol of the full ball of radius 0.5
  CHECK(overlap.radial(0.0) == doctest::Approx(0.25 * std::numbers::pi));
  CHECK(overlap.radial(1.5) == 0.0);
  auto hat = TestFunction::hat(1, 2.0);
  CHECK(hat.radial(1.0) == doctest::Approx(0.5));
  const double x = -1.0;
  CHECK(hat(&x) == doctest::Approx(0.5));
  CHECK_THROWS(TestFunction::indicator(ShapeD::ball(1, 1.0)).radial(0.5));
}

TEST_CASE("threaded accumulation is independent of worker count") {
  PointSet pts = sample_uniform(Space{FlatTorus::standard(2)}, 6000, 17);
  auto radii = default_radii(2.0, 30);
  auto one = pc_torus_curve(pts, FlatTorus::standard(2), 2000.0, radii, 1);
  auto four = pc_torus_curve(pts, FlatTorus::standard(2), 2000.0, radii, 4);
  CHECK(one.pair_counts == four.pair_counts);
  CHECK(one.values == four.values);
}
