#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "paircorr/points.hpp"

namespace paircorr {

/// Lebesgue volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
  if (d < 1) throw std::invalid_argument("unit_ball_volume: d >= 1 required");
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

/// omega[0,r] = r^d vol B_1^d, the cumulative pair correlation of a
/// unit-intensity Poisson process.
inline double omega_measure(int d, double r) {
  if (r < 0) throw std::invalid_argument("omega_measure: r >= 0 required");
  return std::pow(r, d) * unit_ball_volume(d);
}

namespace detail {

// Regularized incomplete beta I_x(a,b), continued fraction (Lentz).
inline double beta_cf(double a, double b, double x) {
  constexpr int max_iter = 300;
  constexpr double eps = 3e-15, fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

inline double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lnbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - lnbeta);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

// Volume of a cap of height h of the unit ball in R^d.
inline double unit_ball_cap_volume(int d, double h) {
  if (h <= 0) return 0.0;
  if (h >= 1) return 0.5 * unit_ball_volume(d);
  const double x = h * (2.0 - h);
  return 0.5 * unit_ball_volume(d) *
         regularized_incomplete_beta((d + 1) / 2.0, 0.5, x);
}

}  // namespace detail

/// h(r) = vol((B_1^d + r e) ∩ B_1^d): overlap of two unit balls whose
/// centers are r apart. Continuous, nonincreasing, zero for r >= 2.
inline double ball_overlap(int d, double r) {
  if (r < 0) throw std::invalid_argument("ball_overlap: r >= 0 required");
  if (r >= 2.0) return 0.0;
  if (d == 1) return 2.0 - r;
  if (d == 2) {
    const double half = r / 2.0;
    return 2.0 * std::acos(half) - half * std::sqrt(4.0 - r * r);
  }
  return 2.0 * detail::unit_ball_cap_volume(d, 1.0 - r / 2.0);
}

// ---------------------------------------------------------------------------
// Domain types

/// Bounded Euclidean domain: axis-aligned box or ball. Both have boundary of
/// measure zero and closed-form volumes.
class EuclideanDomain {
 public:
  enum class Shape { box, ball };

  static EuclideanDomain box(std::vector<double> lo, std::vector<double> hi) {
    if (lo.empty() || lo.size() != hi.size())
      throw std::invalid_argument("box: bounds size mismatch");
    for (std::size_t k = 0; k < lo.size(); ++k)
      if (!(lo[k] < hi[k])) throw std::invalid_argument("box: need lo < hi");
    EuclideanDomain d;
    d.shape_ = Shape::box;
    d.dim_ = static_cast<int>(lo.size());
    d.lo_ = std::move(lo);
    d.hi_ = std::move(hi);
    return d;
  }

  static EuclideanDomain unit_box(int dim) {
    return box(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
  }

  static EuclideanDomain ball(std::vector<double> center, double radius) {
    if (center.empty()) throw std::invalid_argument("ball: empty center");
    if (!(radius > 0)) throw std::invalid_argument("ball: radius > 0 required");
    EuclideanDomain d;
    d.shape_ = Shape::ball;
    d.dim_ = static_cast<int>(center.size());
    d.center_ = std::move(center);
    d.radius_ = radius;
    return d;
  }

  Shape shape() const { return shape_; }
  int dim() const { return dim_; }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  const std::vector<double>& center() const { return center_; }
  double radius() const { return radius_; }

  bool contains(const double* x) const {
    if (shape_ == Shape::box) {
      for (int k = 0; k < dim_; ++k)
        if (x[k] < lo_[k] || x[k] > hi_[k]) return false;
      return true;
    }
    return euclidean_distance(x, center_.data(), dim_) <= radius_;
  }

  /// Membership in the epsilon-neighborhood Omega + B_eps.
  bool contains_eps(const double* x, double eps) const {
    if (shape_ == Shape::ball)
      return euclidean_distance(x, center_.data(), dim_) <= radius_ + eps;
    double sq = 0;
    for (int k = 0; k < dim_; ++k) {
      double excess = 0;
      if (x[k] < lo_[k]) excess = lo_[k] - x[k];
      else if (x[k] > hi_[k]) excess = x[k] - hi_[k];
      sq += excess * excess;
    }
    return sq <= eps * eps;
  }

  double volume() const {
    if (shape_ == Shape::box) {
      double v = 1;
      for (int k = 0; k < dim_; ++k) v *= hi_[k] - lo_[k];
      return v;
    }
    return std::pow(radius_, dim_) * unit_ball_volume(dim_);
  }

  void bounding_box(std::vector<double>& lo, std::vector<double>& hi) const {
    lo.resize(dim_);
    hi.resize(dim_);
    if (shape_ == Shape::box) {
      lo = lo_;
      hi = hi_;
    } else {
      for (int k = 0; k < dim_; ++k) {
        lo[k] = center_[k] - radius_;
        hi[k] = center_[k] + radius_;
      }
    }
  }

 private:
  Shape shape_ = Shape::box;
  int dim_ = 1;
  std::vector<double> lo_, hi_;      // box
  std::vector<double> center_;       // ball
  double radius_ = 0;
};

/// Flat torus R^d / L, with L generated by the rows of a unit-covolume
/// basis matrix. Identity basis gives the standard torus R^d/Z^d.
class FlatTorus {
 public:
  FlatTorus(int dim, std::vector<double> basis_row_major)
      : dim_(dim), basis_(std::move(basis_row_major)) {
    if (dim < 1 || basis_.size() != static_cast<std::size_t>(dim * dim))
      throw std::invalid_argument("FlatTorus: basis must be dim x dim");
    const double det = invert(basis_, inv_basis_, dim_);
    if (std::abs(std::abs(det) - 1.0) > 1e-12)
      throw std::invalid_argument("FlatTorus: |det basis| must equal 1");
    identity_ = true;
    for (int r = 0; r < dim_; ++r)
      for (int c = 0; c < dim_; ++c)
        if (basis_[r * dim_ + c] != (r == c ? 1.0 : 0.0)) identity_ = false;
    min_lattice_norm_ = compute_min_lattice_norm();
  }

  static FlatTorus standard(int dim) {
    std::vector<double> id(dim * dim, 0.0);
    for (int k = 0; k < dim; ++k) id[k * dim + k] = 1.0;
    return FlatTorus(dim, std::move(id));
  }

  int dim() const { return dim_; }
  bool is_identity_basis() const { return identity_; }
  const std::vector<double>& basis() const { return basis_; }
  double min_lattice_norm() const { return min_lattice_norm_; }

  /// x = f B (row-vector convention); fractional coordinates of x.
  void to_fractional(const double* x, double* f) const {
    if (identity_) {
      std::copy(x, x + dim_, f);
      return;
    }
    for (int c = 0; c < dim_; ++c) {
      double s = 0;
      for (int r = 0; r < dim_; ++r) s += x[r] * inv_basis_[r * dim_ + c];
      f[c] = s;
    }
  }

  void from_fractional(const double* f, double* x) const {
    if (identity_) {
      std::copy(f, f + dim_, x);
      return;
    }
    for (int c = 0; c < dim_; ++c) {
      double s = 0;
      for (int r = 0; r < dim_; ++r) s += f[r] * basis_[r * dim_ + c];
      x[c] = s;
    }
  }

  /// Reduce x into the fundamental domain {f B : f in [0,1)^d}.
  void reduce(double* x) const {
    std::array<double, 8> f{};
    to_fractional(x, f.data());
    for (int k = 0; k < dim_; ++k) f[k] -= std::floor(f[k]);
    from_fractional(f.data(), x);
  }

  /// Minimum-image distance dist_g(x,y) = min_{m in L} ||x - y + m||.
  double distance(const double* x, const double* y) const {
    std::array<double, 8> g{};
    for (int k = 0; k < dim_; ++k) g[k] = x[k] - y[k];
    to_fractional(g.data(), g.data());
    for (int k = 0; k < dim_; ++k) g[k] -= std::round(g[k]);
    if (identity_) {
      double s = 0;
      for (int k = 0; k < dim_; ++k) s += g[k] * g[k];
      return std::sqrt(s);
    }
    return min_image_norm_fractional(g.data());
  }

  /// Exact minimum over lattice shifts of ||v|| where v = (g + k) B and g is
  /// already reduced to [-1/2, 1/2)^d in fractional coordinates.
  double min_image_norm_fractional(const double* g) const {
    const int K = shift_range();
    double best = std::numeric_limits<double>::infinity();
    std::array<int, 8> k{};
    std::array<double, 8> f{}, v{};
    k.fill(-K);
    while (true) {
      for (int i = 0; i < dim_; ++i) f[i] = g[i] + k[i];
      from_fractional(f.data(), v.data());
      best = std::min(best, norm(v.data(), dim_));
      int i = 0;
      for (; i < dim_; ++i) {
        if (++k[i] <= K) break;
        k[i] = -K;
      }
      if (i == dim_) break;
    }
    return best;
  }

  /// Column 2-norms of the inverse basis; converts a Euclidean cutoff into
  /// per-coordinate fractional cutoffs.
  std::vector<double> inv_basis_column_norms() const {
    std::vector<double> out(dim_, 1.0);
    if (identity_) return out;
    for (int c = 0; c < dim_; ++c) {
      double s = 0;
      for (int r = 0; r < dim_; ++r) {
        const double t = inv_basis_[r * dim_ + c];
        s += t * t;
      }
      out[c] = std::sqrt(s);
    }
    return out;
  }

  /// Diameter of the fundamental parallelepiped.
  double fundamental_diameter() const {
    std::array<double, 8> f{}, v{};
    double best = 0;
    // longest diagonal over sign choices of the basis rows
    for (int mask = 0; mask < (1 << dim_); ++mask) {
      for (int k = 0; k < dim_; ++k) f[k] = (mask >> k) & 1 ? 1.0 : -1.0;
      from_fractional(f.data(), v.data());
      best = std::max(best, norm(v.data(), dim_));
    }
    return best;
  }

 private:
  int shift_range() const { return identity_ ? 1 : 2; }

  double compute_min_lattice_norm() const {
    double best = std::numeric_limits<double>::infinity();
    std::array<int, 8> k{};
    std::array<double, 8> f{}, v{};
    k.fill(-2);
    while (true) {
      bool zero = true;
      for (int i = 0; i < dim_; ++i)
        if (k[i] != 0) zero = false;
      if (!zero) {
        for (int i = 0; i < dim_; ++i) f[i] = k[i];
        from_fractional(f.data(), v.data());
        best = std::min(best, norm(v.data(), dim_));
      }
      int i = 0;
      for (; i < dim_; ++i) {
        if (++k[i] <= 2) break;
        k[i] = -2;
      }
      if (i == dim_) break;
    }
    return best;
  }

  // Gaussian elimination with partial pivoting; returns determinant.
  static double invert(const std::vector<double>& a_in, std::vector<double>& inv,
                       int n) {
    std::vector<double> a = a_in;
    inv.assign(n * n, 0.0);
    for (int k = 0; k < n; ++k) inv[k * n + k] = 1.0;
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
      int piv = col;
      for (int r = col + 1; r < n; ++r)
        if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
      if (a[piv * n + col] == 0.0)
        throw std::invalid_argument("FlatTorus: singular basis");
      if (piv != col) {
        for (int c = 0; c < n; ++c) {
          std::swap(a[piv * n + c], a[col * n + c]);
          std::swap(inv[piv * n + c], inv[col * n + c]);
        }
        det = -det;
      }
      const double p = a[col * n + col];
      det *= p;
      for (int c = 0; c < n; ++c) {
        a[col * n + c] /= p;
        inv[col * n + c] /= p;
      }
      for (int r = 0; r < n; ++r) {
        if (r == col) continue;
        const double m = a[r * n + col];
        if (m == 0.0) continue;
        for (int c = 0; c < n; ++c) {
          a[r * n + c] -= m * a[col * n + c];
          inv[r * n + c] -= m * inv[col * n + c];
        }
      }
    }
    return det;
  }

  int dim_;
  std::vector<double> basis_, inv_basis_;
  bool identity_ = false;
  double min_lattice_norm_ = 1.0;
};

/// Round sphere S^d embedded in R^{d+1}, radius chosen so the Riemannian
/// volume equals 1.
class UnitAreaSphere {
 public:
  explicit UnitAreaSphere(int intrinsic_dim) : dim_(intrinsic_dim) {
    if (intrinsic_dim < 1)
      throw std::invalid_argument("UnitAreaSphere: dim >= 1 required");
    // surface area of a radius-R sphere S^d: (d+1) vol(B_1^{d+1}) R^d = 1
    radius_ = std::pow((dim_ + 1) * unit_ball_volume(dim_ + 1), -1.0 / dim_);
  }

  int intrinsic_dim() const { return dim_; }
  int ambient_dim() const { return dim_ + 1; }
  double radius() const { return radius_; }
  double max_geodesic() const { return std::numbers::pi * radius_; }

  /// R arccos(<x,y>/R^2), argument clamped to absorb rounding.
  double geodesic(const double* x, const double* y) const {
    const int n = ambient_dim();
    const double nx = norm(x, n), ny = norm(y, n);
    if (nx == 0.0 || ny == 0.0)
      throw std::domain_error("UnitAreaSphere: zero vector has no direction");
    const double c = std::clamp(dot(x, y, n) / (nx * ny), -1.0, 1.0);
    return radius_ * std::acos(c);
  }

  /// Chord length in the embedding corresponding to geodesic distance g.
  double chord_of_geodesic(double g) const {
    const double t = std::min(g, max_geodesic());
    return 2.0 * radius_ * std::sin(t / (2.0 * radius_));
  }

  /// Normalized volume (area fraction) of a geodesic cap of radius t.
  double cap_measure(double t) const {
    if (dim_ != 2)
      throw std::invalid_argument("cap_measure: implemented for S^2 only");
    const double a = std::clamp(t / radius_, 0.0, std::numbers::pi);
    return 0.5 * (1.0 - std::cos(a));
  }

 private:
  int dim_;
  double radius_;
};

using Space = std::variant<EuclideanDomain, FlatTorus, UnitAreaSphere>;

inline int space_dim(const Space& s) {
  if (const auto* e = std::get_if<EuclideanDomain>(&s)) return e->dim();
  if (const auto* t = std::get_if<FlatTorus>(&s)) return t->dim();
  return std::get<UnitAreaSphere>(s).intrinsic_dim();
}

/// Dimension of the coordinate representation (sphere points are embedded).
inline int space_ambient_dim(const Space& s) {
  if (const auto* sp = std::get_if<UnitAreaSphere>(&s)) return sp->ambient_dim();
  return space_dim(s);
}

/// Convenience wrapper for torus_distance / sphere_geodesic naming used in
/// the docs; dispatches on the space.
inline double torus_distance(const FlatTorus& t, const double* x,
                             const double* y) {
  return t.distance(x, y);
}

inline double sphere_geodesic(const UnitAreaSphere& s, const double* x,
                              const double* y) {
  return s.geodesic(x, y);
}

// ---------------------------------------------------------------------------
// Test sets D

/// Bounded test set D in R^d with vol(∂D) = 0: origin-centered ball scaled
/// by r, or an axis-aligned box.
class ShapeD {
 public:
  enum class Kind { ball, box };

  static ShapeD ball(int dim, double radius) {
    if (!(radius >= 0)) throw std::invalid_argument("ShapeD: radius >= 0");
    ShapeD d;
    d.kind_ = Kind::ball;
    d.dim_ = dim;
    d.radius_ = radius;
    return d;
  }

  static ShapeD box(std::vector<double> lo, std::vector<double> hi) {
    if (lo.empty() || lo.size() != hi.size())
      throw std::invalid_argument("ShapeD: bounds size mismatch");
    for (std::size_t k = 0; k < lo.size(); ++k)
      if (!(lo[k] <= hi[k])) throw std::invalid_argument("ShapeD: lo <= hi");
    ShapeD d;
    d.kind_ = Kind::box;
    d.dim_ = static_cast<int>(lo.size());
    d.lo_ = std::move(lo);
    d.hi_ = std::move(hi);
    return d;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double radius() const { return radius_; }

  bool contains(const double* x) const {
    if (kind_ == Kind::ball) return norm(x, dim_) < radius_;
    for (int k = 0; k < dim_; ++k)
      if (x[k] < lo_[k] || x[k] > hi_[k]) return false;
    return true;
  }

  double volume() const {
    if (kind_ == Kind::ball)
      return std::pow(radius_, dim_) * unit_ball_volume(dim_);
    double v = 1;
    for (int k = 0; k < dim_; ++k) v *= hi_[k] - lo_[k];
    return v;
  }

  /// max ||x|| over D.
  double support_radius() const {
    if (kind_ == Kind::ball) return radius_;
    double s = 0;
    for (int k = 0; k < dim_; ++k)
      s += std::max(lo_[k] * lo_[k], hi_[k] * hi_[k]);
    return std::sqrt(s);
  }

 private:
  Kind kind_ = Kind::ball;
  int dim_ = 1;
  double radius_ = 1.0;
  std::vector<double> lo_, hi_;
};

// ---------------------------------------------------------------------------
// Uniform samplers (deterministic given seed)

inline PointSet sample_uniform_box(const std::vector<double>& lo,
                                   const std::vector<double>& hi,
                                   std::size_t n, std::uint64_t seed) {
  const int d = static_cast<int>(lo.size());
  PointSet out(d);
  out.reserve(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(d);
  for (std::size_t j = 0; j < n; ++j) {
    for (int k = 0; k < d; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * u(rng);
    out.push_back(x.data());
  }
  return out;
}

inline PointSet sample_uniform(const Space& space, std::size_t n,
                               std::uint64_t seed) {
  if (const auto* e = std::get_if<EuclideanDomain>(&space)) {
    const int d = e->dim();
    if (e->shape() == EuclideanDomain::Shape::box)
      return sample_uniform_box(e->lo(), e->hi(), n, seed);
    // ball: rejection from the bounding box
    PointSet out(d);
    out.reserve(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(d);
    while (out.size() < n) {
      double sq = 0;
      for (int k = 0; k < d; ++k) {
        x[k] = u(rng);
        sq += x[k] * x[k];
      }
      if (sq > 1.0) continue;
      for (int k = 0; k < d; ++k)
        x[k] = e->center()[k] + e->radius() * x[k];
      out.push_back(x.data());
    }
    return out;
  }
  if (const auto* t = std::get_if<FlatTorus>(&space)) {
    const int d = t->dim();
    PointSet frac = sample_uniform_box(std::vector<double>(d, 0.0),
                                       std::vector<double>(d, 1.0), n, seed);
    if (t->is_identity_basis()) return frac;
    PointSet out(d);
    out.reserve(n);
    std::vector<double> x(d);
    for (std::size_t j = 0; j < n; ++j) {
      t->from_fractional(frac[j], x.data());
      out.push_back(x.data());
    }
    return out;
  }
  const auto& s = std::get<UnitAreaSphere>(space);
  const int n_amb = s.ambient_dim();
  PointSet out(n_amb);
  out.reserve(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n_amb);
  while (out.size() < n) {
    double sq = 0;
    for (int k = 0; k < n_amb; ++k) {
      x[k] = g(rng);
      sq += x[k] * x[k];
    }
    if (sq == 0.0) continue;
    const double scale = s.radius() / std::sqrt(sq);
    for (int k = 0; k < n_amb; ++k) x[k] *= scale;
    out.push_back(x.data());
  }
  return out;
}

}  // namespace paircorr
