#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "paircorr/cell_list.hpp"
#include "paircorr/geometry.hpp"
#include "paircorr/points.hpp"
#include "paircorr/scaling.hpp"

namespace paircorr {

/// Compactly supported nonnegative test functions on R^d. The indicator
/// kind is discontinuous and used only with sets of measure-zero boundary.
class TestFunction {
 public:
  enum class Kind { indicator, overlap_profile, gaussian, hat };

  static TestFunction indicator(ShapeD d) {
    TestFunction f(Kind::indicator, d.dim());
    f.shape_ = std::move(d);
    return f;
  }

  /// f(x) = r^d h(||x||/r) with h the unit-ball overlap; this is the
  /// autocorrelation vol((D+x) ∩ D) of the ball D of radius r.
  static TestFunction overlap_profile(int dim, double ball_radius = 1.0) {
    if (!(ball_radius > 0))
      throw std::invalid_argument("overlap_profile: radius > 0");
    TestFunction f(Kind::overlap_profile, dim);
    f.r_ = ball_radius;
    return f;
  }

  static TestFunction truncated_gaussian(int dim, double r_cut) {
    if (!(r_cut > 0)) throw std::invalid_argument("gaussian: r_cut > 0");
    TestFunction f(Kind::gaussian, dim);
    f.r_ = r_cut;
    return f;
  }

  /// Triangular bump max(0, 1 - r/r_cut).
  static TestFunction hat(int dim, double r_cut) {
    if (!(r_cut > 0)) throw std::invalid_argument("hat: r_cut > 0");
    TestFunction f(Kind::hat, dim);
    f.r_ = r_cut;
    return f;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_indicator() const { return kind_ == Kind::indicator; }

  double support_radius() const {
    switch (kind_) {
      case Kind::indicator: return shape_.support_radius();
      case Kind::overlap_profile: return 2.0 * r_;
      case Kind::gaussian: return r_;
      case Kind::hat: return r_;
    }
    return 0;
  }

  double operator()(const double* x) const {
    if (kind_ == Kind::indicator) return shape_.contains(x) ? 1.0 : 0.0;
    return radial(norm(x, dim_));
  }

  double radial(double r) const {
    switch (kind_) {
      case Kind::indicator:
        throw std::logic_error("indicator test functions are not radial");
      case Kind::overlap_profile:
        return std::pow(r_, dim_) * ball_overlap(dim_, std::min(r / r_, 2.0));
      case Kind::gaussian:
        return r < r_ ? std::exp(-r * r) : 0.0;
      case Kind::hat:
        return std::max(0.0, 1.0 - r / r_);
    }
    return 0;
  }

 private:
  TestFunction(Kind k, int dim) : kind_(k), dim_(dim) {}

  Kind kind_;
  int dim_;
  ShapeD shape_ = ShapeD::ball(1, 1.0);
  double r_ = 1.0;
};

struct CurveMeta {
  std::int64_t row_index = -1;
  std::int64_t n_points = 0;
  double scale = 0;  // M_i
  std::string space, frame;
};

/// Cumulative distance pair correlation over a radius grid:
/// values[k] = (M/N^2) * pair_counts[k] estimates rho~_i[0, r_k].
struct PairCorrelationCurve {
  std::vector<double> radii;
  std::vector<std::int64_t> pair_counts;  // cumulative ordered-pair counts
  std::vector<double> values;
  std::vector<double> poisson_ref;  // omega[0, r_k]
  CurveMeta meta;

  /// max_k (value - omega), the sub-Poisson excess.
  double sub_poisson_excess() const {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < values.size(); ++k)
      m = std::max(m, values[k] - poisson_ref[k]);
    return m;
  }

  /// max_k |value - omega| and the radius attaining it.
  std::pair<double, double> poisson_excess() const {
    double m = 0, at = radii.empty() ? 0 : radii.front();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double e = std::abs(values[k] - poisson_ref[k]);
      if (e > m) {
        m = e;
        at = radii[k];
      }
    }
    return {m, at};
  }
};

/// Default radius grid: 100 equal bins on (0, 5].
inline std::vector<double> default_radii(double r_max = 5.0, int bins = 100) {
  if (!(r_max > 0) || bins < 1)
    throw std::invalid_argument("default_radii: r_max > 0, bins >= 1");
  std::vector<double> r(bins);
  for (int k = 0; k < bins; ++k) r[k] = r_max * (k + 1) / bins;
  return r;
}

namespace detail {

constexpr std::size_t kNoBin = static_cast<std::size_t>(-1);

inline std::size_t bin_of(const std::vector<double>& radii, double s) {
  if (s > radii.back()) return kNoBin;
  return static_cast<std::size_t>(
      std::lower_bound(radii.begin(), radii.end(), s) - radii.begin());
}

inline void check_radii(const std::vector<double>& radii) {
  if (radii.empty()) throw std::invalid_argument("radii: empty grid");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0)) throw std::invalid_argument("radii: must be positive");
    if (k > 0 && radii[k] <= radii[k - 1])
      throw std::invalid_argument("radii: must be strictly ascending");
  }
}

inline PairCorrelationCurve finish_curve(const std::vector<double>& radii,
                                         std::vector<std::int64_t> bins,
                                         std::size_t n, double m_scale,
                                         int ref_dim) {
  PairCorrelationCurve out;
  out.radii = radii;
  std::int64_t running = 0;
  out.pair_counts.resize(radii.size());
  out.values.resize(radii.size());
  out.poisson_ref.resize(radii.size());
  const double prefactor =
      n > 0 ? m_scale / (static_cast<double>(n) * static_cast<double>(n)) : 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    running += bins[k];
    out.pair_counts[k] = running;
    out.values[k] = prefactor * static_cast<double>(running);
    out.poisson_ref[k] = omega_measure(ref_dim, radii[k]);
  }
  out.meta.n_points = static_cast<std::int64_t>(n);
  out.meta.scale = m_scale;
  return out;
}

inline bool warn_small_row(std::size_t n, const char* what) {
  if (n >= 2) return false;
  std::cerr << "warning: " << what << " on a row with fewer than 2 points\n";
  return true;
}

/// Parallel bin accumulation over a j-range. Each worker owns its own
/// integer bins; merge is integer addition, so the result is independent of
/// the worker count.
template <class PerPoint>
inline std::vector<std::int64_t> accumulate_bins(std::size_t n,
                                                 std::size_t n_bins,
                                                 int threads,
                                                 PerPoint&& per_point) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 4096) {
    std::vector<std::int64_t> bins(n_bins, 0);
    for (std::size_t j = 0; j < n; ++j) per_point(j, bins);
    return bins;
  }
  std::vector<std::vector<std::int64_t>> partial(
      threads, std::vector<std::int64_t>(n_bins, 0));
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk, end = std::min(n, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      for (std::size_t j = begin; j < end; ++j) per_point(j, partial[t]);
    });
  }
  for (auto& th : pool) th.join();
  std::vector<std::int64_t> bins(n_bins, 0);
  for (const auto& p : partial)
    for (std::size_t k = 0; k < n_bins; ++k) bins[k] += p[k];
  return bins;
}

inline void points_bounding_box(const PointSet& pts, std::vector<double>& lo,
                                std::vector<double>& hi) {
  const int d = pts.dim;
  lo.assign(d, std::numeric_limits<double>::infinity());
  hi.assign(d, -std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < pts.size(); ++j)
    for (int k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], pts[j][k]);
      hi[k] = std::max(hi[k], pts[j][k]);
    }
  for (int k = 0; k < d; ++k)
    if (!(hi[k] > lo[k])) hi[k] = lo[k] + 1.0;
}

/// Contribution of the unordered pair {j,k} to the distance-curve bins.
/// Counts both ordered pairs; for a nonconstant frame the two directions
/// are evaluated separately.
inline void euclidean_pair_bins(const PointSet& pts, const FrameField& frame,
                                double m_root, const std::vector<double>& radii,
                                std::size_t j, std::size_t k,
                                std::vector<std::int64_t>& bins) {
  const int d = pts.dim;
  std::array<double, 8> diff{};
  for (int c = 0; c < d; ++c) diff[c] = pts[j][c] - pts[k][c];
  if (frame.is_constant()) {
    const double s = m_root * frame.rescaled_norm(pts[j], diff.data());
    const std::size_t b = bin_of(radii, s);
    if (b != kNoBin) bins[b] += 2;
    return;
  }
  const double s1 = m_root * frame.rescaled_norm(pts[j], diff.data());
  const std::size_t b1 = bin_of(radii, s1);
  if (b1 != kNoBin) ++bins[b1];
  const double s2 = m_root * frame.rescaled_norm(pts[k], diff.data());
  const std::size_t b2 = bin_of(radii, s2);
  if (b2 != kNoBin) ++bins[b2];
}

/// Minimum-image distance between points given in fractional coordinates.
inline double torus_pair_distance_frac(const FlatTorus& torus, const double* fj,
                                       const double* fk) {
  const int d = torus.dim();
  std::array<double, 8> g{};
  for (int c = 0; c < d; ++c) {
    g[c] = fj[c] - fk[c];
    g[c] -= std::round(g[c]);
  }
  if (torus.is_identity_basis()) return norm(g.data(), d);
  return torus.min_image_norm_fractional(g.data());
}

/// Lattice-sum contributions of the unordered pair {j,k}: one bin entry per
/// lattice translate within the radius grid. Used when the cutoff reaches
/// the injectivity scale.
inline void torus_pair_bins_lattice_sum(const FlatTorus& torus,
                                        const double* fj, const double* fk,
                                        double m_root,
                                        const std::vector<double>& radii,
                                        int shift_range,
                                        std::vector<std::int64_t>& bins) {
  const int d = torus.dim();
  std::array<double, 8> g{}, f{}, v{};
  for (int c = 0; c < d; ++c) {
    g[c] = fj[c] - fk[c];
    g[c] -= std::round(g[c]);
  }
  std::array<int, 8> sh{};
  for (int c = 0; c < d; ++c) sh[c] = -shift_range;
  while (true) {
    for (int c = 0; c < d; ++c) f[c] = g[c] + sh[c];
    torus.from_fractional(f.data(), v.data());
    const double s = m_root * norm(v.data(), d);
    const std::size_t b = bin_of(radii, s);
    if (b != kNoBin) bins[b] += 2;
    int c = 0;
    for (; c < d; ++c) {
      if (++sh[c] <= shift_range) break;
      sh[c] = -shift_range;
    }
    if (c == d) break;
  }
}

inline PointSet to_fractional_reduced(const FlatTorus& torus,
                                      const PointSet& pts) {
  const int d = torus.dim();
  PointSet out(d);
  out.reserve(pts.size());
  std::vector<double> f(d);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    torus.to_fractional(pts[j], f.data());
    for (int k = 0; k < d; ++k) f[k] -= std::floor(f[k]);
    out.push_back(f.data());
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Engines

/// Distance pair correlation curve on a Euclidean domain, cell-list
/// accelerated. Identical integer pair counts to pc_brute_force.
inline PairCorrelationCurve pc_distance_curve(const PointSet& pts,
                                              const FrameField& frame,
                                              double m_scale,
                                              const std::vector<double>& radii,
                                              int threads = 1) {
  detail::check_radii(radii);
  const int d = pts.dim;
  const std::size_t n = pts.size();
  if (detail::warn_small_row(n, "pc_distance_curve"))
    return detail::finish_curve(radii, std::vector<std::int64_t>(radii.size(), 0),
                                n, m_scale, d);
  const double m_root = std::pow(m_scale, 1.0 / d);
  const double cutoff =
      radii.back() / m_root * frame.inverse_norm_bound(pts);
  std::vector<double> lo, hi;
  detail::points_bounding_box(pts, lo, hi);
  CellList cells(pts.coords.data(), n, d, lo, hi,
                 std::vector<double>(d, cutoff), false);
  auto per_point = [&](std::size_t j, std::vector<std::int64_t>& bins) {
    cells.query(pts[j], [&](std::size_t k) {
      if (k <= j) return;
      detail::euclidean_pair_bins(pts, frame, m_root, radii, j, k, bins);
    });
  };
  auto bins = detail::accumulate_bins(n, radii.size(), threads, per_point);
  return detail::finish_curve(radii, std::move(bins), n, m_scale, d);
}

/// Distance pair correlation on a flat torus (A = I), with the lattice sum
/// of the periodic definition. Below the injectivity scale this is the
/// minimum-image count via a wrapped cell list; otherwise each lattice
/// translate within range is summed explicitly.
inline PairCorrelationCurve pc_torus_curve(const PointSet& pts,
                                           const FlatTorus& torus,
                                           double m_scale,
                                           const std::vector<double>& radii,
                                           int threads = 1) {
  detail::check_radii(radii);
  const int d = torus.dim();
  if (pts.dim != d) throw std::invalid_argument("pc_torus_curve: dim mismatch");
  const std::size_t n = pts.size();
  if (detail::warn_small_row(n, "pc_torus_curve"))
    return detail::finish_curve(radii, std::vector<std::int64_t>(radii.size(), 0),
                                n, m_scale, d);
  const double m_root = std::pow(m_scale, 1.0 / d);
  const double cutoff = radii.back() / m_root;
  PointSet frac = detail::to_fractional_reduced(torus, pts);
  std::vector<std::int64_t> bins;
  if (cutoff >= 0.5 * torus.min_lattice_norm()) {
    // full lattice sum over all pairs
    const auto cols = torus.inv_basis_column_norms();
    const double maxcol = *std::max_element(cols.begin(), cols.end());
    const int range = static_cast<int>(std::ceil(cutoff * maxcol)) + 1;
    auto per_point = [&](std::size_t j, std::vector<std::int64_t>& b) {
      for (std::size_t k = j + 1; k < n; ++k)
        detail::torus_pair_bins_lattice_sum(torus, frac[j], frac[k], m_root,
                                            radii, range, b);
    };
    bins = detail::accumulate_bins(n, radii.size(), threads, per_point);
  } else {
    const auto cols = torus.inv_basis_column_norms();
    std::vector<double> fcut(d);
    for (int k = 0; k < d; ++k) fcut[k] = std::min(0.5, cutoff * cols[k]);
    CellList cells(frac.coords.data(), n, d, std::vector<double>(d, 0.0),
                   std::vector<double>(d, 1.0), fcut, true);
    auto per_point = [&](std::size_t j, std::vector<std::int64_t>& b) {
      cells.query(frac[j], [&](std::size_t k) {
        if (k <= j) return;
        const double s =
            m_root * detail::torus_pair_distance_frac(torus, frac[j], frac[k]);
        const std::size_t bin = detail::bin_of(radii, s);
        if (bin != detail::kNoBin) b[bin] += 2;
      });
    };
    bins = detail::accumulate_bins(n, radii.size(), threads, per_point);
  }
  return detail::finish_curve(radii, std::move(bins), n, m_scale, d);
}

/// Geodesic pair correlation on the unit-area sphere. Neighbor candidates
/// come from a chord-distance cell list in the embedding.
inline PairCorrelationCurve pc_sphere_curve(const PointSet& pts,
                                            const UnitAreaSphere& sphere,
                                            double m_scale,
                                            const std::vector<double>& radii,
                                            int threads = 1) {
  detail::check_radii(radii);
  const int d = sphere.intrinsic_dim();
  const int amb = sphere.ambient_dim();
  if (pts.dim != amb)
    throw std::invalid_argument("pc_sphere_curve: ambient dim mismatch");
  const std::size_t n = pts.size();
  PointSet normalized(amb);
  normalized.reserve(n);
  std::vector<double> x(amb);
  bool renormalized = false;
  for (std::size_t j = 0; j < n; ++j) {
    const double r = norm(pts[j], amb);
    if (r == 0.0)
      throw std::invalid_argument("pc_sphere_curve: zero vector input");
    if (std::abs(r - sphere.radius()) > 1e-6 * sphere.radius())
      throw std::invalid_argument("pc_sphere_curve: point off the sphere");
    if (std::abs(r - sphere.radius()) > 1e-12 * sphere.radius())
      renormalized = true;
    for (int k = 0; k < amb; ++k) x[k] = pts[j][k] * (sphere.radius() / r);
    normalized.push_back(x.data());
  }
  if (renormalized)
    std::cerr << "warning: pc_sphere_curve normalized near-sphere inputs\n";
  if (detail::warn_small_row(n, "pc_sphere_curve"))
    return detail::finish_curve(radii, std::vector<std::int64_t>(radii.size(), 0),
                                n, m_scale, d);
  const double m_root = std::pow(m_scale, 1.0 / d);
  const double geo_cut = radii.back() / m_root;
  const double chord_cut = sphere.chord_of_geodesic(geo_cut);
  const double R = sphere.radius();
  CellList cells(normalized.coords.data(), n, amb,
                 std::vector<double>(amb, -R), std::vector<double>(amb, R),
                 std::vector<double>(amb, chord_cut), false);
  auto per_point = [&](std::size_t j, std::vector<std::int64_t>& b) {
    cells.query(normalized[j], [&](std::size_t k) {
      if (k <= j) return;
      const double s = m_root * sphere.geodesic(normalized[j], normalized[k]);
      const std::size_t bin = detail::bin_of(radii, s);
      if (bin != detail::kNoBin) b[bin] += 2;
    });
  };
  auto bins = detail::accumulate_bins(n, radii.size(), threads, per_point);
  return detail::finish_curve(radii, std::move(bins), n, m_scale, d);
}

/// rho_i f: pair correlation against a general test function on a Euclidean
/// domain. Indicator kinds accumulate exact integer counts; smooth kinds
/// use compensated summation in fixed j1-major order.
inline double pc_euclidean(const PointSet& pts, const FrameField& frame,
                           double m_scale, const TestFunction& f) {
  const int d = pts.dim;
  const std::size_t n = pts.size();
  if (detail::warn_small_row(n, "pc_euclidean")) return 0.0;
  const double support = f.support_radius();
  if (support <= 0.0) return 0.0;
  const double m_root = std::pow(m_scale, 1.0 / d);
  const double cutoff = support / m_root * frame.inverse_norm_bound(pts);
  std::vector<double> lo, hi;
  detail::points_bounding_box(pts, lo, hi);
  CellList cells(pts.coords.data(), n, d, lo, hi,
                 std::vector<double>(d, cutoff), false);
  const double prefactor =
      m_scale / (static_cast<double>(n) * static_cast<double>(n));
  std::vector<double> disp(d), scaled(d);
  if (f.is_indicator()) {
    std::int64_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      cells.query(pts[j], [&](std::size_t k) {
        if (k == j) return;
        for (int c = 0; c < d; ++c) disp[c] = pts[j][c] - pts[k][c];
        frame.apply(pts[j], disp.data(), scaled.data());
        for (int c = 0; c < d; ++c) scaled[c] *= m_root;
        if (f(scaled.data())) ++count;
      });
    }
    return prefactor * static_cast<double>(count);
  }
  CompensatedSum acc;
  for (std::size_t j = 0; j < n; ++j) {
    cells.query(pts[j], [&](std::size_t k) {
      if (k == j) return;
      for (int c = 0; c < d; ++c) disp[c] = pts[j][c] - pts[k][c];
      frame.apply(pts[j], disp.data(), scaled.data());
      for (int c = 0; c < d; ++c) scaled[c] *= m_root;
      const double v = f(scaled.data());
      if (v != 0.0) acc.add(v);
    });
  }
  return prefactor * acc.value();
}

/// Lattice-summed rho_i f on the torus with a radial test function
/// (pc4-TT): sum over ordered pairs and all lattice translates within the
/// support.
inline double pc_torus_radial_sum(const PointSet& pts, const FlatTorus& torus,
                                  double m_scale, const TestFunction& f) {
  const int d = torus.dim();
  const std::size_t n = pts.size();
  if (detail::warn_small_row(n, "pc_torus_radial_sum")) return 0.0;
  const double m_root = std::pow(m_scale, 1.0 / d);
  const double cutoff = f.support_radius() / m_root;
  const auto cols = torus.inv_basis_column_norms();
  const double maxcol = *std::max_element(cols.begin(), cols.end());
  const int range = static_cast<int>(std::ceil(cutoff * maxcol)) + 1;
  PointSet frac = detail::to_fractional_reduced(torus, pts);
  CompensatedSum acc;
  std::array<double, 8> g{}, h{}, v{};
  std::array<int, 8> sh{};
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      for (int c = 0; c < d; ++c) {
        g[c] = frac[j][c] - frac[k][c];
        g[c] -= std::round(g[c]);
      }
      for (int c = 0; c < d; ++c) sh[c] = -range;
      while (true) {
        for (int c = 0; c < d; ++c) h[c] = g[c] + sh[c];
        torus.from_fractional(h.data(), v.data());
        const double val = f.radial(m_root * norm(v.data(), d));
        if (val != 0.0) acc.add(2.0 * val);  // both ordered pairs
        int c = 0;
        for (; c < d; ++c) {
          if (++sh[c] <= range) break;
          sh[c] = -range;
        }
        if (c == d) break;
      }
    }
  }
  return m_scale / (static_cast<double>(n) * static_cast<double>(n)) *
         acc.value();
}

/// Reference engine: direct double loop over all pairs, same per-pair
/// arithmetic as the accelerated engines, so integer pair counts agree
/// exactly.
inline PairCorrelationCurve pc_brute_force(const PointSet& pts,
                                           const Space& space,
                                           const FrameField& frame,
                                           double m_scale,
                                           const std::vector<double>& radii) {
  detail::check_radii(radii);
  const std::size_t n = pts.size();
  if (const auto* torus = std::get_if<FlatTorus>(&space)) {
    const int d = torus->dim();
    if (n < 2)
      return detail::finish_curve(radii,
                                  std::vector<std::int64_t>(radii.size(), 0), n,
                                  m_scale, d);
    const double m_root = std::pow(m_scale, 1.0 / d);
    const double cutoff = radii.back() / m_root;
    PointSet frac = detail::to_fractional_reduced(*torus, pts);
    std::vector<std::int64_t> bins(radii.size(), 0);
    if (cutoff >= 0.5 * torus->min_lattice_norm()) {
      const auto cols = torus->inv_basis_column_norms();
      const double maxcol = *std::max_element(cols.begin(), cols.end());
      const int range = static_cast<int>(std::ceil(cutoff * maxcol)) + 1;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k)
          detail::torus_pair_bins_lattice_sum(*torus, frac[j], frac[k], m_root,
                                              radii, range, bins);
    } else {
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) {
          const double s = m_root * detail::torus_pair_distance_frac(
                                        *torus, frac[j], frac[k]);
          const std::size_t b = detail::bin_of(radii, s);
          if (b != detail::kNoBin) bins[b] += 2;
        }
    }
    return detail::finish_curve(radii, std::move(bins), n, m_scale, d);
  }
  if (const auto* sphere = std::get_if<UnitAreaSphere>(&space)) {
    const int d = sphere->intrinsic_dim();
    std::vector<std::int64_t> bins(radii.size(), 0);
    if (n < 2)
      return detail::finish_curve(radii, std::move(bins), n, m_scale, d);
    const double m_root = std::pow(m_scale, 1.0 / d);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        const double s = m_root * sphere->geodesic(pts[j], pts[k]);
        const std::size_t b = detail::bin_of(radii, s);
        if (b != detail::kNoBin) bins[b] += 2;
      }
    return detail::finish_curve(radii, std::move(bins), n, m_scale, d);
  }
  const int d = pts.dim;
  std::vector<std::int64_t> bins(radii.size(), 0);
  if (n < 2) return detail::finish_curve(radii, std::move(bins), n, m_scale, d);
  const double m_root = std::pow(m_scale, 1.0 / d);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k)
      detail::euclidean_pair_bins(pts, frame, m_root, radii, j, k, bins);
  return detail::finish_curve(radii, std::move(bins), n, m_scale, d);
}

/// Brute-force rho_i f for the oracle contract on smooth test functions.
inline double pc_euclidean_brute(const PointSet& pts, const FrameField& frame,
                                 double m_scale, const TestFunction& f) {
  const int d = pts.dim;
  const std::size_t n = pts.size();
  if (n < 2) return 0.0;
  const double m_root = std::pow(m_scale, 1.0 / d);
  std::vector<double> disp(d), scaled(d);
  CompensatedSum acc;
  std::int64_t count = 0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      for (int c = 0; c < d; ++c) disp[c] = pts[j][c] - pts[k][c];
      frame.apply(pts[j], disp.data(), scaled.data());
      for (int c = 0; c < d; ++c) scaled[c] *= m_root;
      if (f.is_indicator()) {
        if (f(scaled.data())) ++count;
      } else {
        const double v = f(scaled.data());
        if (v != 0.0) acc.add(v);
      }
    }
  const double prefactor =
      m_scale / (static_cast<double>(n) * static_cast<double>(n));
  return prefactor *
         (f.is_indicator() ? static_cast<double>(count) : acc.value());
}

/// Curve for any space with the matching accelerated engine.
inline PairCorrelationCurve pc_curve(const PointSet& pts, const Space& space,
                                     const FrameField& frame, double m_scale,
                                     const std::vector<double>& radii,
                                     int threads = 1) {
  if (const auto* torus = std::get_if<FlatTorus>(&space))
    return pc_torus_curve(pts, *torus, m_scale, radii, threads);
  if (const auto* sphere = std::get_if<UnitAreaSphere>(&space))
    return pc_sphere_curve(pts, *sphere, m_scale, radii, threads);
  return pc_distance_curve(pts, frame, m_scale, radii, threads);
}

}  // namespace paircorr
