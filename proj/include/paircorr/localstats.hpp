#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "paircorr/arrays.hpp"
#include "paircorr/cell_list.hpp"
#include "paircorr/geometry.hpp"
#include "paircorr/paircorr.hpp"
#include "paircorr/points.hpp"
#include "paircorr/scaling.hpp"

namespace paircorr {

struct Estimate {
  double value = 0;
  double stderr_ = 0;
  std::size_t n_samples = 0;
};

// ---------------------------------------------------------------------------
// Local counting measures

/// mu_i^x(D) = (M/N) #{ j : M^{1/d} A(xi_j)(xi_j - x) in D } on a Euclidean
/// domain.
inline double mu_x(const PointSet& pts, const FrameField& frame, double m_scale,
                   const ShapeD& shape, const double* x) {
  const int d = pts.dim;
  const std::size_t n = pts.size();
  if (n == 0 || shape.volume() == 0.0) return 0.0;
  const double m_root = std::pow(m_scale, 1.0 / d);
  std::vector<double> disp(d), scaled(d);
  std::int64_t count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    for (int c = 0; c < d; ++c) disp[c] = pts[j][c] - x[c];
    frame.apply(pts[j], disp.data(), scaled.data());
    for (int c = 0; c < d; ++c) scaled[c] *= m_root;
    if (shape.contains(scaled.data())) ++count;
  }
  return m_scale / static_cast<double>(n) * static_cast<double>(count);
}

/// Torus counting measure, lattice-summed: counts every (j, m) with
/// M^{1/d}(xi_j - x + m) in D.
inline double mu_x_torus(const PointSet& pts, const FlatTorus& torus,
                         double m_scale, const ShapeD& shape, const double* x) {
  const int d = torus.dim();
  const std::size_t n = pts.size();
  if (n == 0 || shape.volume() == 0.0) return 0.0;
  const double m_root = std::pow(m_scale, 1.0 / d);
  const double window = shape.support_radius() / m_root;
  const auto cols = torus.inv_basis_column_norms();
  const double maxcol = *std::max_element(cols.begin(), cols.end());
  const int range = static_cast<int>(std::ceil(window * maxcol)) + 1;
  std::array<double, 8> fx{}, g{}, h{}, v{};
  torus.to_fractional(x, fx.data());
  std::array<double, 8> fj{};
  std::array<int, 8> sh{};
  std::int64_t count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    torus.to_fractional(pts[j], fj.data());
    for (int c = 0; c < d; ++c) {
      g[c] = fj[c] - fx[c];
      g[c] -= std::round(g[c]);
    }
    for (int c = 0; c < d; ++c) sh[c] = -range;
    while (true) {
      for (int c = 0; c < d; ++c) h[c] = g[c] + sh[c];
      torus.from_fractional(h.data(), v.data());
      for (int c = 0; c < d; ++c) v[c] *= m_root;
      if (shape.contains(v.data())) ++count;
      int c = 0;
      for (; c < d; ++c) {
        if (++sh[c] <= range) break;
        sh[c] = -range;
      }
      if (c == d) break;
    }
  }
  return m_scale / static_cast<double>(n) * static_cast<double>(count);
}

/// Batch evaluation of mu over many window centers, cell-list accelerated.
inline std::vector<double> mu_batch_torus(const PointSet& pts,
                                          const FlatTorus& torus,
                                          double m_scale, const ShapeD& shape,
                                          const PointSet& centers) {
  const int d = torus.dim();
  const std::size_t n = pts.size();
  std::vector<double> out(centers.size(), 0.0);
  if (n == 0 || shape.volume() == 0.0) return out;
  const double m_root = std::pow(m_scale, 1.0 / d);
  const double window = shape.support_radius() / m_root;
  if (2.0 * window >= torus.min_lattice_norm()) {
    // window wraps around the torus; fall back to the direct lattice sum
    for (std::size_t q = 0; q < centers.size(); ++q)
      out[q] = mu_x_torus(pts, torus, m_scale, shape, centers[q]);
    return out;
  }
  PointSet frac = detail::to_fractional_reduced(torus, pts);
  const auto cols = torus.inv_basis_column_norms();
  std::vector<double> fcut(d);
  for (int k = 0; k < d; ++k) fcut[k] = std::min(0.5, window * cols[k]);
  CellList cells(frac.coords.data(), n, d, std::vector<double>(d, 0.0),
                 std::vector<double>(d, 1.0), fcut, true);
  std::array<double, 8> fx{}, g{}, v{};
  const double scale = m_scale / static_cast<double>(n);
  for (std::size_t q = 0; q < centers.size(); ++q) {
    torus.to_fractional(centers[q], fx.data());
    for (int c = 0; c < d; ++c) fx[c] -= std::floor(fx[c]);
    std::int64_t count = 0;
    cells.query(fx.data(), [&](std::size_t j) {
      for (int c = 0; c < d; ++c) {
        g[c] = frac[j][c] - fx[c];
        g[c] -= std::round(g[c]);
      }
      torus.from_fractional(g.data(), v.data());
      for (int c = 0; c < d; ++c) v[c] *= m_root;
      if (shape.contains(v.data())) ++count;
    });
    out[q] = scale * static_cast<double>(count);
  }
  return out;
}

inline std::vector<double> mu_batch_euclidean(const PointSet& pts,
                                              const FrameField& frame,
                                              double m_scale,
                                              const ShapeD& shape,
                                              const PointSet& centers) {
  const int d = pts.dim;
  const std::size_t n = pts.size();
  std::vector<double> out(centers.size(), 0.0);
  if (n == 0 || shape.volume() == 0.0) return out;
  const double m_root = std::pow(m_scale, 1.0 / d);
  const double window =
      shape.support_radius() / m_root * frame.inverse_norm_bound(pts);
  std::vector<double> lo, hi;
  detail::points_bounding_box(pts, lo, hi);
  CellList cells(pts.coords.data(), n, d, lo, hi,
                 std::vector<double>(d, window), false);
  std::vector<double> disp(d), scaled(d);
  const double scale = m_scale / static_cast<double>(n);
  for (std::size_t q = 0; q < centers.size(); ++q) {
    std::int64_t count = 0;
    cells.query(centers[q], [&](std::size_t j) {
      for (int c = 0; c < d; ++c) disp[c] = pts[j][c] - centers[q][c];
      frame.apply(pts[j], disp.data(), scaled.data());
      for (int c = 0; c < d; ++c) scaled[c] *= m_root;
      if (shape.contains(scaled.data())) ++count;
    });
    out[q] = scale * static_cast<double>(count);
  }
  return out;
}

namespace detail {

inline Estimate mean_and_stderr(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n == 0) return {};
  CompensatedSum sum;
  for (double v : samples) sum.add(v);
  const double mean = sum.value() / n;
  CompensatedSum sq;
  for (double v : samples) sq.add((v - mean) * (v - mean));
  const double var = n > 1 ? sq.value() / (n - 1) : 0.0;
  return {mean, std::sqrt(var / n), n};
}

}  // namespace detail

/// Monte Carlo estimate of the mean functional ∫ mu_i^x(D) dx on the torus
/// (exact identity: equals vol D in expectation for every array).
inline Estimate mean_functional_torus(const PointSet& pts,
                                      const FlatTorus& torus, double m_scale,
                                      const ShapeD& shape, std::size_t n_mc,
                                      std::uint64_t seed) {
  PointSet centers = sample_uniform(Space{torus}, n_mc, seed);
  return detail::mean_and_stderr(
      mu_batch_torus(pts, torus, m_scale, shape, centers));
}

/// V_i(D) = ∫ (mu_i^x D - vol D)^2 over uniform x on the torus.
inline Estimate variance_functional_torus(const PointSet& pts,
                                          const FlatTorus& torus,
                                          double m_scale, const ShapeD& shape,
                                          std::size_t n_mc, std::uint64_t seed) {
  const double vol_d = shape.volume();
  PointSet centers = sample_uniform(Space{torus}, n_mc, seed);
  std::vector<double> mu = mu_batch_torus(pts, torus, m_scale, shape, centers);
  for (double& v : mu) v = (v - vol_d) * (v - vol_d);
  return detail::mean_and_stderr(mu);
}

/// Same functional on a Euclidean domain, with x drawn from sigma.
inline Estimate variance_functional(const PointSet& pts,
                                    const EuclideanDomain& domain,
                                    const FrameField& frame, double m_scale,
                                    const ShapeD& shape, std::size_t n_mc,
                                    std::uint64_t seed) {
  const double vol_d = shape.volume();
  PointSet centers = sigma_sample(frame, domain, n_mc, seed);
  std::vector<double> mu =
      mu_batch_euclidean(pts, frame, m_scale, shape, centers);
  for (double& v : mu) v = (v - vol_d) * (v - vol_d);
  return detail::mean_and_stderr(mu);
}

/// Exact torus variance identity: Monte Carlo LHS vs exact RHS
///   ∫ (mu_i^x D - vol D)^2 dx = rho_i f - (vol D)^2 + (M/N) vol D,
/// with D a ball of radius r and f its autocorrelation.
struct VarianceIdentityReport {
  Estimate lhs;
  double rhs_exact = 0;
  double vol_d = 0;
  double deviation_sigmas = 0;  // |lhs - rhs| in units of the MC stderr
};

inline VarianceIdentityReport variance_identity_check_torus(const PointSet& pts,
                                       const FlatTorus& torus, double m_scale,
                                       double ball_radius, std::size_t n_mc,
                                       std::uint64_t seed) {
  const int d = torus.dim();
  const ShapeD shape = ShapeD::ball(d, ball_radius);
  VarianceIdentityReport rep;
  rep.vol_d = shape.volume();
  rep.lhs = variance_functional_torus(pts, torus, m_scale, shape, n_mc, seed);
  const TestFunction f = TestFunction::overlap_profile(d, ball_radius);
  const double rho_f = pc_torus_radial_sum(pts, torus, m_scale, f);
  rep.rhs_exact = rho_f - rep.vol_d * rep.vol_d +
                  m_scale / static_cast<double>(pts.size()) * rep.vol_d;
  const double err = std::abs(rep.lhs.value - rep.rhs_exact);
  rep.deviation_sigmas =
      rep.lhs.stderr_ > 0 ? err / rep.lhs.stderr_
                          : (err == 0.0 ? 0.0
                                        : std::numeric_limits<double>::infinity());
  return rep;
}

// ---------------------------------------------------------------------------
// Discrepancy

/// Exact star discrepancy of points in [0,1) against the uniform measure.
inline double star_discrepancy_unit_interval(std::vector<double> xs) {
  const std::size_t n = xs.size();
  if (n == 0) return 1.0;
  std::sort(xs.begin(), xs.end());
  double best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double up = static_cast<double>(i + 1) / n - xs[i];
    const double dn = xs[i] - static_cast<double>(i) / n;
    best = std::max({best, up, dn});
  }
  return best;
}

struct DiscrepancyOptions {
  int grid_sets = 1000;
  int random_sets = 1000;
  std::uint64_t seed = 99;
};

/// Deviation sup |nu_i(S) - sigma(S)| over anchored boxes (box domains and
/// tori) or geodesic caps (sphere). One-dimensional uniform cases use the
/// exact star-discrepancy formula.
inline double discrepancy(const PointSet& pts, const Space& space,
                          const FrameField* sigma_frame = nullptr,
                          const DiscrepancyOptions& opt = {}) {
  const std::size_t n = pts.size();
  if (n == 0) return 1.0;
  const bool uniform =
      sigma_frame == nullptr ||
      (sigma_frame->is_constant());
  if (const auto* sphere = std::get_if<UnitAreaSphere>(&space)) {
    if (sphere->intrinsic_dim() != 2)
      throw std::invalid_argument("discrepancy: sphere caps need S^2");
    // caps at Fibonacci-spiral centers plus random ones, radii stratified
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double R = sphere->radius();
    std::vector<double> centers;  // flat triples
    const int n_centers = 40;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n_centers; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / n_centers;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * i;
      centers.push_back(R * r * std::cos(phi));
      centers.push_back(R * r * std::sin(phi));
      centers.push_back(R * z);
    }
    const int total = opt.grid_sets + opt.random_sets;
    double best = 0;
    std::vector<double> c(3);
    for (int s = 0; s < total; ++s) {
      double t;
      if (s < opt.grid_sets) {
        const int ci = s % n_centers;
        c.assign(centers.begin() + 3 * ci, centers.begin() + 3 * ci + 3);
        t = sphere->max_geodesic() * ((s / n_centers) + 1.0) /
            (opt.grid_sets / n_centers + 1.0);
      } else {
        double sq = 0;
        std::normal_distribution<double> gauss;
        for (int k = 0; k < 3; ++k) {
          c[k] = gauss(rng);
          sq += c[k] * c[k];
        }
        if (sq == 0) continue;
        for (int k = 0; k < 3; ++k) c[k] *= R / std::sqrt(sq);
        t = sphere->max_geodesic() * u(rng);
      }
      std::size_t count = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (sphere->geodesic(pts[j], c.data()) <= t) ++count;
      best = std::max(best, std::abs(static_cast<double>(count) / n -
                                     sphere->cap_measure(t)));
    }
    return best;
  }

  // boxes and tori: anchored boxes from the domain's lower corner
  std::vector<double> lo, hi;
  int d;
  if (const auto* t = std::get_if<FlatTorus>(&space)) {
    d = t->dim();
    lo.assign(d, 0.0);
    hi.assign(d, 1.0);
    if (!t->is_identity_basis())
      throw std::invalid_argument(
          "discrepancy: anchored boxes need the standard torus");
  } else {
    const auto& e = std::get<EuclideanDomain>(space);
    if (e.shape() != EuclideanDomain::Shape::box)
      throw std::invalid_argument("discrepancy: box domains only");
    d = e.dim();
    lo = e.lo();
    hi = e.hi();
  }
  if (d == 1 && uniform && lo[0] == 0.0 && hi[0] == 1.0)
    return star_discrepancy_unit_interval(pts.coords);

  // sigma([lo, b)) for the box family
  auto sigma_of = [&](const std::vector<double>& b) {
    if (uniform) {
      double v = 1, tot = 1;
      for (int k = 0; k < d; ++k) {
        v *= b[k] - lo[k];
        tot *= hi[k] - lo[k];
      }
      return v / tot;
    }
    if (d != 1)
      throw std::invalid_argument(
          "discrepancy: nonuniform sigma supported in 1-d only");
    // midpoint quadrature of the density over [lo, b)
    const int nodes = 2000;
    CompensatedSum acc;
    for (int q = 0; q < nodes; ++q) {
      const double x = lo[0] + (b[0] - lo[0]) * (q + 0.5) / nodes;
      acc.add(sigma_frame->density(&x));
    }
    return acc.value() * (b[0] - lo[0]) / nodes;
  };

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int per_dim =
      std::max(2, static_cast<int>(std::round(std::pow(
                      static_cast<double>(opt.grid_sets), 1.0 / d))));
  std::vector<double> b(d);
  double best = 0;
  auto eval_box = [&](const std::vector<double>& corner) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      bool inside = true;
      for (int k = 0; k < d; ++k)
        if (pts[j][k] < lo[k] || pts[j][k] >= corner[k]) {
          inside = false;
          break;
        }
      if (inside) ++count;
    }
    best = std::max(best,
                    std::abs(static_cast<double>(count) / n - sigma_of(corner)));
  };
  std::vector<int> idx(d, 0);
  while (true) {
    for (int k = 0; k < d; ++k)
      b[k] = lo[k] + (hi[k] - lo[k]) * (idx[k] + 1.0) / per_dim;
    eval_box(b);
    int k = 0;
    for (; k < d; ++k) {
      if (++idx[k] < per_dim) break;
      idx[k] = 0;
    }
    if (k == d) break;
  }
  for (int s = 0; s < opt.random_sets; ++s) {
    for (int k = 0; k < d; ++k) b[k] = lo[k] + (hi[k] - lo[k]) * u(rng);
    eval_box(b);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Theorem-1 verification pipelines (empirical consistency only)

struct VerifyOptions {
  ScaleSequence scale{1.0, 1.0, true};
  std::vector<double> radii = default_radii();
  double eps_floor = 0.02;
  // sub-Poisson tolerance eps_i = max(eps_floor, C / sqrt(N_i / M_i));
  // C calibrated on random arrays (see tests)
  double eps_c = 0.15;
  // gate on |rho~ - omega| instead of the one-sided excess; used to test
  // the full Poisson property rather than the sub-Poisson hypothesis
  bool two_sided = false;
  int threads = 1;
  DiscrepancyOptions discrepancy_opts;
};

struct VerifyRow {
  std::size_t row = 0;
  std::int64_t n_points = 0;
  double m_scale = 0;
  double sub_poisson_excess = 0;
  double eps = 0;
  double poisson_excess = 0;
  double discrepancy = 0;
};

struct VerifyResult {
  std::vector<VerifyRow> rows;
  bool consistent = false;
  // first sub-Poisson violation, as (N, r, excess)
  std::optional<std::tuple<std::int64_t, double, double>> violation;
};

/// Empirical check of the forward direction: sub-Poisson excess within the
/// tolerance schedule and row-over-row decreasing discrepancy. The verdict
/// is a consistency statement about finite rows, not a proof.
inline VerifyResult verify_theorem_forward(const TriangularArray& array,
                                           const FrameField& frame,
                                           const VerifyOptions& opt = {}) {
  if (array.schedule().rows() < 1)
    throw std::invalid_argument("verify: empty schedule");
  VerifyResult out;
  bool sub_ok = true, disc_ok = true;
  double prev_disc = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < array.schedule().rows(); ++i) {
    VerifyRow row;
    row.row = i;
    row.n_points = array.schedule().size(i);
    row.m_scale = opt.scale.at(i, row.n_points);
    const PointSet pts = array.row(i);
    const PairCorrelationCurve curve = pc_curve(
        pts, array.space(), frame, row.m_scale, opt.radii, opt.threads);
    row.sub_poisson_excess = curve.sub_poisson_excess();
    row.poisson_excess = curve.poisson_excess().first;
    row.eps = std::max(opt.eps_floor,
                       opt.eps_c / std::sqrt(static_cast<double>(row.n_points) /
                                             row.m_scale));
    row.discrepancy = discrepancy(
        pts, array.space(), frame.is_constant() ? nullptr : &frame,
        opt.discrepancy_opts);
    const double gate =
        opt.two_sided ? row.poisson_excess : row.sub_poisson_excess;
    if (gate > row.eps) {
      sub_ok = false;
      if (!out.violation) {
        // record the worst radius of the first violating row
        double worst = 0, at = 0;
        for (std::size_t k = 0; k < curve.radii.size(); ++k) {
          double e = curve.values[k] - curve.poisson_ref[k];
          if (opt.two_sided) e = std::abs(e);
          if (e > worst) {
            worst = e;
            at = curve.radii[k];
          }
        }
        out.violation = {row.n_points, at, worst};
      }
    }
    if (!(row.discrepancy < prev_disc)) disc_ok = false;
    prev_disc = row.discrepancy;
    out.rows.push_back(row);
  }
  out.consistent = sub_ok && disc_ok;
  return out;
}

struct ScaleSearchRow {
  double theta = 0;
  double m_scale = 0;
  double poisson_excess = 0;
  bool pass = false;
};

struct ScaleSearchResult {
  std::vector<ScaleSearchRow> table;
  std::optional<double> best_theta;
};

/// Empirical search for the largest scale exponent at which the last row's
/// distance pair correlation is Poisson within tolerance.
inline ScaleSearchResult find_poisson_scale(const TriangularArray& array,
                                            const FrameField& frame,
                                            const std::vector<double>& theta_grid,
                                            double tolerance = 0.05,
                                            const std::vector<double>& radii =
                                                default_radii(),
                                            int threads = 1) {
  ScaleSearchResult out;
  if (theta_grid.empty()) return out;
  const std::size_t last = array.schedule().rows() - 1;
  const std::int64_t n = array.schedule().size(last);
  const PointSet pts = array.row(last);
  for (double theta : theta_grid) {
    if (!(theta > 0) || theta > 1.0)
      throw std::invalid_argument("find_poisson_scale: theta in (0,1]");
    ScaleSearchRow row;
    row.theta = theta;
    row.m_scale = std::pow(static_cast<double>(n), theta);
    const PairCorrelationCurve curve =
        pc_curve(pts, array.space(), frame, row.m_scale, radii, threads);
    row.poisson_excess = curve.poisson_excess().first;
    row.pass = row.poisson_excess <= tolerance;
    if (row.pass && (!out.best_theta || theta > *out.best_theta))
      out.best_theta = theta;
    out.table.push_back(row);
  }
  return out;
}

}  // namespace paircorr
