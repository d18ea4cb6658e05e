#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "paircorr/geometry.hpp"
#include "paircorr/points.hpp"

namespace paircorr {

/// All primes <= limit, ascending (Eratosthenes).
inline std::vector<std::int64_t> prime_sieve(std::int64_t limit) {
  if (limit < 2) throw std::invalid_argument("prime_sieve: limit >= 2 required");
  std::vector<bool> composite(limit + 1, false);
  std::vector<std::int64_t> primes;
  for (std::int64_t p = 2; p <= limit; ++p) {
    if (composite[p]) continue;
    primes.push_back(p);
    for (std::int64_t q = p * p; q <= limit; q += p) composite[q] = true;
  }
  return primes;
}

/// Upper bound on the n-th prime (Rosser-Schoenfeld for n >= 6).
inline std::int64_t nth_prime_bound(std::int64_t n) {
  if (n < 6) return 13;
  const double x = static_cast<double>(n);
  return static_cast<std::int64_t>(x * (std::log(x) + std::log(std::log(x)))) + 1;
}

/// Strictly increasing row sizes N_1 < N_2 < ...
class RowSchedule {
 public:
  explicit RowSchedule(std::vector<std::int64_t> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw std::invalid_argument("RowSchedule: empty");
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
      if (sizes_[i] < 1) throw std::invalid_argument("RowSchedule: sizes >= 1");
      if (i > 0 && sizes_[i] <= sizes_[i - 1])
        throw std::invalid_argument("RowSchedule: sizes must strictly increase");
    }
  }

  static RowSchedule geometric(std::int64_t n0, double growth, std::size_t rows) {
    if (n0 < 1 || growth <= 1.0 || rows == 0)
      throw std::invalid_argument("RowSchedule::geometric: bad parameters");
    std::vector<std::int64_t> sizes;
    double v = static_cast<double>(n0);
    for (std::size_t i = 0; i < rows; ++i) {
      auto n = static_cast<std::int64_t>(std::ceil(v));
      if (!sizes.empty() && n <= sizes.back()) n = sizes.back() + 1;
      sizes.push_back(n);
      v *= growth;
    }
    return RowSchedule(std::move(sizes));
  }

  static RowSchedule powers_of_two(std::int64_t n0, std::size_t rows) {
    return geometric(n0, 2.0, rows);
  }

  std::size_t rows() const { return sizes_.size(); }
  std::int64_t size(std::size_t i) const { return sizes_.at(i); }
  const std::vector<std::int64_t>& sizes() const { return sizes_; }

 private:
  std::vector<std::int64_t> sizes_;
};

/// Symbolic irrational constants, evaluated in extended precision.
inline long double alpha_constant(const std::string& tag) {
  if (tag == "sqrt2") return sqrtl(2.0L);
  if (tag == "pi") return 3.14159265358979323846264338327950288L;
  if (tag == "golden") return (1.0L + sqrtl(5.0L)) / 2.0L;
  throw std::invalid_argument("unknown alpha tag: " + tag);
}

namespace detail {

inline double frac_long(long double v) {
  long double f = v - floorl(v);
  double out = static_cast<double>(f);
  if (out >= 1.0) out = 0.0;
  if (out < 0.0) out = 0.0;
  return out;
}

}  // namespace detail

/// Generator family for triangular-array rows.
class ArrayFamily {
 public:
  enum class Kind {
    kronecker,      // <j alpha>
    poly_frac,      // <j^k alpha>
    sqrt_frac,      // <j^{1/2}>
    prime_frac,     // <p_j alpha>
    grid,           // j / N_i, j = 0..N_i-1
    random_uniform, // i.i.d. on the space, prefix rows of one stream
    ball_rescaled   // T_i^{-1} a_j over ||a_j|| < T_i
  };

  static ArrayFamily kronecker(long double alpha) {
    ArrayFamily f(Kind::kronecker);
    f.alpha_ = check_alpha(alpha);
    return f;
  }

  static ArrayFamily poly_frac(int k, long double alpha) {
    if (k < 1) throw std::invalid_argument("poly_frac: k >= 1 required");
    ArrayFamily f(Kind::poly_frac);
    f.power_ = k;
    f.alpha_ = check_alpha(alpha);
    return f;
  }

  /// skip_squares drops perfect squares j = m^2 (their fractional part is
  /// an atom at 0 that dominates the pair statistics at M ~ N).
  static ArrayFamily sqrt_frac(bool skip_squares = false) {
    ArrayFamily f(Kind::sqrt_frac);
    f.skip_squares_ = skip_squares;
    return f;
  }

  static ArrayFamily prime_frac(long double alpha, std::int64_t sieve_limit = 0) {
    ArrayFamily f(Kind::prime_frac);
    f.alpha_ = check_alpha(alpha);
    f.sieve_limit_ = sieve_limit;  // 0: auto-sized per row
    return f;
  }

  static ArrayFamily grid() { return ArrayFamily(Kind::grid); }

  static ArrayFamily random_uniform(std::uint64_t seed) {
    ArrayFamily f(Kind::random_uniform);
    f.seed_ = seed;
    return f;
  }

  /// Example-2 style rows from an explicit point sequence ordered by norm.
  static ArrayFamily ball_rescaled(PointSet sequence, std::vector<double> radii) {
    ArrayFamily f(Kind::ball_rescaled);
    f.ball_points_ = std::move(sequence);
    f.radii_ = std::move(radii);
    return f;
  }

  /// Preset: directions/points of the shifted lattice Z^2 + shift, ordered
  /// by norm up to the largest T_i.
  static ArrayFamily ball_rescaled_lattice(double shift_x, double shift_y,
                                           std::vector<double> radii) {
    if (radii.empty()) throw std::invalid_argument("ball_rescaled: no radii");
    const double tmax = *std::max_element(radii.begin(), radii.end());
    PointSet pts(2);
    const int K = static_cast<int>(std::ceil(tmax)) + 2;
    std::vector<std::pair<double, std::array<double, 2>>> tagged;
    for (int a = -K; a <= K; ++a)
      for (int b = -K; b <= K; ++b) {
        const std::array<double, 2> p{a + shift_x, b + shift_y};
        const double r = std::hypot(p[0], p[1]);
        if (r > 0 && r <= tmax) tagged.emplace_back(r, p);
      }
    std::sort(tagged.begin(), tagged.end(),
              [](const auto& u, const auto& v) { return u.first < v.first; });
    for (const auto& [r, p] : tagged) pts.push_back(p.data());
    return ball_rescaled(std::move(pts), std::move(radii));
  }

  Kind kind() const { return kind_; }
  long double alpha() const { return alpha_; }
  int power() const { return power_; }
  std::uint64_t seed() const { return seed_; }
  bool skip_squares() const { return skip_squares_; }
  const std::vector<double>& radii() const { return radii_; }

  bool is_sequence() const {
    return kind_ != Kind::grid && kind_ != Kind::ball_rescaled;
  }

  std::string name() const {
    switch (kind_) {
      case Kind::kronecker: return "kronecker";
      case Kind::poly_frac: return "poly";
      case Kind::sqrt_frac: return "sqrt";
      case Kind::prime_frac: return "prime";
      case Kind::grid: return "grid";
      case Kind::random_uniform: return "random";
      case Kind::ball_rescaled: return "ball";
    }
    return "?";
  }

  /// Row sizes available for ball_rescaled: counts per radius, filtered to
  /// strictly increasing; `dropped` reports discarded radii.
  std::vector<std::int64_t> ball_row_sizes(std::vector<double>* dropped = nullptr) const {
    std::vector<std::int64_t> out;
    kept_radii_.clear();
    for (double t : radii_) {
      std::int64_t count = 0;
      for (std::size_t j = 0; j < ball_points_.size(); ++j)
        if (norm(ball_points_[j], ball_points_.dim) < t) ++count;
      if (out.empty() || count > out.back()) {
        out.push_back(count);
        kept_radii_.push_back(t);
      } else if (dropped) {
        dropped->push_back(t);
      }
    }
    return out;
  }

  const PointSet& ball_points() const { return ball_points_; }
  const std::vector<double>& kept_radii() const { return kept_radii_; }

 private:
  explicit ArrayFamily(Kind k) : kind_(k) {}

  static long double check_alpha(long double a) {
    if (!std::isfinite(static_cast<double>(a)))
      throw std::invalid_argument("alpha must be finite");
    return a;
  }

  Kind kind_;
  long double alpha_ = 0;
  int power_ = 1;
  std::uint64_t seed_ = 0;
  bool skip_squares_ = false;
  std::int64_t sieve_limit_ = 0;
  PointSet ball_points_;
  std::vector<double> radii_;
  mutable std::vector<double> kept_radii_;

  friend class TriangularArray;
};

/// A space, a row-size schedule, and a generator; row(i) materializes the
/// i-th row deterministically.
class TriangularArray {
 public:
  TriangularArray(Space space, RowSchedule schedule, ArrayFamily family)
      : space_(std::move(space)),
        schedule_(std::move(schedule)),
        family_(std::move(family)) {}

  /// For ball_rescaled families the schedule is derived from the radii.
  static TriangularArray from_ball_family(ArrayFamily family) {
    if (family.kind() != ArrayFamily::Kind::ball_rescaled)
      throw std::invalid_argument("from_ball_family: wrong family kind");
    std::vector<double> dropped;
    auto sizes = family.ball_row_sizes(&dropped);
    if (sizes.empty() || sizes.front() < 1)
      throw std::invalid_argument("ball_rescaled: no nonempty rows");
    const int d = family.ball_points().dim;
    return TriangularArray(EuclideanDomain::ball(std::vector<double>(d, 0.0), 1.0),
                           RowSchedule(std::move(sizes)), std::move(family));
  }

  const Space& space() const { return space_; }
  const RowSchedule& schedule() const { return schedule_; }
  const ArrayFamily& family() const { return family_; }

  PointSet row(std::size_t i) const {
    const std::int64_t n = schedule_.size(i);
    switch (family_.kind()) {
      case ArrayFamily::Kind::kronecker:
        return sequence_row(n, [&](std::int64_t j) {
          return detail::frac_long(static_cast<long double>(j) * family_.alpha_);
        });
      case ArrayFamily::Kind::poly_frac:
        return sequence_row(n, [&](std::int64_t j) {
          std::int64_t p = 1;
          for (int e = 0; e < family_.power_; ++e) {
            if (p > std::numeric_limits<std::int64_t>::max() / j)
              throw std::overflow_error("poly_frac: j^k overflows");
            p *= j;
          }
          return detail::frac_long(static_cast<long double>(p) * family_.alpha_);
        });
      case ArrayFamily::Kind::sqrt_frac: {
        PointSet out(1);
        out.reserve(n);
        std::int64_t j = 0;
        while (static_cast<std::int64_t>(out.size()) < n) {
          ++j;
          const long double r = sqrtl(static_cast<long double>(j));
          const std::int64_t m = llroundl(r);
          if (family_.skip_squares_ && m * m == j) continue;
          const double x = detail::frac_long(r);
          out.push_back(&x);
        }
        return out;
      }
      case ArrayFamily::Kind::prime_frac: {
        std::int64_t limit = family_.sieve_limit_;
        if (limit == 0) limit = nth_prime_bound(n);
        auto primes = prime_sieve(limit);
        if (static_cast<std::int64_t>(primes.size()) < n)
          throw std::runtime_error("prime_frac: sieve limit too small for row");
        return sequence_row(n, [&](std::int64_t j) {
          return detail::frac_long(static_cast<long double>(primes[j - 1]) *
                                   family_.alpha_);
        });
      }
      case ArrayFamily::Kind::grid: {
        PointSet out(1);
        out.reserve(n);
        for (std::int64_t j = 0; j < n; ++j) {
          const double x = static_cast<double>(j) / static_cast<double>(n);
          out.push_back(&x);
        }
        return out;
      }
      case ArrayFamily::Kind::random_uniform:
        // prefix rows of a single seeded stream
        return sample_uniform(space_, static_cast<std::size_t>(n),
                              family_.seed_);
      case ArrayFamily::Kind::ball_rescaled: {
        const auto& seq = family_.ball_points();
        const double t = family_.kept_radii().at(i);
        PointSet out(seq.dim);
        std::vector<double> x(seq.dim);
        for (std::size_t j = 0; j < seq.size(); ++j) {
          if (norm(seq[j], seq.dim) >= t) continue;
          for (int k = 0; k < seq.dim; ++k) x[k] = seq[j][k] / t;
          out.push_back(x.data());
        }
        if (static_cast<std::int64_t>(out.size()) != n)
          throw std::logic_error("ball_rescaled: row size mismatch");
        return out;
      }
    }
    throw std::logic_error("unreachable");
  }

 private:
  template <class F>
  static PointSet sequence_row(std::int64_t n, F&& value) {
    PointSet out(1);
    out.reserve(n);
    for (std::int64_t j = 1; j <= n; ++j) {
      const double x = value(j);
      out.push_back(&x);
    }
    return out;
  }

  Space space_;
  RowSchedule schedule_;
  ArrayFamily family_;
};

}  // namespace paircorr
