#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "paircorr/geometry.hpp"
#include "paircorr/points.hpp"

namespace paircorr {

/// Tiny arithmetic expression grammar for density strings: numbers,
/// coordinates x1..xd (plain "x" is x1), + - * / ^ and parentheses.
class Expression {
 public:
  static Expression parse(const std::string& src, int dim) {
    Expression e;
    e.source_ = src;
    Parser p{src, 0, dim, &e.program_};
    p.expr();
    p.skip_ws();
    if (p.pos != src.size())
      throw std::invalid_argument("expression: trailing input at '" +
                                  src.substr(p.pos) + "'");
    return e;
  }

  double eval(const double* x) const {
    double stack[32];
    int top = 0;
    for (const Op& op : program_) {
      switch (op.code) {
        case Code::push_const: stack[top++] = op.value; break;
        case Code::push_var: stack[top++] = x[op.var]; break;
        case Code::neg: stack[top - 1] = -stack[top - 1]; break;
        case Code::add: --top; stack[top - 1] += stack[top]; break;
        case Code::sub: --top; stack[top - 1] -= stack[top]; break;
        case Code::mul: --top; stack[top - 1] *= stack[top]; break;
        case Code::div: --top; stack[top - 1] /= stack[top]; break;
        case Code::pow_:
          --top;
          stack[top - 1] = std::pow(stack[top - 1], stack[top]);
          break;
      }
    }
    return stack[0];
  }

  const std::string& source() const { return source_; }
  bool empty() const { return program_.empty(); }

 private:
  enum class Code { push_const, push_var, add, sub, mul, div, pow_, neg };
  struct Op {
    Code code;
    double value = 0;
    int var = 0;
  };

  struct Parser {
    const std::string& s;
    std::size_t pos;
    int dim;
    std::vector<Op>* out;

    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
        ++pos;
    }
    bool accept(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    void expr() {
      term();
      while (true) {
        if (accept('+')) { term(); out->push_back({Code::add}); }
        else if (accept('-')) { term(); out->push_back({Code::sub}); }
        else break;
      }
    }
    void term() {
      factor();
      while (true) {
        if (accept('*')) { factor(); out->push_back({Code::mul}); }
        else if (accept('/')) { factor(); out->push_back({Code::div}); }
        else break;
      }
    }
    void factor() {
      if (accept('-')) {
        factor();
        out->push_back({Code::neg});
        return;
      }
      primary();
      if (accept('^')) {
        factor();  // right-associative
        out->push_back({Code::pow_});
      }
    }
    void primary() {
      skip_ws();
      if (pos >= s.size()) throw std::invalid_argument("expression: truncated");
      if (accept('(')) {
        expr();
        if (!accept(')')) throw std::invalid_argument("expression: missing ')'");
        return;
      }
      const char c = s[pos];
      if (c == 'x') {
        ++pos;
        int idx = 1;
        if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
          idx = 0;
          while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
            idx = idx * 10 + (s[pos++] - '0');
        }
        if (idx < 1 || idx > dim)
          throw std::invalid_argument("expression: coordinate x" +
                                      std::to_string(idx) + " out of range");
        out->push_back({Code::push_var, 0, idx - 1});
        return;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        const double v = std::stod(s.substr(pos), &used);
        pos += used;
        out->push_back({Code::push_const, v});
        return;
      }
      throw std::invalid_argument(std::string("expression: unexpected '") + c +
                                  "'");
    }
  };

  std::vector<Op> program_;
  std::string source_;
};

/// Frame field A: Omega -> GL(d,R). Two kinds: a constant matrix, or the
/// conformal field Delta^{1/d}(x) I_d for a user-supplied density. A global
/// scalar carries the sigma(Omega)=1 normalization.
class FrameField {
 public:
  enum class Kind { constant, conformal };

  static FrameField identity(int dim) {
    std::vector<double> m(dim * dim, 0.0);
    for (int k = 0; k < dim; ++k) m[k * dim + k] = 1.0;
    return constant(dim, std::move(m));
  }

  static FrameField constant(int dim, std::vector<double> matrix) {
    if (matrix.size() != static_cast<std::size_t>(dim * dim))
      throw std::invalid_argument("FrameField: matrix must be dim x dim");
    FrameField f;
    f.kind_ = Kind::constant;
    f.dim_ = dim;
    f.matrix_ = std::move(matrix);
    f.finish_constant();
    return f;
  }

  static FrameField conformal(int dim, Expression density) {
    FrameField f;
    f.kind_ = Kind::conformal;
    f.dim_ = dim;
    f.density_expr_ = std::move(density);
    return f;
  }

  static FrameField conformal(int dim, const std::string& density_src) {
    return conformal(dim, Expression::parse(density_src, dim));
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_constant() const { return kind_ == Kind::constant; }
  double scalar() const { return scalar_; }
  const std::vector<double>& matrix() const { return matrix_; }
  const Expression& density_expression() const { return density_expr_; }

  /// |det A(x)|.
  double density(const double* x) const {
    if (kind_ == Kind::constant) return const_density_;
    const double raw = density_expr_.eval(x);
    if (!(raw > 0))
      throw std::domain_error("FrameField: nonpositive density at a node");
    return std::pow(scalar_, dim_) * raw;
  }

  /// out = A(at) v.
  void apply(const double* at, const double* v, double* out) const {
    if (kind_ == Kind::constant) {
      for (int r = 0; r < dim_; ++r) {
        double s = 0;
        for (int c = 0; c < dim_; ++c) s += matrix_[r * dim_ + c] * v[c];
        out[r] = scalar_ * s;
      }
      return;
    }
    const double a = conformal_factor(at);
    for (int k = 0; k < dim_; ++k) out[k] = a * v[k];
  }

  /// ||A(at) diff||.
  double rescaled_norm(const double* at, const double* diff) const {
    if (kind_ == Kind::conformal) return conformal_factor(at) * norm(diff, dim_);
    double sq = 0;
    for (int r = 0; r < dim_; ++r) {
      double s = 0;
      for (int c = 0; c < dim_; ++c) s += matrix_[r * dim_ + c] * diff[c];
      sq += s * s;
    }
    return scalar_ * std::sqrt(sq);
  }

  /// ||A(x)^{-1}|| for a constant frame (exact operator norm is bounded by
  /// the Frobenius norm of the inverse, which is what we use).
  double constant_inverse_norm() const {
    double sq = 0;
    for (double v : inverse_) sq += v * v;
    return std::sqrt(sq) / scalar_;
  }

  /// Upper bound on ||A(x)^{-1}|| over the given evaluation points. The
  /// frame is only ever evaluated at array points, so scanning them is an
  /// exact bound for the conformal kind.
  double inverse_norm_bound(const PointSet& pts) const {
    if (kind_ == Kind::constant) return constant_inverse_norm();
    double best = 0;
    for (std::size_t j = 0; j < pts.size(); ++j)
      best = std::max(best, 1.0 / conformal_factor(pts[j]));
    return best;
  }

  /// Sampled bound over a domain, inflated by 10%; used to size search
  /// radii where overestimation is safe.
  double inverse_norm_bound(const EuclideanDomain& domain, int samples = 10000,
                            std::uint64_t seed = 1u) const {
    if (kind_ == Kind::constant) return constant_inverse_norm();
    PointSet pts = sample_uniform(domain, samples, seed);
    return 1.1 * inverse_norm_bound(pts);
  }

  double density_max_bound(const EuclideanDomain& domain, int samples = 10000,
                           std::uint64_t seed = 1u) const {
    PointSet pts = sample_uniform(domain, samples, seed);
    double best = 0;
    for (std::size_t j = 0; j < pts.size(); ++j)
      best = std::max(best, density(pts[j]));
    return 1.1 * best;
  }

  /// Frame multiplied by a positive scalar s (A -> s A).
  FrameField scaled(double s) const {
    if (!(s > 0)) throw std::invalid_argument("FrameField: scale must be > 0");
    FrameField f = *this;
    f.scalar_ *= s;
    if (kind_ == Kind::constant)
      f.const_density_ = std::pow(f.scalar_, dim_) * f.raw_const_density_;
    return f;
  }

 private:
  double conformal_factor(const double* at) const {
    const double raw = density_expr_.eval(at);
    if (!(raw > 0))
      throw std::domain_error("FrameField: nonpositive density at a node");
    return scalar_ * std::pow(raw, 1.0 / dim_);
  }

  void finish_constant() {
    // determinant and inverse via elimination; d is small
    const int n = dim_;
    std::vector<double> a = matrix_;
    inverse_.assign(n * n, 0.0);
    for (int k = 0; k < n; ++k) inverse_[k * n + k] = 1.0;
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
      int piv = col;
      for (int r = col + 1; r < n; ++r)
        if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
      if (a[piv * n + col] == 0.0)
        throw std::invalid_argument("FrameField: singular matrix");
      if (piv != col) {
        for (int c = 0; c < n; ++c) {
          std::swap(a[piv * n + c], a[col * n + c]);
          std::swap(inverse_[piv * n + c], inverse_[col * n + c]);
        }
        det = -det;
      }
      const double p = a[col * n + col];
      det *= p;
      for (int c = 0; c < n; ++c) {
        a[col * n + c] /= p;
        inverse_[col * n + c] /= p;
      }
      for (int r = 0; r < n; ++r) {
        if (r == col) continue;
        const double m = a[r * n + col];
        if (m == 0.0) continue;
        for (int c = 0; c < n; ++c) {
          a[r * n + c] -= m * a[col * n + c];
          inverse_[r * n + c] -= m * inverse_[col * n + c];
        }
      }
    }
    raw_const_density_ = std::abs(det);
    const_density_ = std::pow(scalar_, dim_) * raw_const_density_;
  }

  Kind kind_ = Kind::constant;
  int dim_ = 1;
  double scalar_ = 1.0;
  std::vector<double> matrix_, inverse_;
  double raw_const_density_ = 1.0, const_density_ = 1.0;
  Expression density_expr_;
};

/// Result of integrating the density over a domain.
struct DensityIntegral {
  double value = 0;
  double stderr_ = 0;  // zero for deterministic quadrature
};

/// Integral of Delta over Omega: deterministic midpoint quadrature on boxes,
/// Monte Carlo with reported standard error on balls.
inline DensityIntegral integrate_density(const FrameField& frame,
                                         const EuclideanDomain& domain,
                                         std::uint64_t seed = 7u) {
  const int d = domain.dim();
  if (domain.shape() == EuclideanDomain::Shape::box) {
    std::int64_t per_dim = static_cast<std::int64_t>(
        std::ceil(std::pow(2.0e6, 1.0 / d)));
    per_dim = std::max<std::int64_t>(per_dim, 64);
    std::vector<std::int64_t> idx(d, 0);
    std::vector<double> x(d);
    CompensatedSum acc;
    double cellvol = 1;
    for (int k = 0; k < d; ++k)
      cellvol *= (domain.hi()[k] - domain.lo()[k]) / per_dim;
    while (true) {
      for (int k = 0; k < d; ++k)
        x[k] = domain.lo()[k] + (idx[k] + 0.5) *
                                    (domain.hi()[k] - domain.lo()[k]) / per_dim;
      acc.add(frame.density(x.data()));
      int k = 0;
      for (; k < d; ++k) {
        if (++idx[k] < per_dim) break;
        idx[k] = 0;
      }
      if (k == d) break;
    }
    return {acc.value() * cellvol, 0.0};
  }
  // ball: Monte Carlo with 1e6 samples
  const std::size_t n = 1000000;
  PointSet pts = sample_uniform(Space{domain}, n, seed);
  CompensatedSum sum, sumsq;
  for (std::size_t j = 0; j < n; ++j) {
    const double v = frame.density(pts[j]);
    sum.add(v);
    sumsq.add(v * v);
  }
  const double mean = sum.value() / n;
  const double var = std::max(0.0, sumsq.value() / n - mean * mean);
  const double vol = domain.volume();
  return {mean * vol, vol * std::sqrt(var / n)};
}

/// Rescale the frame by the scalar making sigma(Omega) = 1.
inline FrameField normalize_frame(const FrameField& frame,
                                  const EuclideanDomain& domain) {
  const DensityIntegral total = integrate_density(frame, domain);
  if (!(total.value > 0))
    throw std::runtime_error("normalize_frame: nonpositive density integral");
  return frame.scaled(std::pow(total.value, -1.0 / frame.dim()));
}

/// i.i.d. draws from sigma(dx) = Delta(x) dx by rejection against uniform
/// proposals. Deterministic given seed; aborts if the acceptance rate
/// collapses below 1e-3.
inline PointSet sigma_sample(const FrameField& frame,
                             const EuclideanDomain& domain, std::size_t n,
                             std::uint64_t seed) {
  if (frame.is_constant())  // acceptance rate 1: plain uniform stream
    return sample_uniform(Space{domain}, n, seed);
  const double dmax = frame.density_max_bound(domain);
  PointSet out(domain.dim());
  out.reserve(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> u11(-1.0, 1.0);
  std::vector<double> x(domain.dim());
  std::size_t proposals = 0, accepted = 0;
  while (out.size() < n) {
    if (domain.shape() == EuclideanDomain::Shape::box) {
      for (int k = 0; k < domain.dim(); ++k)
        x[k] = domain.lo()[k] + (domain.hi()[k] - domain.lo()[k]) * u01(rng);
    } else {
      double sq = 0;
      for (int k = 0; k < domain.dim(); ++k) {
        x[k] = u11(rng);
        sq += x[k] * x[k];
      }
      if (sq > 1.0) continue;
      for (int k = 0; k < domain.dim(); ++k)
        x[k] = domain.center()[k] + domain.radius() * x[k];
    }
    ++proposals;
    if (u01(rng) * dmax <= frame.density(x.data())) {
      out.push_back(x.data());
      ++accepted;
    }
    if (proposals >= 10000 && accepted < proposals / 1000)
      throw std::runtime_error(
          "sigma_sample: acceptance rate below 1e-3 (density too peaked?)");
  }
  return out;
}

/// Scale sequence M_i = c N_i^theta (optionally clamped at N_i), or an
/// explicit list.
class ScaleSequence {
 public:
  ScaleSequence(double c, double theta, bool clamp)
      : c_(c), theta_(theta), clamp_(clamp) {
    if (!(c > 0)) throw std::invalid_argument("ScaleSequence: c > 0 required");
    if (!(theta > 0) || theta > 1.0)
      throw std::invalid_argument("ScaleSequence: theta in (0,1] required");
  }

  static ScaleSequence explicit_list(std::vector<double> values, bool clamp) {
    ScaleSequence s(1.0, 1.0, clamp);
    for (double v : values)
      if (!(v > 0))
        throw std::invalid_argument("ScaleSequence: values must be positive");
    s.values_ = std::move(values);
    return s;
  }

  double at(std::size_t i, std::int64_t n_points) const {
    double m;
    if (!values_.empty()) {
      m = values_.at(i);
    } else {
      m = c_ * std::pow(static_cast<double>(n_points), theta_);
    }
    if (clamp_) m = std::min(m, static_cast<double>(n_points));
    return m;
  }

  double c() const { return c_; }
  double theta() const { return theta_; }
  bool clamped() const { return clamp_; }

 private:
  double c_ = 1.0, theta_ = 1.0;
  bool clamp_ = true;
  std::vector<double> values_;
};

}  // namespace paircorr
