#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace paircorr {

/// Flat row-major storage for n points in R^dim.
struct PointSet {
  int dim = 1;
  std::vector<double> coords;

  PointSet() = default;
  explicit PointSet(int d) : dim(d) {
    if (d < 1) throw std::invalid_argument("PointSet: dim must be >= 1");
  }

  std::size_t size() const { return dim > 0 ? coords.size() / dim : 0; }
  bool empty() const { return coords.empty(); }

  const double* operator[](std::size_t j) const { return coords.data() + j * dim; }
  double* operator[](std::size_t j) { return coords.data() + j * dim; }

  void push_back(const double* x) { coords.insert(coords.end(), x, x + dim); }
  void push_back(std::initializer_list<double> x) {
    if (static_cast<int>(x.size()) != dim)
      throw std::invalid_argument("PointSet: wrong point dimension");
    coords.insert(coords.end(), x.begin(), x.end());
  }
  void reserve(std::size_t n) { coords.reserve(n * dim); }
};

inline double squared_distance(const double* a, const double* b, int d) {
  double s = 0;
  for (int k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

inline double euclidean_distance(const double* a, const double* b, int d) {
  return std::sqrt(squared_distance(a, b, d));
}

inline double norm(const double* a, int d) {
  double s = 0;
  for (int k = 0; k < d; ++k) s += a[k] * a[k];
  return std::sqrt(s);
}

inline double dot(const double* a, const double* b, int d) {
  double s = 0;
  for (int k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

/// Kahan compensated accumulator for long sums of small nonnegative terms.
struct CompensatedSum {
  double sum = 0, carry = 0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

}  // namespace paircorr
