#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "paircorr/points.hpp"

namespace paircorr {

/// Uniform-grid cell list over a bounding box. Cell size is at least the
/// cutoff per dimension, so all pairs within the cutoff live in adjacent
/// cells. Optional periodic wrap for points given in torus fractional
/// coordinates on [0,1)^d.
///
/// Storage is O(N + #cells): per-cell prefix offsets plus a permutation of
/// the point indices (counting sort).
class CellList {
 public:
  CellList(const double* coords, std::size_t n, int dim,
           const std::vector<double>& lo, const std::vector<double>& hi,
           const std::vector<double>& cutoff, bool periodic)
      : coords_(coords), n_(n), dim_(dim), lo_(lo), periodic_(periodic) {
    ncell_.resize(dim);
    cell_size_.resize(dim);
    std::size_t total = 1;
    for (int k = 0; k < dim; ++k) {
      const double len = hi[k] - lo[k];
      int nc = cutoff[k] > 0 ? static_cast<int>(std::floor(len / cutoff[k])) : 1;
      nc = std::max(1, std::min(nc, 1 << 20));
      // cap total cell count at ~4N so memory stays O(N)
      while (nc > 1 && total * nc > 4 * std::max<std::size_t>(n, 1))
        nc = (nc + 1) / 2;
      ncell_[k] = nc;
      cell_size_[k] = len / nc;
      total *= nc;
    }
    start_.assign(total + 1, 0);
    order_.resize(n);
    std::vector<std::size_t> cell_of(n);
    for (std::size_t j = 0; j < n; ++j) {
      cell_of[j] = cell_index(coords + j * dim);
      ++start_[cell_of[j] + 1];
    }
    for (std::size_t c = 0; c < total; ++c) start_[c + 1] += start_[c];
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t j = 0; j < n; ++j) order_[fill[cell_of[j]]++] = j;
  }

  /// Visit candidate indices in the 3^d cell neighborhood of x. Candidates
  /// include the query point itself if it is stored; callers filter.
  template <class F>
  void query(const double* x, F&& visit) const {
    std::array<int, 8> base{};
    for (int k = 0; k < dim_; ++k) base[k] = coord_cell(x[k], k);
    std::array<int, 8> off{};
    off.fill(-1);
    // with fewer than 3 cells in a dimension the wrapped neighborhood can
    // alias; dedupe by tracking visited cell ids
    const bool tiny = small_grid();
    if (tiny) scratch_.clear();
    while (true) {
      std::size_t cell = 0;
      bool valid = true;
      for (int k = 0; k < dim_; ++k) {
        int c = base[k] + off[k];
        if (periodic_) {
          if (c < 0) c += ncell_[k];
          else if (c >= ncell_[k]) c -= ncell_[k];
        } else if (c < 0 || c >= ncell_[k]) {
          valid = false;
          break;
        }
        cell = cell * ncell_[k] + c;
      }
      if (valid && (!tiny || mark(cell))) {
        for (std::size_t p = start_[cell]; p < start_[cell + 1]; ++p)
          visit(order_[p]);
      }
      int k = 0;
      for (; k < dim_; ++k) {
        if (++off[k] <= 1) break;
        off[k] = -1;
      }
      if (k == dim_) break;
    }
  }

 private:
  bool small_grid() const {
    for (int k = 0; k < dim_; ++k)
      if (ncell_[k] < 3) return true;
    return false;
  }

  bool mark(std::size_t cell) const {
    if (std::find(scratch_.begin(), scratch_.end(), cell) != scratch_.end())
      return false;
    scratch_.push_back(cell);
    return true;
  }

  int coord_cell(double v, int k) const {
    int c = static_cast<int>(std::floor((v - lo_[k]) / cell_size_[k]));
    return std::clamp(c, 0, ncell_[k] - 1);
  }

  std::size_t cell_index(const double* x) const {
    std::size_t cell = 0;
    for (int k = 0; k < dim_; ++k) cell = cell * ncell_[k] + coord_cell(x[k], k);
    return cell;
  }

  const double* coords_;
  std::size_t n_;
  int dim_;
  std::vector<double> lo_;
  bool periodic_;
  std::vector<int> ncell_;
  std::vector<double> cell_size_;
  std::vector<std::size_t> start_, order_;
  mutable std::vector<std::size_t> scratch_;
};

}  // namespace paircorr
