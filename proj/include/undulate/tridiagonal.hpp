#pragma once

#include <cstddef>
#include <vector>

namespace undulate {

/// Many independent constant-coefficient tridiagonal systems of the same length,
///   off[q] x[k-1][q] + diag[q] x[k][q] + off[q] x[k+1][q] = r[k][q],  k = 0..n-1,
/// stored with the system index q fastest so each sweep runs over contiguous rows.
/// The Thomas factors are computed once at construction.
class TridiagonalBatch {
 public:
  TridiagonalBatch() = default;
  TridiagonalBatch(int n, const std::vector<double>& diag, const std::vector<double>& off);

  int length() const { return n_; }
  std::size_t systems() const { return m_; }

  /// Solves in place; `data` holds n rows of `systems()` entries each.
  template <class T>
  void solve(T* data) const {
    const std::size_t m = m_;
    for (std::size_t q = 0; q < m; ++q) data[q] *= inv_pivot_[q];
    for (int k = 1; k < n_; ++k) {
      T* row = data + k * m;
      const T* prev = row - m;
      const double* ip = inv_pivot_.data() + k * m;
      for (std::size_t q = 0; q < m; ++q) row[q] = (row[q] - off_[q] * prev[q]) * ip[q];
    }
    for (int k = n_ - 2; k >= 0; --k) {
      T* row = data + k * m;
      const T* next = row + m;
      const double* u = upper_.data() + k * m;
      for (std::size_t q = 0; q < m; ++q) row[q] -= u[q] * next[q];
    }
  }

 private:
  int n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> off_;
  std::vector<double> inv_pivot_;  // 1 / modified diagonal
  std::vector<double> upper_;      // modified super-diagonal
};

}  // namespace undulate
