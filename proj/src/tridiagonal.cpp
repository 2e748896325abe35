#include "undulate/tridiagonal.hpp"

#include <cmath>
#include <stdexcept>

namespace undulate {

TridiagonalBatch::TridiagonalBatch(int n, const std::vector<double>& diag,
                                   const std::vector<double>& off)
    : n_(n), m_(diag.size()), off_(off) {
  if (n < 1 || off.size() != diag.size())
    throw std::invalid_argument("TridiagonalBatch: inconsistent sizes");
  inv_pivot_.resize(static_cast<std::size_t>(n) * m_);
  upper_.resize(static_cast<std::size_t>(n) * m_);
  for (std::size_t q = 0; q < m_; ++q) {
    double pivot = diag[q];
    for (int k = 0; k < n; ++k) {
      if (k > 0) pivot = diag[q] - off[q] * upper_[(k - 1) * m_ + q];
      if (std::abs(pivot) < 1e-300) throw std::domain_error("TridiagonalBatch: singular system");
      inv_pivot_[k * m_ + q] = 1.0 / pivot;
      upper_[k * m_ + q] = off[q] / pivot;
    }
  }
}

}  // namespace undulate
