#pragma once

#include <memory>
#include <vector>

#include "undulate/aligned.hpp"

namespace undulate {

/// Sets the thread count used by FFT plans created after the call.
void set_fft_threads(int threads);

/// Batched 2D transforms over `batch` contiguous nx-by-ny slabs (x fastest).
///
/// Real fields use the half spectrum (ny rows of nx/2+1 entries); complex
/// fields use the full spectrum. Forward transforms are unnormalized and
/// inverse transforms divide by nx*ny, so inverse(forward(f)) == f.
class PlaneFft {
 public:
  /// kx0, ky0: fundamental wave numbers (2*pi over the period in each direction).
  PlaneFft(int nx, int ny, int batch, double kx0, double ky0);
  ~PlaneFft();
  PlaneFft(const PlaneFft&) = delete;
  PlaneFft& operator=(const PlaneFft&) = delete;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nxh() const { return nx_ / 2 + 1; }
  int batch() const { return batch_; }
  std::size_t real_slab() const { return static_cast<std::size_t>(nx_) * ny_; }
  std::size_t half_slab() const { return static_cast<std::size_t>(nxh()) * ny_; }
  std::size_t half_size() const { return half_slab() * batch_; }
  std::size_t full_size() const { return real_slab() * batch_; }

  void forward(const double* in, cplx* out) const;
  void inverse(const cplx* in, double* out) const;
  void forward(const cplx* in, cplx* out) const;
  void inverse(const cplx* in, cplx* out) const;

  /// Wave numbers. `kx_half[i]` covers the half spectrum, `kx_full[i]` the full
  /// one, `ky[j]` both. The `_d` variants have the Nyquist entry zeroed and are
  /// the symbols of the first-derivative operator; k^2 symbols use the plain ones.
  const std::vector<double>& kx_half() const { return kx_half_; }
  const std::vector<double>& kx_half_d() const { return kx_half_d_; }
  const std::vector<double>& kx_full() const { return kx_full_; }
  const std::vector<double>& kx_full_d() const { return kx_full_d_; }
  const std::vector<double>& ky() const { return ky_; }
  const std::vector<double>& ky_d() const { return ky_d_; }

 private:
  struct Plans;
  int nx_, ny_, batch_;
  std::unique_ptr<Plans> plans_;
  mutable ComplexArray scratch_;
  std::vector<double> kx_half_, kx_half_d_, kx_full_, kx_full_d_, ky_, ky_d_;
};

/// Signed integer frequency of index i on an n-point periodic lattice.
inline int signed_frequency(int i, int n) { return i <= n / 2 ? i : i - n; }

}  // namespace undulate

namespace undulate {

/// Lateral differential operators applied slab-by-slab through a PlaneFft.
/// First derivatives drop the Nyquist mode; `laplacian` keeps it, so
/// <f, -laplacian f> is the exact spectral Dirichlet energy of the lattice data.
class LateralOps {
 public:
  LateralOps(int nx, int ny, int batch, double kx0, double ky0);

  const PlaneFft& fft() const { return fft_; }

  void gradient(const double* f, double* fx, double* fy);
  void laplacian(const double* f, double* out);
  /// D_x D_x + D_y D_y, the Nyquist-free composition of first derivatives.
  void derivative_laplacian(const double* f, double* out);
  void divergence(const double* fx, const double* fy, double* out);

  void gradient(const cplx* f, cplx* fx, cplx* fy);
  void divergence(const cplx* fx, const cplx* fy, cplx* out);

 private:
  PlaneFft fft_;
  ComplexArray s0_, s1_, s2_;
};

}  // namespace undulate
