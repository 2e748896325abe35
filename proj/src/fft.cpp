#include "undulate/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>

namespace undulate {

struct PlaneFft::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  fftw_plan c2c_fwd = nullptr;
  fftw_plan c2c_bwd = nullptr;

  ~Plans() {
    for (fftw_plan p : {r2c, c2r, c2c_fwd, c2c_bwd})
      if (p) fftw_destroy_plan(p);
  }
};

namespace {

std::once_flag threads_once;

void check_alignment(const void* p) {
  if (fftw_alignment_of(reinterpret_cast<double*>(const_cast<void*>(p))) != 0)
    throw std::logic_error("PlaneFft: buffer not aligned for planned transform");
}

}  // namespace

void set_fft_threads(int threads) {
  std::call_once(threads_once, [] { fftw_init_threads(); });
  fftw_plan_with_nthreads(std::max(1, threads));
}

PlaneFft::PlaneFft(int nx, int ny, int batch, double kx0, double ky0)
    : nx_(nx), ny_(ny), batch_(batch), plans_(std::make_unique<Plans>()) {
  if (nx < 2 || ny < 2 || nx % 2 || ny % 2 || batch < 1)
    throw std::invalid_argument("PlaneFft: even sizes and positive batch required");

  const int n[2] = {ny, nx};
  const int nh[2] = {ny, nxh()};
  RealArray rbuf(full_size());
  ComplexArray hbuf(half_size());
  ComplexArray cbuf(full_size()), cbuf2(full_size());
  auto* h = reinterpret_cast<fftw_complex*>(hbuf.data());
  auto* c1 = reinterpret_cast<fftw_complex*>(cbuf.data());
  auto* c2 = reinterpret_cast<fftw_complex*>(cbuf2.data());
  const int rdist = static_cast<int>(real_slab());
  const int hdist = static_cast<int>(half_slab());

  plans_->r2c = fftw_plan_many_dft_r2c(2, n, batch, rbuf.data(), n, 1, rdist, h, nh, 1, hdist,
                                       FFTW_ESTIMATE);
  plans_->c2r = fftw_plan_many_dft_c2r(2, n, batch, h, nh, 1, hdist, rbuf.data(), n, 1, rdist,
                                       FFTW_ESTIMATE);
  plans_->c2c_fwd = fftw_plan_many_dft(2, n, batch, c1, n, 1, rdist, c2, n, 1, rdist,
                                       FFTW_FORWARD, FFTW_ESTIMATE);
  plans_->c2c_bwd = fftw_plan_many_dft(2, n, batch, c1, n, 1, rdist, c2, n, 1, rdist,
                                       FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plans_->r2c || !plans_->c2r || !plans_->c2c_fwd || !plans_->c2c_bwd)
    throw std::runtime_error("PlaneFft: FFTW planning failed");

  scratch_.resize(std::max(half_size(), full_size()));

  kx_half_.resize(nxh());
  kx_half_d_.resize(nxh());
  for (int i = 0; i < nxh(); ++i) {
    kx_half_[i] = kx0 * i;
    kx_half_d_[i] = (i == nx / 2) ? 0.0 : kx0 * i;
  }
  kx_full_.resize(nx);
  kx_full_d_.resize(nx);
  for (int i = 0; i < nx; ++i) {
    kx_full_[i] = kx0 * signed_frequency(i, nx);
    kx_full_d_[i] = (i == nx / 2) ? 0.0 : kx_full_[i];
  }
  ky_.resize(ny);
  ky_d_.resize(ny);
  for (int j = 0; j < ny; ++j) {
    ky_[j] = ky0 * signed_frequency(j, ny);
    ky_d_[j] = (j == ny / 2) ? 0.0 : ky_[j];
  }
}

PlaneFft::~PlaneFft() = default;

void PlaneFft::forward(const double* in, cplx* out) const {
  check_alignment(in);
  check_alignment(out);
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void PlaneFft::inverse(const cplx* in, double* out) const {
  check_alignment(out);
  // Multi-dimensional c2r always overwrites its input.
  std::copy(in, in + half_size(), scratch_.begin());
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(scratch_.data()), out);
  const double s = 1.0 / static_cast<double>(real_slab());
  for (std::size_t q = 0; q < full_size(); ++q) out[q] *= s;
}

void PlaneFft::forward(const cplx* in, cplx* out) const {
  check_alignment(in);
  check_alignment(out);
  fftw_execute_dft(plans_->c2c_fwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void PlaneFft::inverse(const cplx* in, cplx* out) const {
  check_alignment(in);
  check_alignment(out);
  fftw_execute_dft(plans_->c2c_bwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  const double s = 1.0 / static_cast<double>(real_slab());
  for (std::size_t q = 0; q < full_size(); ++q) out[q] *= s;
}

}  // namespace undulate

namespace undulate {

namespace {

const cplx I(0.0, 1.0);

}  // namespace

LateralOps::LateralOps(int nx, int ny, int batch, double kx0, double ky0)
    : fft_(nx, ny, batch, kx0, ky0),
      s0_(fft_.full_size()),
      s1_(fft_.full_size()),
      s2_(fft_.full_size()) {}

void LateralOps::gradient(const double* f, double* fx, double* fy) {
  const int nxh = fft_.nxh(), ny = fft_.ny();
  const auto& kx = fft_.kx_half_d();
  const auto& ky = fft_.ky_d();
  fft_.forward(f, s0_.data());
  for (int s = 0; s < fft_.batch(); ++s)
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = (static_cast<std::size_t>(s) * ny + j) * nxh;
      for (int i = 0; i < nxh; ++i) {
        s1_[row + i] = I * kx[i] * s0_[row + i];
        s2_[row + i] = I * ky[j] * s0_[row + i];
      }
    }
  fft_.inverse(s1_.data(), fx);
  fft_.inverse(s2_.data(), fy);
}

void LateralOps::laplacian(const double* f, double* out) {
  const int nxh = fft_.nxh(), ny = fft_.ny();
  const auto& kx = fft_.kx_half();
  const auto& ky = fft_.ky();
  fft_.forward(f, s0_.data());
  for (int s = 0; s < fft_.batch(); ++s)
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = (static_cast<std::size_t>(s) * ny + j) * nxh;
      for (int i = 0; i < nxh; ++i) s0_[row + i] *= -(kx[i] * kx[i] + ky[j] * ky[j]);
    }
  fft_.inverse(s0_.data(), out);
}

void LateralOps::derivative_laplacian(const double* f, double* out) {
  const int nxh = fft_.nxh(), ny = fft_.ny();
  const auto& kx = fft_.kx_half_d();
  const auto& ky = fft_.ky_d();
  fft_.forward(f, s0_.data());
  for (int s = 0; s < fft_.batch(); ++s)
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = (static_cast<std::size_t>(s) * ny + j) * nxh;
      for (int i = 0; i < nxh; ++i) s0_[row + i] *= -(kx[i] * kx[i] + ky[j] * ky[j]);
    }
  fft_.inverse(s0_.data(), out);
}

void LateralOps::divergence(const double* fx, const double* fy, double* out) {
  const int nxh = fft_.nxh(), ny = fft_.ny();
  const auto& kx = fft_.kx_half_d();
  const auto& ky = fft_.ky_d();
  fft_.forward(fx, s0_.data());
  fft_.forward(fy, s1_.data());
  for (int s = 0; s < fft_.batch(); ++s)
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = (static_cast<std::size_t>(s) * ny + j) * nxh;
      for (int i = 0; i < nxh; ++i)
        s0_[row + i] = I * (kx[i] * s0_[row + i] + ky[j] * s1_[row + i]);
    }
  fft_.inverse(s0_.data(), out);
}

void LateralOps::gradient(const cplx* f, cplx* fx, cplx* fy) {
  const int nx = fft_.nx(), ny = fft_.ny();
  const auto& kx = fft_.kx_full_d();
  const auto& ky = fft_.ky_d();
  fft_.forward(f, s0_.data());
  for (int s = 0; s < fft_.batch(); ++s)
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = (static_cast<std::size_t>(s) * ny + j) * nx;
      for (int i = 0; i < nx; ++i) {
        s1_[row + i] = I * kx[i] * s0_[row + i];
        s2_[row + i] = I * ky[j] * s0_[row + i];
      }
    }
  fft_.inverse(s1_.data(), fx);
  fft_.inverse(s2_.data(), fy);
}

void LateralOps::divergence(const cplx* fx, const cplx* fy, cplx* out) {
  const int nx = fft_.nx(), ny = fft_.ny();
  const auto& kx = fft_.kx_full_d();
  const auto& ky = fft_.ky_d();
  fft_.forward(fx, s0_.data());
  fft_.forward(fy, s1_.data());
  for (int s = 0; s < fft_.batch(); ++s)
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = (static_cast<std::size_t>(s) * ny + j) * nx;
      for (int i = 0; i < nx; ++i)
        s0_[row + i] = I * (kx[i] * s0_[row + i] + ky[j] * s1_[row + i]);
    }
  fft_.inverse(s0_.data(), out);
}

}  // namespace undulate
