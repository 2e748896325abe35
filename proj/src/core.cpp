#include "undulate/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "undulate/random.hpp"

namespace undulate {

namespace {

using std::numbers::pi;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::domain_error(std::string(name) + " must be positive and finite");
}

// Number of lowest Fourier modes per direction used by the random perturbation.
constexpr int kBandModes = 8;

// Lateral random field sum_{m,n} A cos(am x + bn y) + B sin(...) over |m|,|n| < kBandModes,
// one per z-harmonic, then combined with sin(l (z + pi/2)).
struct BandLimited {
  int nx, ny;
  std::vector<double> cos_x, sin_x, cos_y, sin_y;  // tables [m][i]
  int mmax, nmax;

  BandLimited(int nx_, int ny_, int mmax_, int nmax_)
      : nx(nx_), ny(ny_), mmax(mmax_), nmax(nmax_) {
    cos_x.resize((mmax + 1) * nx);
    sin_x.resize((mmax + 1) * nx);
    cos_y.resize((nmax + 1) * ny);
    sin_y.resize((nmax + 1) * ny);
    for (int m = 0; m <= mmax; ++m)
      for (int i = 0; i < nx; ++i) {
        const double t = 2.0 * pi * m * i / nx;
        cos_x[m * nx + i] = std::cos(t);
        sin_x[m * nx + i] = std::sin(t);
      }
    for (int n = 0; n <= nmax; ++n)
      for (int j = 0; j < ny; ++j) {
        const double t = 2.0 * pi * n * j / ny;
        cos_y[n * ny + j] = std::cos(t);
        sin_y[n * ny + j] = std::sin(t);
      }
  }

  // Random trigonometric polynomial on the lattice (x fastest). Modes with
  // m = 0 use only n >= 0 so each real mode appears once.
  std::vector<double> draw(Rng& rng, double decay) const {
    std::vector<double> out(static_cast<std::size_t>(nx) * ny, 0.0);
    for (int m = 0; m <= mmax; ++m) {
      for (int n = -nmax; n <= nmax; ++n) {
        if (m == 0 && n < 0) continue;
        const double w = 1.0 / (1.0 + decay * (m * m + n * n));
        const double ca = w * rng.uniform(-1.0, 1.0);
        const double cb = (m == 0 && n == 0) ? 0.0 : w * rng.uniform(-1.0, 1.0);
        const int an = std::abs(n);
        const double sgn = n < 0 ? -1.0 : 1.0;
        for (int j = 0; j < ny; ++j) {
          const double cy = cos_y[an * ny + j];
          const double sy = sgn * sin_y[an * ny + j];
          double* row = out.data() + static_cast<std::size_t>(j) * nx;
          for (int i = 0; i < nx; ++i) {
            const double cx = cos_x[m * nx + i];
            const double sx = sin_x[m * nx + i];
            // cos(tx + ty), sin(tx + ty)
            row[i] += ca * (cx * cy - sx * sy) + cb * (sx * cy + cx * sy);
          }
        }
      }
    }
    return out;
  }
};

void scale_to_unit_max(std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m > 0.0)
    for (double& x : v) x /= m;
}

// Draws a band-limited field over all interior slabs of the 3D grid; the
// z-dependence is a random combination of sin(l (z + pi/2)), l = 1..kBandModes.
std::vector<double> band_limited_3d(const Grid3D& g, Rng& rng) {
  const int mmax = std::min(kBandModes - 1, g.nx() / 2 - 1);
  const int nmax = std::min(kBandModes - 1, g.ny() / 2 - 1);
  const int lmax = std::min(kBandModes, g.nz());
  BandLimited lateral(g.nx(), g.ny(), mmax, nmax);
  std::vector<double> out(g.size(), 0.0);
  for (int l = 1; l <= lmax; ++l) {
    const auto layer = lateral.draw(rng, 0.0);
    for (int k = 1; k <= g.nz(); ++k) {
      const double s = std::sin(l * (g.z(k) + 0.5 * pi));
      double* dst = out.data() + g.index(0, 0, k);
      for (std::size_t q = 0; q < g.slab(); ++q) dst[q] += s * layer[q];
    }
  }
  scale_to_unit_max(out);
  return out;
}

}  // namespace

void Parameters::validate() const {
  require_positive(eps, "eps");
  require_positive(c, "c");
  require_positive(g, "g");
  require_positive(a, "a");
  require_positive(b, "b");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::domain_error("tau must be nonnegative");
  if (delta && !(*delta > 1.0 && *delta < 2.0))
    throw std::domain_error("delta must satisfy 1 < delta < 2");
}

double penetration_length(const MaterialParameters& mat) {
  return std::sqrt(mat.K / (mat.C * mat.q * mat.q));
}

Parameters derive_dimensionless(const MaterialParameters& mat) {
  require_positive(mat.K, "K");
  require_positive(mat.C, "C");
  require_positive(mat.g0, "g0");
  require_positive(mat.r_temp, "r_temp");
  require_positive(mat.q, "q");
  require_positive(mat.chi_a_abs, "chi_a_abs");
  require_positive(mat.H_mag, "H_mag");
  require_positive(mat.d0, "d0");
  require_positive(mat.L1, "L1");
  require_positive(mat.L2, "L2");

  const double lambda = penetration_length(mat);
  const double d = 2.0 * mat.d0 / pi;
  Parameters p;
  p.eps = (lambda / d) * std::sqrt(mat.g0 / mat.r_temp);
  p.tau = mat.chi_a_abs * mat.H_mag * mat.H_mag * d * d * p.eps / mat.K;
  p.c = std::sqrt(mat.C * mat.r_temp / (mat.K * mat.g0));
  p.g = mat.r_temp / (mat.C * mat.q * mat.q);
  p.a = 2.0 * mat.d0 / mat.L1;
  p.b = 2.0 * mat.d0 / mat.L2;
  return p;
}

Grid3D::Grid3D(int nx, int ny, int nz, double a, double b)
    : nx_(nx), ny_(ny), nz_(nz), a_(a), b_(b) {
  if (nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0)
    throw std::domain_error("Grid3D: nx, ny must be even and >= 4");
  if (nz < 3) throw std::domain_error("Grid3D: nz must be >= 3");
  require_positive(a, "a");
  require_positive(b, "b");
  hx_ = (2.0 * pi / a) / nx;
  hy_ = (2.0 * pi / b) / ny;
  hz_ = pi / (nz + 1);
}

double Grid3D::x(int i) const { return -pi / a_ + i * hx_; }
double Grid3D::y(int j) const { return -pi / b_ + j * hy_; }
double Grid3D::z(int k) const {
  if (k == nz_ + 1) return 0.5 * pi;
  return -0.5 * pi + k * hz_;
}
double Grid3D::lateral_area() const { return (2.0 * pi / a_) * (2.0 * pi / b_); }

Grid2D::Grid2D(int n) : n_(n) {
  if (n < 4 || n % 2 != 0) throw std::domain_error("Grid2D: n must be even and >= 4");
}

cplx boundary_psi(const Parameters& p, bool top) {
  const double phase = (top ? 0.5 : -0.5) * pi / p.ceps();
  return std::polar(1.0, phase);
}

Field3D uniform_state(const Parameters& p, const Grid3D& grid) {
  p.validate();
  Field3D f(grid);
  const double inv = 1.0 / p.ceps();
  for (int k = 0; k < grid.nz_total(); ++k) {
    cplx value = std::polar(1.0, grid.z(k) * inv);
    if (k == 0) value = boundary_psi(p, false);
    if (k == grid.nz() + 1) value = boundary_psi(p, true);
    const std::size_t off = grid.index(0, 0, k);
    for (std::size_t q = 0; q < grid.slab(); ++q) {
      f.psi[off + q] = value;
      f.n1[off + q] = 0.0;
      f.n2[off + q] = 0.0;
      f.n3[off + q] = 1.0;
    }
  }
  return f;
}

Field3D perturbed_state(const Parameters& p, const Grid3D& grid, double eta, std::uint64_t seed) {
  if (!(eta >= 0.0)) throw std::domain_error("eta must be nonnegative");
  Field3D f = uniform_state(p, grid);
  if (eta == 0.0) return f;

  Rng rng(seed);
  const auto u1 = band_limited_3d(grid, rng);
  const auto u2 = band_limited_3d(grid, rng);
  const auto u3 = band_limited_3d(grid, rng);
  const auto pr = band_limited_3d(grid, rng);
  const auto pi_ = band_limited_3d(grid, rng);

  // psi perturbation scaled so that its modulus never exceeds one.
  double pmax = 0.0;
  for (std::size_t q = 0; q < grid.size(); ++q) pmax = std::max(pmax, std::hypot(pr[q], pi_[q]));
  const double pscale = pmax > 0.0 ? 1.0 / pmax : 0.0;

  for (int k = 1; k <= grid.nz(); ++k) {
    const std::size_t off = grid.index(0, 0, k);
    for (std::size_t q = off; q < off + grid.slab(); ++q) {
      const double a1 = eta * u1[q];
      const double a2 = eta * u2[q];
      const double a3 = 1.0 + eta * u3[q];
      const double inv = 1.0 / std::sqrt(a1 * a1 + a2 * a2 + a3 * a3);
      f.n1[q] = a1 * inv;
      f.n2[q] = a2 * inv;
      f.n3[q] = a3 * inv;
      f.psi[q] += eta * pscale * cplx(pr[q], pi_[q]);
    }
  }
  return f;
}

Field2D perturbed_state_2d(const Grid2D& grid, double eta, std::uint64_t seed, int max_mode) {
  if (!(eta >= 0.0)) throw std::domain_error("eta must be nonnegative");
  if (max_mode < 1) throw std::domain_error("max_mode must be >= 1");
  Field2D f(grid);
  if (eta == 0.0) return f;

  Rng rng(seed);
  const int mmax = std::min(max_mode, grid.n() / 2 - 1);
  BandLimited lateral(grid.n(), grid.n(), mmax, mmax);
  auto u1 = lateral.draw(rng, 0.0);
  auto u2 = lateral.draw(rng, 0.0);
  auto u3 = lateral.draw(rng, 0.0);
  auto p0 = lateral.draw(rng, 0.0);
  scale_to_unit_max(u1);
  scale_to_unit_max(u2);
  scale_to_unit_max(u3);
  scale_to_unit_max(p0);

  double pm = 0.0;
  for (double v : p0) pm += v;
  pm /= static_cast<double>(p0.size());

  for (std::size_t q = 0; q < grid.size(); ++q) {
    const double a1 = eta * u1[q];
    const double a2 = eta * u2[q];
    const double a3 = 1.0 + eta * u3[q];
    const double inv = 1.0 / std::sqrt(a1 * a1 + a2 * a2 + a3 * a3);
    f.n1[q] = a1 * inv;
    f.n2[q] = a2 * inv;
    f.n3[q] = a3 * inv;
    f.phi[q] = eta * (p0[q] - pm);
  }
  return f;
}

void impose_boundary(Field3D& f, const Parameters& p) {
  const Grid3D& g = f.grid;
  const cplx bottom = boundary_psi(p, false);
  const cplx top = boundary_psi(p, true);
  for (int k : {0, g.nz() + 1}) {
    const cplx value = k == 0 ? bottom : top;
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t q = off; q < off + g.slab(); ++q) {
      f.psi[q] = value;
      f.n1[q] = 0.0;
      f.n2[q] = 0.0;
      f.n3[q] = 1.0;
    }
  }
}

double max_unit_defect(const RealArray& n1, const RealArray& n2, const RealArray& n3) {
  double worst = 0.0;
  for (std::size_t q = 0; q < n1.size(); ++q) {
    const double norm = std::sqrt(n1[q] * n1[q] + n2[q] * n2[q] + n3[q] * n3[q]);
    worst = std::max(worst, std::abs(norm - 1.0));
  }
  return worst;
}

double max_boundary_defect(const Field3D& f, const Parameters& p) {
  const Grid3D& g = f.grid;
  double worst = 0.0;
  for (int k : {0, g.nz() + 1}) {
    const cplx value = boundary_psi(p, k != 0);
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t q = off; q < off + g.slab(); ++q) {
      worst = std::max(worst, std::abs(f.psi[q] - value));
      worst = std::max({worst, std::abs(f.n1[q]), std::abs(f.n2[q]), std::abs(f.n3[q] - 1.0)});
    }
  }
  return worst;
}

double mean(const RealArray& values) {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

}  // namespace undulate
