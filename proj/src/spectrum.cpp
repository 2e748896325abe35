#include "undulate/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "undulate/fft.hpp"

namespace undulate {

namespace {

void require_l(const ModeIndex& mode) {
  if (mode.l < 1) throw std::domain_error("mode index l must be >= 1");
}

double p2_of(const ModeIndex& mode, const Parameters& p) {
  const double al = p.a * mode.m;
  const double be = p.b * mode.n;
  return al * al + be * be + static_cast<double>(mode.l) * mode.l;
}

void require_zero_boundary(const RealArray& f, const Grid3D& g) {
  for (int k : {0, g.nz() + 1}) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t q = off; q < off + g.slab(); ++q)
      if (f[q] != 0.0) throw std::invalid_argument("displacement must vanish on z-boundaries");
  }
}

// Compact second difference in z with zero Dirichlet data, added to out.
void add_z_second_difference(const RealArray& f, const Grid3D& g, double coeff, RealArray& out) {
  const double s = coeff / (g.hz() * g.hz());
  const std::size_t slab = g.slab();
  for (int k = 1; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t q = off; q < off + slab; ++q)
      out[q] += s * (f[q + slab] - 2.0 * f[q] + f[q - slab]);
  }
}

void zero_boundary(RealArray& f, const Grid3D& g) {
  for (int k : {0, g.nz() + 1}) {
    const std::size_t off = g.index(0, 0, k);
    std::fill(f.begin() + off, f.begin() + off + g.slab(), 0.0);
  }
}

}  // namespace

double critical_field(const ModeIndex& mode, const Parameters& p) {
  require_l(mode);
  const double p2 = p2_of(mode, p);
  const double l2 = static_cast<double>(mode.l) * mode.l;
  return p.eps * p2 + (l2 / p2) / p.eps;
}

std::pair<double, double> eigenvalues(const ModeIndex& mode, double tau, const Parameters& p) {
  require_l(mode);
  // Quadratic in x = lambda eps: x^2 - B x + C = 0.
  const double p2 = p2_of(mode, p);
  const double l2 = static_cast<double>(mode.l) * mode.l;
  const double e = p.eps;
  const double B = p2 * (1.0 + e * e) - tau * e + 1.0;
  const double C = e * e * p2 * p2 - tau * e * p2 + l2;
  const double disc = B * B - 4.0 * C;
  if (disc < 0.0) {
    std::ostringstream msg;
    msg << "complex eigenvalues: discriminant " << disc;
    throw std::domain_error(msg.str());
  }
  double x1 = 0.0, x2 = 0.0;
  const double q = 0.5 * (B + std::copysign(std::sqrt(disc), B));
  if (q != 0.0) {
    x1 = q;
    x2 = C / q;
  }
  if (x1 > x2) std::swap(x1, x2);
  return {x1 / e, x2 / e};
}

double eigenvalue_slope(const ModeIndex& mode, const Parameters& p) {
  require_l(mode);
  const double p2 = p2_of(mode, p);
  const double l2 = static_cast<double>(mode.l) * mode.l;
  return p2 / (l2 / p2 - p2 - 1.0);
}

ModeSpectrum analyze_mode(const ModeIndex& mode, double tau, const Parameters& p) {
  ModeSpectrum s;
  s.mode = mode;
  s.alpha = p.a * mode.m;
  s.beta = p.b * mode.n;
  s.p2 = p2_of(mode, p);
  s.tau_crit = critical_field(mode, p);
  s.slope = eigenvalue_slope(mode, p);
  s.lambda_roots = eigenvalues(mode, tau, p);
  return s;
}

CriticalField global_critical_field(const Parameters& p, const SearchBounds& bounds,
                                    bool disallow_axial) {
  if (bounds.m_max < 1 || bounds.n_max < 1 || bounds.l_max < 1)
    throw std::domain_error("search bounds must be >= 1");
  CriticalField out;
  out.tau_c = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, ModeIndex>> all;
  for (int l = 1; l <= bounds.l_max; ++l)
    for (int m = 0; m <= bounds.m_max; ++m)
      for (int n = 0; n <= bounds.n_max; ++n) {
        if (disallow_axial && m == 0 && n == 0) continue;
        const ModeIndex mode{m, n, l};
        const double t = critical_field(mode, p);
        all.emplace_back(t, mode);
        out.tau_c = std::min(out.tau_c, t);
      }
  const double tie = 1e-12 * std::max(1.0, std::abs(out.tau_c));
  for (const auto& [t, mode] : all)
    if (t - out.tau_c <= tie) out.argmin.push_back(mode);
  for (const auto& mode : out.argmin)
    if (mode.m == bounds.m_max || mode.n == bounds.n_max || mode.l == bounds.l_max)
      throw std::domain_error("bounds too small: minimizer on the search boundary");
  return out;
}

double parity_profile(int l, double z) {
  return (l % 2 == 1) ? std::cos(l * z) : std::sin(l * z);
}

EigenProfile eigenfunction(const ModeIndex& mode, double lambda, const Parameters& p,
                           const Grid3D& grid) {
  require_l(mode);
  if (mode.m == 0 && mode.n == 0)
    throw std::domain_error("eigenfunction: axial mode (0,0) is not supported");
  EigenProfile e;
  e.mode = mode;
  e.lambda = lambda;
  const double al = p.a * mode.m;
  const double be = p.b * mode.n;
  const double k2 = al * al + be * be;
  const double p2 = p2_of(mode, p);
  e.amplitude = {cplx(0.0, al / k2), cplx(0.0, be / k2), cplx(1.0 / (p2 - lambda * p.eps), 0.0)};
  e.f.resize(grid.nz_total());
  for (int k = 0; k < grid.nz_total(); ++k) e.f[k] = parity_profile(mode.l, grid.z(k));
  // Exact zeros on the plates rather than cos(l pi/2) roundoff.
  e.f.front() = 0.0;
  e.f.back() = 0.0;
  return e;
}

DisplacementField eigenmode_field(const EigenProfile& e, const Grid3D& grid, double scale) {
  DisplacementField u(grid);
  RealArray* comp[3] = {&u.w1, &u.w2, &u.v};
  std::vector<cplx> phase(grid.slab());
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const double th = grid.a() * e.mode.m * grid.x(i) + grid.b() * e.mode.n * grid.y(j);
      phase[static_cast<std::size_t>(j) * grid.nx() + i] = std::polar(1.0, th);
    }
  for (int k = 1; k <= grid.nz(); ++k) {
    const std::size_t off = grid.index(0, 0, k);
    for (int c = 0; c < 3; ++c) {
      const cplx amp = scale * e.value(c, k);
      for (std::size_t q = 0; q < grid.slab(); ++q) (*comp[c])[off + q] = (amp * phase[q]).real();
    }
  }
  return u;
}

DisplacementField apply_L(const DisplacementField& u, double tau, const Parameters& p) {
  const Grid3D& g = u.grid;
  require_zero_boundary(u.w1, g);
  require_zero_boundary(u.w2, g);
  require_zero_boundary(u.v, g);
  const double e = p.eps;
  LateralOps ops(g.nx(), g.ny(), g.nz_total(), g.a(), g.b());

  DisplacementField out(g);
  RealArray vx(g.size()), vy(g.size()), tmp(g.size());

  // w-part: -eps lap w - (1/eps) grad v + (1/eps - tau) w
  ops.gradient(u.v.data(), vx.data(), vy.data());
  const RealArray* w[2] = {&u.w1, &u.w2};
  RealArray* ow[2] = {&out.w1, &out.w2};
  const RealArray* gv[2] = {&vx, &vy};
  for (int c = 0; c < 2; ++c) {
    ops.laplacian(w[c]->data(), tmp.data());
    add_z_second_difference(*w[c], g, 1.0, tmp);
    RealArray& o = *ow[c];
    for (std::size_t q = 0; q < g.size(); ++q)
      o[q] = -e * tmp[q] - (*gv[c])[q] / e + (1.0 / e - tau) * (*w[c])[q];
  }

  // v-part: -(1/eps) lap v + (1/eps) div w
  ops.derivative_laplacian(u.v.data(), tmp.data());
  add_z_second_difference(u.v, g, 1.0, tmp);
  RealArray div(g.size());
  ops.divergence(u.w1.data(), u.w2.data(), div.data());
  for (std::size_t q = 0; q < g.size(); ++q) out.v[q] = (-tmp[q] + div[q]) / e;

  zero_boundary(out.w1, g);
  zero_boundary(out.w2, g);
  zero_boundary(out.v, g);
  return out;
}

double inner_product(const DisplacementField& f, const DisplacementField& g) {
  const Grid3D& gr = f.grid;
  double s = 0.0;
  for (int k = 1; k <= gr.nz(); ++k) {
    const std::size_t off = gr.index(0, 0, k);
    double slab = 0.0;
    for (std::size_t q = off; q < off + gr.slab(); ++q)
      slab += f.w1[q] * g.w1[q] + f.w2[q] * g.w2[q] + f.v[q] * g.v[q];
    s += slab;
  }
  return s * gr.cell_volume();
}

std::vector<ModeIndex> detect_resonances(const ModeIndex& mode0, const Parameters& p,
                                         const SearchBounds& bounds, double tol) {
  const double t0 = critical_field(mode0, p);
  const ModeIndex self{std::abs(mode0.m), std::abs(mode0.n), mode0.l};
  std::vector<ModeIndex> out;
  for (int l = 1; l <= bounds.l_max; ++l)
    for (int m = 0; m <= bounds.m_max; ++m)
      for (int n = 0; n <= bounds.n_max; ++n) {
        const ModeIndex mode{m, n, l};
        if (mode == self) continue;
        if (std::abs(critical_field(mode, p) - t0) <= tol * std::abs(t0)) out.push_back(mode);
      }
  return out;
}

}  // namespace undulate
