#include "undulate/energy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace undulate {

namespace {

const cplx I(0.0, 1.0);

void require_unit(const RealArray& n1, const RealArray& n2, const RealArray& n3) {
  if (max_unit_defect(n1, n2, n3) > 1e-6)
    throw std::domain_error("director is not unit length; renormalize first");
}

// Trapezoid weight in z relative to hz.
double z_weight(const Grid3D& g, int k) { return (k == 0 || k == g.nz() + 1) ? 0.5 : 1.0; }

}  // namespace

Energy3D::Energy3D(const Grid3D& grid, const Parameters& p)
    : grid_(grid),
      p_(p),
      ops_(grid.nx(), grid.ny(), grid.nz_total(), grid.a(), grid.b()),
      dx_(grid.size()),
      dy_(grid.size()),
      rx_(grid.size()),
      ry_(grid.size()),
      tmp_(grid.size()),
      sz_(grid.slab() * (grid.nz() + 1)),
      link_(grid.slab() * (grid.nz() + 1)),
      lap_(grid.size()) {
  p.validate();
}

void Energy3D::lateral_residuals(const Field3D& s) {
  const double ce = p_.ceps();
  ops_.gradient(s.psi.data(), dx_.data(), dy_.data());
  for (std::size_t q = 0; q < grid_.size(); ++q) {
    rx_[q] = ce * dx_[q] - I * s.n1[q] * s.psi[q];
    ry_[q] = ce * dy_[q] - I * s.n2[q] * s.psi[q];
  }
}

void Energy3D::z_residuals(const Field3D& s) {
  const std::size_t slab = grid_.slab();
  const double scale = grid_.hz() / (2.0 * p_.ceps());
  for (int k = 0; k <= grid_.nz(); ++k) {
    const std::size_t lo = grid_.index(0, 0, k);
    const std::size_t h = static_cast<std::size_t>(k) * slab;
    for (std::size_t q = 0; q < slab; ++q) {
      const double A = scale * (s.n3[lo + q] + s.n3[lo + slab + q]);
      link_[h + q] = std::polar(1.0, A);
      sz_[h + q] = s.psi[lo + slab + q] - link_[h + q] * s.psi[lo + q];
    }
  }
}

EnergyBreakdown Energy3D::energy(const Field3D& s) {
  require_unit(s.n1, s.n2, s.n3);
  const Grid3D& g = grid_;
  const double e = p_.eps;
  const double hz = g.hz();
  const double area = g.hx() * g.hy();
  const std::size_t slab = g.slab();
  EnergyBreakdown out;

  lateral_residuals(s);
  z_residuals(s);
  double comp_lat = 0.0, pot = 0.0, mag = 0.0;
  for (int k = 0; k < g.nz_total(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    double c = 0.0, pp = 0.0, m = 0.0;
    for (std::size_t q = off; q < off + slab; ++q) {
      c += std::norm(rx_[q]) + std::norm(ry_[q]);
      const double d = 1.0 - std::norm(s.psi[q]);
      pp += d * d;
      m += s.n1[q] * s.n1[q] + s.n2[q] * s.n2[q];
    }
    const double w = z_weight(g, k);
    comp_lat += w * c;
    pot += w * pp;
    mag += w * m;
  }
  double comp_z = 0.0;
  for (int k = 0; k <= g.nz(); ++k) {
    double c = 0.0;
    const std::size_t h = static_cast<std::size_t>(k) * slab;
    for (std::size_t q = h; q < h + slab; ++q) c += std::norm(sz_[q]);
    comp_z += c;
  }
  const double ce = p_.ceps();
  out.compression = area * hz * (comp_lat / e + comp_z * ce * ce / (e * hz * hz));
  out.potential = area * hz * pot * p_.g / (2.0 * e);
  out.magnetic = -area * hz * p_.tau * mag;

  double frank_lat = 0.0, frank_z = 0.0;
  for (const RealArray* n : {&s.n1, &s.n2, &s.n3}) {
    ops_.laplacian(n->data(), lap_.data());
    for (int k = 0; k < g.nz_total(); ++k) {
      const std::size_t off = g.index(0, 0, k);
      double f = 0.0;
      for (std::size_t q = off; q < off + slab; ++q) f -= (*n)[q] * lap_[q];
      frank_lat += z_weight(g, k) * f;
    }
    for (int k = 0; k <= g.nz(); ++k) {
      const std::size_t off = g.index(0, 0, k);
      double f = 0.0;
      for (std::size_t q = off; q < off + slab; ++q) {
        const double d = (*n)[q + slab] - (*n)[q];
        f += d * d;
      }
      frank_z += f;
    }
  }
  out.frank = e * area * hz * (frank_lat + frank_z / (hz * hz));
  out.total = out.compression + out.frank + out.potential + out.magnetic;
  return out;
}

void Energy3D::psi_gradient(const Field3D& s, ComplexArray& out) {
  const Grid3D& g = grid_;
  const double e = p_.eps;
  const double ce = p_.ceps();
  const std::size_t slab = g.slab();
  lateral_residuals(s);
  z_residuals(s);
  ops_.divergence(rx_.data(), ry_.data(), tmp_.data());
  const double cz = 2.0 * ce * ce / (e * g.hz() * g.hz());
  std::fill(out.begin(), out.end(), cplx(0.0));
  for (int k = 1; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    const std::size_t below = static_cast<std::size_t>(k - 1) * slab;
    const std::size_t above = static_cast<std::size_t>(k) * slab;
    for (std::size_t q = 0; q < slab; ++q) {
      const std::size_t i = off + q;
      const cplx lat = -ce * tmp_[i] + I * (s.n1[i] * rx_[i] + s.n2[i] * ry_[i]);
      const cplx zt = sz_[below + q] - std::conj(link_[above + q]) * sz_[above + q];
      const double d = 1.0 - std::norm(s.psi[i]);
      out[i] = (2.0 / e) * lat + cz * zt - (2.0 * p_.g / e) * d * s.psi[i];
    }
  }
}

void Energy3D::n_coupling_gradient(const Field3D& s, RealArray& g1, RealArray& g2, RealArray& g3) {
  const Grid3D& g = grid_;
  const double e = p_.eps;
  const std::size_t slab = g.slab();
  lateral_residuals(s);
  z_residuals(s);
  const double cz = p_.c / g.hz();
  std::fill(g1.begin(), g1.end(), 0.0);
  std::fill(g2.begin(), g2.end(), 0.0);
  std::fill(g3.begin(), g3.end(), 0.0);
  for (int k = 1; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    const std::size_t below = static_cast<std::size_t>(k - 1) * slab;
    const std::size_t above = static_cast<std::size_t>(k) * slab;
    for (std::size_t q = 0; q < slab; ++q) {
      const std::size_t i = off + q;
      g1[i] = (2.0 / e) * (std::conj(rx_[i]) * s.psi[i]).imag();
      g2[i] = (2.0 / e) * (std::conj(ry_[i]) * s.psi[i]).imag();
      const cplx lo = std::conj(sz_[below + q]) * link_[below + q] * s.psi[i - slab];
      const cplx hi = std::conj(sz_[above + q]) * link_[above + q] * s.psi[i];
      g3[i] = cz * (lo.imag() + hi.imag());
    }
  }
}

void Energy3D::gradient(const Field3D& s, Gradient3D& out) {
  const Grid3D& g = grid_;
  const std::size_t slab = g.slab();
  psi_gradient(s, out.psi);
  n_coupling_gradient(s, out.n1, out.n2, out.n3);
  const double e = p_.eps;
  const double iz2 = 1.0 / (g.hz() * g.hz());
  RealArray* gs[3] = {&out.n1, &out.n2, &out.n3};
  const RealArray* ns[3] = {&s.n1, &s.n2, &s.n3};
  for (int c = 0; c < 3; ++c) {
    const RealArray& n = *ns[c];
    ops_.laplacian(n.data(), lap_.data());
    const double field = c < 2 ? 2.0 * p_.tau : 0.0;
    for (int k = 1; k <= g.nz(); ++k) {
      const std::size_t off = g.index(0, 0, k);
      for (std::size_t i = off; i < off + slab; ++i) {
        const double lap = lap_[i] + iz2 * (n[i + slab] - 2.0 * n[i] + n[i - slab]);
        (*gs[c])[i] += -2.0 * e * lap - field * n[i];
      }
    }
  }
}

EnergyBreakdown total_energy(const Field3D& state, const Parameters& p) {
  Energy3D e(state.grid, p);
  return e.energy(state);
}

Gradient3D energy_gradient(const Field3D& state, const Parameters& p) {
  Energy3D e(state.grid, p);
  Gradient3D g(state.grid);
  e.gradient(state, g);
  return g;
}

double second_variation(const DisplacementField& u, double tau, const Parameters& p) {
  const Grid3D& g = u.grid;
  const double e = p.eps;
  const std::size_t slab = g.slab();
  LateralOps ops(g.nx(), g.ny(), g.nz_total(), g.a(), g.b());
  RealArray vx(g.size()), vy(g.size()), lap(g.size());
  ops.gradient(u.v.data(), vx.data(), vy.data());

  double comp = 0.0, frank = 0.0, mag = 0.0;
  for (int k = 1; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t i = off; i < off + slab; ++i) {
      const double a = vx[i] - u.w1[i];
      const double b = vy[i] - u.w2[i];
      comp += a * a + b * b;
      mag += u.w1[i] * u.w1[i] + u.w2[i] * u.w2[i];
    }
  }
  const double iz2 = 1.0 / (g.hz() * g.hz());
  for (int k = 0; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t i = off; i < off + slab; ++i) {
      const double dv = u.v[i + slab] - u.v[i];
      comp += iz2 * dv * dv;
    }
  }
  for (const RealArray* w : {&u.w1, &u.w2}) {
    ops.laplacian(w->data(), lap.data());
    for (int k = 1; k <= g.nz(); ++k) {
      const std::size_t off = g.index(0, 0, k);
      for (std::size_t i = off; i < off + slab; ++i) frank -= (*w)[i] * lap[i];
    }
    for (int k = 0; k <= g.nz(); ++k) {
      const std::size_t off = g.index(0, 0, k);
      for (std::size_t i = off; i < off + slab; ++i) {
        const double d = (*w)[i + slab] - (*w)[i];
        frank += iz2 * d * d;
      }
    }
  }
  return g.cell_volume() * (comp / e + e * frank - tau * mag);
}

Field3D state_from_displacement(const DisplacementField& u, double t, const Parameters& p) {
  Field3D s = uniform_state(p, u.grid);
  const Grid3D& g = u.grid;
  const double ice = 1.0 / p.ceps();
  for (int k = 1; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t i = off; i < off + g.slab(); ++i) {
      s.psi[i] *= cplx(1.0, t * u.v[i] * ice);
      const double a = t * u.w1[i], b = t * u.w2[i];
      const double inv = 1.0 / std::sqrt(1.0 + a * a + b * b);
      s.n1[i] = a * inv;
      s.n2[i] = b * inv;
      s.n3[i] = inv;
    }
  }
  return s;
}

QuadraticReport quadratic_expansion_check(const DisplacementField& u, const Parameters& p,
                                          const std::vector<double>& t_values) {
  if (t_values.size() < 2) throw std::invalid_argument("need at least two t values");
  QuadraticReport r;
  r.t_values = t_values;
  Energy3D en(u.grid, p);
  const double f0 = en.energy(uniform_state(p, u.grid)).total;
  // Least squares for F(t) - F(0) = c2 t^2 + c3 t^3 in scaled unknowns.
  const double ts = t_values.back();
  double s44 = 0, s45 = 0, s55 = 0, y4 = 0, y5 = 0;
  for (double t : t_values) {
    const double d = en.energy(state_from_displacement(u, t, p)).total - f0;
    r.excess.push_back(d);
    const double x2 = (t / ts) * (t / ts), x3 = x2 * (t / ts);
    s44 += x2 * x2;
    s45 += x2 * x3;
    s55 += x3 * x3;
    y4 += x2 * d;
    y5 += x3 * d;
  }
  const double det = s44 * s55 - s45 * s45;
  const double c2 = (y4 * s55 - y5 * s45) / det;
  r.fitted = c2 / (ts * ts);
  r.target = second_variation(u, p.tau, p);
  const double scale = std::max(std::abs(r.target), 1e-300);
  r.rel_error = std::abs(r.fitted - r.target) / scale;
  return r;
}

Planar::Planar(const Grid2D& grid)
    : grid_(grid),
      ops_(grid.n(), grid.n(), 1, 2.0 * std::numbers::pi, 2.0 * std::numbers::pi),
      a_(grid.size()),
      b_(grid.size()),
      c_(grid.size()) {}

EnergyBreakdown Planar::energy(const Field2D& s, const Parameters& p) {
  if (!p.delta) throw std::domain_error("planar energy requires delta");
  require_unit(s.n1, s.n2, s.n3);
  const double e = p.eps;
  const double cell = grid_.h() * grid_.h();
  EnergyBreakdown out;
  double frank = 0.0;
  for (const RealArray* n : {&s.n1, &s.n2, &s.n3}) {
    ops_.laplacian(n->data(), a_.data());
    for (std::size_t q = 0; q < grid_.size(); ++q) frank -= (*n)[q] * a_[q];
  }
  ops_.gradient(s.phi.data(), a_.data(), b_.data());
  double comp = 0.0, pen = 0.0;
  for (std::size_t q = 0; q < grid_.size(); ++q) {
    const double u = a_[q] - s.n1[q], v = b_[q] - s.n2[q];
    comp += u * u + v * v;
    pen += s.n3[q] * s.n3[q];
  }
  out.frank = e * frank * cell;
  out.compression = comp * cell / e;
  out.magnetic = std::pow(e, -*p.delta) * pen * cell;
  out.total = out.frank + out.compression + out.magnetic;
  return out;
}

RealArray Planar::solve_phase(const RealArray& n1, const RealArray& n2) {
  const PlaneFft& f = ops_.fft();
  ComplexArray s1(f.half_size()), s2(f.half_size());
  f.forward(n1.data(), s1.data());
  f.forward(n2.data(), s2.data());
  const auto& kx = f.kx_half_d();
  const auto& ky = f.ky_d();
  for (int j = 0; j < f.ny(); ++j)
    for (int i = 0; i < f.nxh(); ++i) {
      const std::size_t q = static_cast<std::size_t>(j) * f.nxh() + i;
      const double k2 = kx[i] * kx[i] + ky[j] * ky[j];
      s1[q] = k2 > 0.0 ? -I * (kx[i] * s1[q] + ky[j] * s2[q]) / k2 : cplx(0.0);
    }
  RealArray phi(grid_.size());
  f.inverse(s1.data(), phi.data());
  return phi;
}

std::pair<RealArray, RealArray> Planar::demag_field(const Field2D& s) {
  RealArray h1(grid_.size()), h2(grid_.size());
  ops_.gradient(s.phi.data(), a_.data(), b_.data());
  for (std::size_t q = 0; q < grid_.size(); ++q) {
    h1[q] = -s.n2[q] + b_[q];
    h2[q] = s.n1[q] - a_[q];
  }
  return {std::move(h1), std::move(h2)};
}

RealArray Planar::curl(const RealArray& h1, const RealArray& h2) {
  RealArray out(grid_.size());
  ops_.gradient(h2.data(), a_.data(), b_.data());
  ops_.gradient(h1.data(), c_.data(), b_.data());
  for (std::size_t q = 0; q < grid_.size(); ++q) out[q] = a_[q] - b_[q];
  return out;
}

RealArray Planar::phase_residual(const Field2D& s) {
  RealArray out(grid_.size());
  ops_.derivative_laplacian(s.phi.data(), a_.data());
  ops_.divergence(s.n1.data(), s.n2.data(), b_.data());
  for (std::size_t q = 0; q < grid_.size(); ++q) out[q] = a_[q] - b_[q];
  return out;
}

EnergyBreakdown planar_energy(const Field2D& state, const Parameters& p) {
  Planar pl(state.grid);
  return pl.energy(state, p);
}

RealArray solve_phase(const Field2D& state) {
  Planar pl(state.grid);
  return pl.solve_phase(state.n1, state.n2);
}

std::pair<RealArray, RealArray> demag_field(const Field2D& state) {
  Planar pl(state.grid);
  return pl.demag_field(state);
}

double l2_norm(const RealArray& f, double cell_area) {
  double s = 0.0;
  for (double v : f) s += v * v;
  return std::sqrt(s * cell_area);
}

}  // namespace undulate
