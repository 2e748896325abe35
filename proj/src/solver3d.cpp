#include "undulate/solver3d.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "undulate/errors.hpp"
#include "undulate/fft.hpp"

namespace undulate {

namespace {

const cplx I(0.0, 1.0);

void normalize_director(Field3D& s) {
  const Grid3D& g = s.grid;
  for (int k = 1; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t q = off; q < off + g.slab(); ++q) {
      const double len = std::sqrt(s.n1[q] * s.n1[q] + s.n2[q] * s.n2[q] + s.n3[q] * s.n3[q]);
      if (!(len >= 1e-8)) throw DefectError("director collapsed (|n*| < 1e-8): point defect");
      s.n1[q] /= len;
      s.n2[q] /= len;
      s.n3[q] /= len;
    }
  }
}

// Centered z-derivative on interior slabs.
template <class Array>
void z_centered(const Array& f, const Grid3D& g, Array& out) {
  const std::size_t slab = g.slab();
  const double s = 0.5 / g.hz();
  std::fill(out.begin(), out.end(), typename Array::value_type(0.0));
  for (int k = 1; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t q = off; q < off + slab; ++q) out[q] = s * (f[q + slab] - f[q - slab]);
  }
}

void add_z_laplacian(const RealArray& f, const Grid3D& g, RealArray& out) {
  const std::size_t slab = g.slab();
  const double s = 1.0 / (g.hz() * g.hz());
  for (int k = 1; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t q = off; q < off + slab; ++q)
      out[q] += s * (f[q + slab] - 2.0 * f[q] + f[q - slab]);
  }
}

void add_z_laplacian(const ComplexArray& f, const Grid3D& g, ComplexArray& out) {
  const std::size_t slab = g.slab();
  const double s = 1.0 / (g.hz() * g.hz());
  for (int k = 1; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t q = off; q < off + slab; ++q)
      out[q] += s * (f[q + slab] - 2.0 * f[q] + f[q - slab]);
  }
}

template <class Array>
void zero_plates(Array& f, const Grid3D& g) {
  for (int k : {0, g.nz() + 1}) {
    const std::size_t off = g.index(0, 0, k);
    std::fill(f.begin() + off, f.begin() + off + g.slab(), typename Array::value_type(0.0));
  }
}

}  // namespace

std::string to_string(RhsMode mode) {
  return mode == RhsMode::Variational ? "variational" : "paper";
}

RhsMode parse_rhs_mode(const std::string& name) {
  if (name == "variational") return RhsMode::Variational;
  if (name == "paper") return RhsMode::PaperLiteral;
  throw std::invalid_argument("unknown mode '" + name + "' (variational, paper)");
}

void SolverConfig3D::validate() const {
  if (!(dt > 0.0)) throw std::domain_error("dt must be positive");
  if (!(stop_tol > 0.0)) throw std::domain_error("stop tolerance must be positive");
  if (trace_stride < 1) throw std::domain_error("trace stride must be >= 1");
  if (snapshot_stride < 0 || max_halvings < 0 || max_steps < 0)
    throw std::domain_error("strides and limits must be nonnegative");
}

Rhs3D rhs(const Field3D& s, const Parameters& p, RhsMode mode) {
  const Grid3D& g = s.grid;
  Rhs3D out(g);
  if (mode == RhsMode::Variational) {
    Energy3D en(g, p);
    Gradient3D grad(g);
    en.gradient(s, grad);
    const double gpsi = 1.0 / (2.0 * p.ceps() * p.ceps());
    for (std::size_t q = 0; q < g.size(); ++q) {
      out.psi[q] = -gpsi * grad.psi[q];
      out.n1[q] = -0.5 * grad.n1[q];
      out.n2[q] = -0.5 * grad.n2[q];
      out.n3[q] = -0.5 * grad.n3[q];
    }
    return out;
  }

  LateralOps ops(g.nx(), g.ny(), g.nz_total(), g.a(), g.b());
  ComplexArray px(g.size()), py(g.size()), pz(g.size()), lap(g.size());
  ops.gradient(s.psi.data(), px.data(), py.data());
  z_centered(s.psi, g, pz);
  RealArray lap1(g.size()), lap2(g.size()), lap3(g.size());
  const RealArray* ns[3] = {&s.n1, &s.n2, &s.n3};
  RealArray* laps[3] = {&lap1, &lap2, &lap3};
  for (int c = 0; c < 3; ++c) {
    ops.laplacian(ns[c]->data(), laps[c]->data());
    add_z_laplacian(*ns[c], g, *laps[c]);
  }
  // Lateral spectral Laplacian of psi: div of the gradient keeps it Nyquist-free.
  ops.divergence(px.data(), py.data(), lap.data());
  add_z_laplacian(s.psi, g, lap);
  RealArray div(g.size()), n3z(g.size());
  ops.divergence(s.n1.data(), s.n2.data(), div.data());
  z_centered(s.n3, g, n3z);

  const double c = p.c, e = p.eps;
  for (int k = 1; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t q = off; q < off + g.slab(); ++q) {
      const cplx ps = s.psi[q];
      out.n1[q] = e * lap1[q] - c * (ps * std::conj(px[q])).imag() + p.tau * s.n1[q];
      out.n2[q] = e * lap2[q] - c * (ps * std::conj(py[q])).imag() + p.tau * s.n2[q];
      out.n3[q] = e * lap3[q] - c * (ps * std::conj(pz[q])).imag();
      const cplx ndg = s.n1[q] * px[q] + s.n2[q] * py[q] + s.n3[q] * pz[q];
      const double dvn = div[q] + n3z[q];
      out.psi[q] = c * lap[q] - 2.0 * c * I * ndg - I * c * dvn * ps - ps / e +
                   (p.g / e) * (1.0 - std::norm(ps)) * ps;
    }
  }
  return out;
}

Solver3D::Solver3D(const Parameters& p, const Grid3D& grid, RhsMode mode, double dt)
    : p_(p),
      grid_(grid),
      mode_(mode),
      dt_(dt),
      energy_(grid, p),
      f1_(grid.size()),
      f2_(grid.size()),
      f3_(grid.size()),
      hat_(energy_.ops().fft().half_size()),
      chat_(grid.size()),
      cbuf_(grid.size()),
      gx_(grid.size()),
      gy_(grid.size()) {
  if (!(dt > 0.0)) throw std::domain_error("dt must be positive");
  factorize();
}

void Solver3D::set_dt(double dt) {
  if (!(dt > 0.0)) throw std::domain_error("dt must be positive");
  dt_ = dt;
  factorize();
}

void Solver3D::factorize() {
  const PlaneFft& f = energy_.ops().fft();
  const double iz2 = 1.0 / (grid_.hz() * grid_.hz());
  const int nxh = f.nxh(), nx = f.nx(), ny = f.ny();

  // Director: (I - dt eps lap) with the spectral lateral symbol.
  const double c0 = dt_ * p_.eps;
  std::vector<double> diag(f.half_slab());
  n_off_.assign(f.half_slab(), -c0 * iz2);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nxh; ++i) {
      const double k2 = f.kx_half()[i] * f.kx_half()[i] + f.ky()[j] * f.ky()[j];
      diag[static_cast<std::size_t>(j) * nxh + i] = 1.0 + c0 * (k2 + 2.0 * iz2);
    }
  n_sys_ = TridiagonalBatch(grid_.nz(), diag, n_off_);

  const double e = p_.eps, c = p_.c;
  std::vector<double> pdiag(f.real_slab());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t q = static_cast<std::size_t>(j) * nx + i;
      // psi diffusion is built from first derivatives, so its symbol is Nyquist-free.
      const double kd2 = f.kx_full_d()[i] * f.kx_full_d()[i] + f.ky_d()[j] * f.ky_d()[j];
      if (mode_ == RhsMode::Variational)
        pdiag[q] = 1.0 / dt_ + (kd2 + 2.0 * iz2) / e + 1.0 / (c * c * e * e * e);
      else
        pdiag[q] = 1.0 / dt_ + c * (kd2 + 2.0 * iz2) + 1.0 / e;
    }
  psi_off_.assign(f.real_slab(), mode_ == RhsMode::Variational ? -iz2 / e : -c * iz2);
  psi_sys_ = TridiagonalBatch(grid_.nz(), pdiag, psi_off_);
}

void Solver3D::paper_director_force(const Field3D& s) {
  const Grid3D& g = grid_;
  LateralOps& ops = energy_.ops();
  ops.gradient(s.psi.data(), gx_.data(), gy_.data());
  const std::size_t slab = g.slab();
  const double hz2 = 0.5 / g.hz();
  for (int k = 1; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t q = off; q < off + slab; ++q) {
      const cplx ps = s.psi[q];
      const cplx pz = hz2 * (s.psi[q + slab] - s.psi[q - slab]);
      f1_[q] = -p_.c * (ps * std::conj(gx_[q])).imag() + p_.tau * s.n1[q];
      f2_[q] = -p_.c * (ps * std::conj(gy_[q])).imag() + p_.tau * s.n2[q];
      f3_[q] = -p_.c * (ps * std::conj(pz)).imag();
    }
  }
}

void Solver3D::solve_director(Field3D& s) {
  const Grid3D& g = grid_;
  if (mode_ == RhsMode::Variational) {
    energy_.n_coupling_gradient(s, f1_, f2_, f3_);
    const double t2 = 2.0 * p_.tau;
    for (int k = 1; k <= g.nz(); ++k) {
      const std::size_t off = g.index(0, 0, k);
      for (std::size_t q = off; q < off + g.slab(); ++q) {
        const double a = f1_[q] - t2 * s.n1[q];
        const double b = f2_[q] - t2 * s.n2[q];
        const double c = f3_[q];
        const double nd = a * s.n1[q] + b * s.n2[q] + c * s.n3[q];
        f1_[q] = -0.5 * (a - nd * s.n1[q]);
        f2_[q] = -0.5 * (b - nd * s.n2[q]);
        f3_[q] = -0.5 * (c - nd * s.n3[q]);
      }
    }
  } else {
    paper_director_force(s);
  }

  const PlaneFft& f = energy_.ops().fft();
  const std::size_t hs = f.half_slab();
  const int nz = g.nz();
  RealArray* ns[3] = {&s.n1, &s.n2, &s.n3};
  RealArray* fs[3] = {&f1_, &f2_, &f3_};
  for (int c = 0; c < 3; ++c) {
    RealArray& n = *ns[c];
    RealArray& r = *fs[c];
    for (int k = 1; k <= nz; ++k) {
      const std::size_t off = g.index(0, 0, k);
      for (std::size_t q = off; q < off + g.slab(); ++q) r[q] = n[q] + dt_ * r[q];
    }
    for (int k : {0, nz + 1}) {
      const std::size_t off = g.index(0, 0, k);
      std::copy(n.begin() + off, n.begin() + off + g.slab(), r.begin() + off);
    }
    f.forward(r.data(), hat_.data());
    cplx* first = hat_.data() + hs;
    cplx* last = hat_.data() + hs * nz;
    const cplx* below = hat_.data();
    const cplx* above = hat_.data() + hs * (nz + 1);
    for (std::size_t q = 0; q < hs; ++q) {
      first[q] -= n_off_[q] * below[q];
      last[q] -= n_off_[q] * above[q];
    }
    n_sys_.solve(hat_.data() + hs);
    f.inverse(hat_.data(), n.data());
  }
  impose_boundary(s, p_);
  normalize_director(s);
}

void Solver3D::solve_psi_variational(Field3D& s) {
  const Grid3D& g = grid_;
  energy_.psi_gradient(s, cbuf_);
  const double gamma = 1.0 / (2.0 * p_.ceps() * p_.ceps());
  for (auto& v : cbuf_) v *= -gamma;
  const PlaneFft& f = energy_.ops().fft();
  f.forward(cbuf_.data(), chat_.data());
  psi_sys_.solve(chat_.data() + g.slab());
  // Plates carry no increment.
  std::fill(chat_.begin(), chat_.begin() + g.slab(), cplx(0.0));
  std::fill(chat_.begin() + g.slab() * (g.nz() + 1), chat_.end(), cplx(0.0));
  f.inverse(chat_.data(), cbuf_.data());
  for (int k = 1; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t q = off; q < off + g.slab(); ++q) s.psi[q] += cbuf_[q];
  }
}

void Solver3D::literal_psi_rhs(const Field3D& s) {
  const Grid3D& g = grid_;
  LateralOps& ops = energy_.ops();
  ops.gradient(s.psi.data(), gx_.data(), gy_.data());
  ops.divergence(s.n1.data(), s.n2.data(), f1_.data());
  const std::size_t slab = g.slab();
  const double hz2 = 0.5 / g.hz();
  const double c = p_.c, e = p_.eps;
  for (int k = 1; k <= g.nz(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t q = off; q < off + slab; ++q) {
      const cplx ps = s.psi[q];
      const cplx pz = hz2 * (s.psi[q + slab] - s.psi[q - slab]);
      const double dvn = f1_[q] + hz2 * (s.n3[q + slab] - s.n3[q - slab]);
      const cplx ndg = s.n1[q] * gx_[q] + s.n2[q] * gy_[q] + s.n3[q] * pz;
      cbuf_[q] = ps / dt_ - 2.0 * c * I * ndg - I * c * dvn * ps +
                 (p_.g / e) * (1.0 - std::norm(ps)) * ps;
    }
  }
  for (int k : {0, g.nz() + 1}) {
    const std::size_t off = g.index(0, 0, k);
    std::copy(s.psi.begin() + off, s.psi.begin() + off + slab, cbuf_.begin() + off);
  }
}

void Solver3D::solve_psi_literal(Field3D& s) {
  const Grid3D& g = grid_;
  literal_psi_rhs(s);
  const PlaneFft& f = energy_.ops().fft();
  f.forward(cbuf_.data(), chat_.data());
  const std::size_t slab = g.slab();
  const int nz = g.nz();
  cplx* first = chat_.data() + slab;
  cplx* last = chat_.data() + slab * nz;
  const cplx* below = chat_.data();
  const cplx* above = chat_.data() + slab * (nz + 1);
  for (std::size_t q = 0; q < slab; ++q) {
    first[q] -= psi_off_[q] * below[q];
    last[q] -= psi_off_[q] * above[q];
  }
  psi_sys_.solve(chat_.data() + slab);
  f.inverse(chat_.data(), s.psi.data());
}

void Solver3D::step(Field3D& s) {
  if (!(s.grid == grid_)) throw std::invalid_argument("state grid does not match solver grid");
  solve_director(s);
  if (mode_ == RhsMode::Variational)
    solve_psi_variational(s);
  else
    solve_psi_literal(s);
  impose_boundary(s, p_);
}

Field3D step(const Field3D& state, const SolverConfig3D& cfg, const Parameters& p) {
  cfg.validate();
  Solver3D solver(p, state.grid, cfg.mode, cfg.dt);
  Field3D s = state;
  solver.step(s);
  return s;
}

double midplane_amplitude(const Field3D& s) {
  const Grid3D& g = s.grid;
  const std::size_t off = g.index(0, 0, g.mid_plane());
  double m = 0.0;
  for (std::size_t q = off; q < off + g.slab(); ++q) m = std::max(m, std::hypot(s.n1[q], s.n2[q]));
  return m;
}

std::vector<double> amplitude_profile(const Field3D& s) {
  const Grid3D& g = s.grid;
  std::vector<double> out(g.nz_total(), 0.0);
  for (int k = 0; k < g.nz_total(); ++k) {
    const std::size_t off = g.index(0, 0, k);
    for (std::size_t q = off; q < off + g.slab(); ++q)
      out[k] = std::max(out[k], std::hypot(s.n1[q], s.n2[q]));
  }
  return out;
}

std::pair<int, int> dominant_mode(const Field3D& s, int k) {
  const Grid3D& g = s.grid;
  PlaneFft f(g.nx(), g.ny(), 1, g.a(), g.b());
  ComplexArray h1(f.half_size()), h2(f.half_size());
  const std::size_t off = g.index(0, 0, k);
  RealArray a(s.n1.begin() + off, s.n1.begin() + off + g.slab());
  RealArray b(s.n2.begin() + off, s.n2.begin() + off + g.slab());
  f.forward(a.data(), h1.data());
  f.forward(b.data(), h2.data());
  double best = -1.0;
  std::pair<int, int> mode{0, 0};
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < f.nxh(); ++i) {
      if (i == 0 && j == 0) continue;
      const std::size_t q = static_cast<std::size_t>(j) * f.nxh() + i;
      const double pw = std::norm(h1[q]) + std::norm(h2[q]);
      // Ties between conjugate partners resolve to the first index visited.
      if (pw > best * (1.0 + 1e-12)) {
        best = pw;
        mode = {i, std::abs(signed_frequency(j, g.ny()))};
      }
    }
  return mode;
}

RunResult3D run(const Field3D& state0, const SolverConfig3D& cfg, const Parameters& p,
                const SnapshotObserver& observer) {
  cfg.validate();
  const Grid3D& g = state0.grid;
  Solver3D solver(p, g, cfg.mode, cfg.dt);
  RunResult3D res{state0, {}, cfg.dt, 0, 0, false};
  Field3D& s = res.state;
  const bool descent = cfg.mode == RhsMode::Variational;

  auto sample = [&](double t, const EnergyBreakdown& e) {
    TraceSample ts;
    ts.t = t;
    ts.energy = e;
    ts.amplitude = midplane_amplitude(s);
    const auto [m, n] = dominant_mode(s, g.mid_plane());
    ts.m_dom = m;
    ts.n_dom = n;
    res.trace.samples.push_back(ts);
  };

  EnergyBreakdown E = solver.energy().energy(s);
  sample(0.0, E);
  double t = 0.0;
  double t_check = 0.0, e_check = E.total;
  Field3D backup(g);
  const double t_stop = cfg.t_end - 1e-9 * cfg.dt;

  while (t < t_stop && (cfg.max_steps == 0 || res.steps < cfg.max_steps)) {
    if (descent) backup = s;
    solver.step(s);
    if (descent) {
      const EnergyBreakdown En = solver.energy().energy(s);
      const double scale = std::abs(E.compression) + std::abs(E.frank) + std::abs(E.potential) +
                           std::abs(E.magnetic);
      if (En.total > E.total + 1e-10 * std::abs(E.total) + 1e-14 * scale) {
        if (res.halvings >= cfg.max_halvings)
          throw EnergyIncreaseError(fmt::format(
              "energy increased from {:.17g} to {:.17g} at t = {:.6g} with dt = {:.3g}", E.total,
              En.total, t, solver.dt()));
        s = backup;
        solver.set_dt(0.5 * solver.dt());
        ++res.halvings;
        continue;
      }
      E = En;
    }
    t += solver.dt();
    ++res.steps;
    const bool trace_now = res.steps % cfg.trace_stride == 0;
    if (trace_now) {
      if (!descent) E = solver.energy().energy(s);
      sample(t, E);
    }
    if (observer && cfg.snapshot_stride > 0 && res.steps % cfg.snapshot_stride == 0)
      observer(s, res.steps, t);
    if (cfg.use_stop_rule && res.steps % 100 == 0) {
      if (!descent && !trace_now) E = solver.energy().energy(s);
      const double span = t - t_check;
      if (std::abs(E.total - e_check) / (span * (1.0 + std::abs(E.total))) < cfg.stop_tol) {
        res.converged = true;
        break;
      }
      t_check = t;
      e_check = E.total;
    }
  }
  if (res.trace.samples.back().t < t) {
    if (!descent) E = solver.energy().energy(s);
    sample(t, E);
  }
  res.dt = solver.dt();
  return res;
}

void write_trace_csv(const std::string& path, const Trace& trace) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fputs("t,E_total,E_compression,E_frank,E_potential,E_magnetic,amp,m_dom,n_dom\n", f);
  for (const auto& s : trace.samples) {
    const auto line = fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n",
                                  s.t, s.energy.total, s.energy.compression, s.energy.frank,
                                  s.energy.potential, s.energy.magnetic, s.amplitude, s.m_dom,
                                  s.n_dom);
    std::fputs(line.c_str(), f);
  }
  std::fclose(f);
}

}  // namespace undulate
