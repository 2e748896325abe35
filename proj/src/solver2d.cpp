#include "undulate/solver2d.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "undulate/errors.hpp"

namespace undulate {

namespace {

const cplx I(0.0, 1.0);

std::pair<int, int> dominant(const PlaneFft& f, const ComplexArray& h) {
  double best = -1.0;
  std::pair<int, int> mode{0, 0};
  for (int j = 0; j < f.ny(); ++j)
    for (int i = 0; i < f.nxh(); ++i) {
      if (i == 0 && j == 0) continue;
      const double pw = std::norm(h[static_cast<std::size_t>(j) * f.nxh() + i]);
      if (pw > best * (1.0 + 1e-12)) {
        best = pw;
        mode = {i, std::abs(signed_frequency(j, f.ny()))};
      }
    }
  return mode;
}

double square_wave(double t) { return std::cos(2.0 * std::numbers::pi * t) >= 0.0 ? 1.0 : -1.0; }

}  // namespace

void SolverConfig2D::validate() const {
  if (!(dt > 0.0)) throw std::domain_error("dt must be positive");
  if (!(stop_tol > 0.0)) throw std::domain_error("stop tolerance must be positive");
  if (!(delta > 1.0 && delta < 2.0)) throw std::domain_error("delta must satisfy 1 < delta < 2");
  if (trace_stride < 1) throw std::domain_error("trace stride must be >= 1");
  if (snapshot_stride < 0 || max_steps < 0 || max_halvings < 0)
    throw std::domain_error("strides and limits must be nonnegative");
}

Solver2D::Solver2D(const Parameters& p, const Grid2D& grid, double dt, bool exact_phase)
    : p_(p),
      grid_(grid),
      dt_(dt),
      exact_phase_(exact_phase),
      planar_(grid),
      h1_(planar_.ops().fft().half_size()),
      h2_(planar_.ops().fft().half_size()),
      h3_(planar_.ops().fft().half_size()),
      hp_(planar_.ops().fft().half_size()) {
  p.validate();
  if (!p.delta) throw std::domain_error("planar solver requires delta");
  set_dt(dt);
}

void Solver2D::set_dt(double dt) {
  if (!(dt > 0.0)) throw std::domain_error("dt must be positive");
  dt_ = dt;
}

void Solver2D::step(Field2D& s) {
  const PlaneFft& f = planar_.ops().fft();
  const double e = p_.eps;
  const double pen = std::pow(e, -*p_.delta);
  const auto& kx = f.kx_half();
  const auto& ky = f.ky();
  const auto& kxd = f.kx_half_d();
  const auto& kyd = f.ky_d();

  f.forward(s.phi.data(), hp_.data());
  f.forward(s.n1.data(), h1_.data());
  f.forward(s.n2.data(), h2_.data());
  f.forward(s.n3.data(), h3_.data());
  const double a = dt_ / e;
  for (int j = 0; j < f.ny(); ++j)
    for (int i = 0; i < f.nxh(); ++i) {
      const std::size_t q = static_cast<std::size_t>(j) * f.nxh() + i;
      const double k2 = kx[i] * kx[i] + ky[j] * ky[j];
      const double diff = dt_ * e * k2;
      const double dpar = 1.0 + a + diff;
      h1_[q] = (h1_[q] + a * I * kxd[i] * hp_[q]) / dpar;
      h2_[q] = (h2_[q] + a * I * kyd[j] * hp_[q]) / dpar;
      h3_[q] = h3_[q] / (1.0 + dt_ * pen + diff);
    }
  f.inverse(h1_.data(), s.n1.data());
  f.inverse(h2_.data(), s.n2.data());
  f.inverse(h3_.data(), s.n3.data());
  for (std::size_t q = 0; q < grid_.size(); ++q) {
    const double len = std::sqrt(s.n1[q] * s.n1[q] + s.n2[q] * s.n2[q] + s.n3[q] * s.n3[q]);
    if (!(len >= 1e-8)) throw DefectError("director collapsed (|n*| < 1e-8): point defect");
    s.n1[q] /= len;
    s.n2[q] /= len;
    s.n3[q] /= len;
  }

  if (exact_phase_) {
    s.phi = planar_.solve_phase(s.n1, s.n2);
    return;
  }
  f.forward(s.n1.data(), h1_.data());
  f.forward(s.n2.data(), h2_.data());
  for (int j = 0; j < f.ny(); ++j)
    for (int i = 0; i < f.nxh(); ++i) {
      const std::size_t q = static_cast<std::size_t>(j) * f.nxh() + i;
      const double kd2 = kxd[i] * kxd[i] + kyd[j] * kyd[j];
      const cplx div = I * (kxd[i] * h1_[q] + kyd[j] * h2_[q]);
      hp_[q] = (hp_[q] - a * div) / (1.0 + a * kd2);
    }
  hp_[0] = 0.0;
  f.inverse(hp_.data(), s.phi.data());
}

Field2D step2d(const Field2D& state, const SolverConfig2D& cfg, const Parameters& p) {
  cfg.validate();
  Parameters q = p;
  q.delta = cfg.delta;
  Solver2D solver(q, state.grid, cfg.dt, cfg.exact_phase);
  Field2D s = state;
  solver.step(s);
  return s;
}

RunResult2D run2d(const Field2D& state0, const SolverConfig2D& cfg, const Parameters& p,
                  const SnapshotObserver2D& observer) {
  cfg.validate();
  Parameters q = p;
  q.delta = cfg.delta;
  const Grid2D& g = state0.grid;
  Solver2D solver(q, g, cfg.dt, cfg.exact_phase);
  Planar& pl = solver.planar();
  const PlaneFft& f = pl.ops().fft();
  ComplexArray h(f.half_size());

  RunResult2D res{state0, {}, cfg.dt, 0, 0, false};
  Field2D& s = res.state;
  const double cell = g.h() * g.h();

  auto measure = [&](double t) {
    Trace2DSample ts;
    ts.t = t;
    ts.energy = pl.energy(s, q);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ts.mass1 += s.n1[i];
      ts.mass2 += s.n2[i];
      ts.m3sq += s.n3[i] * s.n3[i];
    }
    ts.mass1 *= cell;
    ts.mass2 *= cell;
    ts.m3sq *= cell;
    f.forward(s.n1.data(), h.data());
    ts.mode1 = dominant(f, h);
    f.forward(s.n2.data(), h.data());
    ts.mode2 = dominant(f, h);
    return ts;
  };

  res.trace.samples.push_back(measure(0.0));
  Field2D backup = s;
  long backup_steps = 0;
  double t = 0.0, backup_t = 0.0;
  double t_check = 0.0, e_check = res.trace.samples.back().energy.total;

  while (res.steps < cfg.max_steps && t < cfg.t_end - 1e-9 * solver.dt()) {
    solver.step(s);
    t += solver.dt();
    ++res.steps;
    if (res.steps % cfg.trace_stride != 0) continue;

    const Trace2DSample ts = measure(t);
    const EnergyBreakdown& prev = res.trace.samples.back().energy;
    if (ts.energy.total > prev.total + 1e-10 * (1.0 + std::abs(prev.total))) {
      if (res.halvings >= cfg.max_halvings)
        throw EnergyIncreaseError(fmt::format(
            "planar energy increased from {:.17g} to {:.17g} at t = {:.6g} with dt = {:.3g}",
            prev.total, ts.energy.total, t, solver.dt()));
      s = backup;
      t = backup_t;
      res.steps = backup_steps;
      solver.set_dt(0.5 * solver.dt());
      ++res.halvings;
      continue;
    }
    res.trace.samples.push_back(ts);
    backup = s;
    backup_t = t;
    backup_steps = res.steps;
    if (observer && cfg.snapshot_stride > 0 && res.steps % cfg.snapshot_stride == 0)
      observer(s, res.steps, t);

    if (t - t_check >= 100.0 * solver.dt() * (1.0 - 1e-9)) {
      const double E = ts.energy.total;
      if (std::abs(E - e_check) / ((t - t_check) * (1.0 + std::abs(E))) < cfg.stop_tol) {
        res.converged = true;
        break;
      }
      t_check = t;
      e_check = E;
    }
  }
  if (res.trace.samples.back().t < t) {
    const Trace2DSample ts = measure(t);
    res.trace.samples.push_back(ts);
  }
  res.dt = solver.dt();
  return res;
}

PatternClass classify_pattern(const Field2D& s) {
  const Grid2D& g = s.grid;
  PlaneFft f(g.n(), g.n(), 1, 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  ComplexArray h1(f.half_size()), h2(f.half_size());
  f.forward(s.n1.data(), h1.data());
  f.forward(s.n2.data(), h2.data());
  double total = 0.0, px = 0.0, py = 0.0;
  for (int j = 0; j < f.ny(); ++j)
    for (int i = 0; i < f.nxh(); ++i) {
      if (i == 0 && j == 0) continue;
      const std::size_t q = static_cast<std::size_t>(j) * f.nxh() + i;
      // Half-spectrum entries with 0 < i < n/2 stand for two conjugate modes.
      const double w = (i == 0 || i == f.nx() / 2) ? 1.0 : 2.0;
      const double pw = w * (std::norm(h1[q]) + std::norm(h2[q]));
      total += pw;
      if (j == 0) px += pw;
      if (i == 0) py += pw;
    }
  PatternClass c;
  if (total <= 0.0) return c;
  c.frac_x = px / total;
  c.frac_y = py / total;
  const double hi = std::max(c.frac_x, c.frac_y);
  const double lo = std::min(c.frac_x, c.frac_y);
  if (hi >= 0.99) {
    c.kind = PatternKind::Stripe1D;
    c.confidence = hi;
  } else if (lo >= 0.25) {
    c.kind = PatternKind::Square2D;
    c.confidence = c.frac_x + c.frac_y;
  } else {
    c.kind = PatternKind::Other;
    c.confidence = 1.0 - c.frac_x - c.frac_y;
  }
  return c;
}

Field2D synthetic_square(const Grid2D& g) {
  Field2D s(g);
  const double r = 1.0 / std::numbers::sqrt2;
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      const std::size_t q = g.index(i, j);
      s.n1[q] = r * square_wave(g.x(i) + 0.5 * g.h());
      s.n2[q] = r * square_wave(g.x(j) + 0.5 * g.h());
      s.n3[q] = 0.0;
    }
  return s;
}

Field2D synthetic_stripe(const Grid2D& g) {
  Field2D s(g);
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      const std::size_t q = g.index(i, j);
      s.n1[q] = square_wave(g.x(i) + 0.5 * g.h());
      s.n2[q] = 0.0;
      s.n3[q] = 0.0;
    }
  return s;
}

void write_trace2d_csv(const std::string& path, const Trace2D& trace) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fputs("t,E,mass1,mass2,m3sq,E_frank,E_compression,E_penalty\n", f);
  for (const auto& s : trace.samples) {
    const auto line = fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                                  s.t, s.energy.total, s.mass1, s.mass2, s.m3sq, s.energy.frank,
                                  s.energy.compression, s.energy.magnetic);
    std::fputs(line.c_str(), f);
  }
  std::fclose(f);
}

}  // namespace undulate
