#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "fields.hpp"
#include "undulate/energy.hpp"
#include "undulate/errors.hpp"
#include "undulate/solver3d.hpp"
#include "undulate/symmetry.hpp"

using namespace undulate;
using std::numbers::pi;

namespace {

Parameters onset(double tau) {
  Parameters p;
  p.eps = 0.3;
  p.tau = tau;
  p.c = std::sqrt(5.0);
  p.g = 0.25;
  p.a = 2.0 / 3.0;
  p.b = 2.0 / 3.0;
  return p;
}

// Tangential part of the unprojected director rate plus the psi rate.
void flow(const Field3D& s, const Parameters& p, Rhs3D& out) {
  out = rhs(s, p, RhsMode::Variational);
  for (std::size_t q = 0; q < s.grid.size(); ++q) {
    const double d = out.n1[q] * s.n1[q] + out.n2[q] * s.n2[q] + out.n3[q] * s.n3[q];
    out.n1[q] -= d * s.n1[q];
    out.n2[q] -= d * s.n2[q];
    out.n3[q] -= d * s.n3[q];
  }
}

Field3D axpy(const Field3D& s, double h, const Rhs3D& k) {
  Field3D r = s;
  for (std::size_t q = 0; q < s.grid.size(); ++q) {
    r.psi[q] += h * k.psi[q];
    r.n1[q] += h * k.n1[q];
    r.n2[q] += h * k.n2[q];
    r.n3[q] += h * k.n3[q];
  }
  return r;
}

// Classical RK4 on the semi-discrete flow with `sub` substeps.
Field3D reference(const Field3D& s0, const Parameters& p, double dt, int sub) {
  Field3D s = s0;
  const double h = dt / sub;
  Rhs3D k1(s.grid), k2(s.grid), k3(s.grid), k4(s.grid);
  for (int it = 0; it < sub; ++it) {
    flow(s, p, k1);
    flow(axpy(s, h / 2, k1), p, k2);
    flow(axpy(s, h / 2, k2), p, k3);
    flow(axpy(s, h, k3), p, k4);
    for (std::size_t q = 0; q < s.grid.size(); ++q) {
      s.psi[q] += h / 6 * (k1.psi[q] + 2.0 * k2.psi[q] + 2.0 * k3.psi[q] + k4.psi[q]);
      s.n1[q] += h / 6 * (k1.n1[q] + 2 * k2.n1[q] + 2 * k3.n1[q] + k4.n1[q]);
      s.n2[q] += h / 6 * (k1.n2[q] + 2 * k2.n2[q] + 2 * k3.n2[q] + k4.n2[q]);
      s.n3[q] += h / 6 * (k1.n3[q] + 2 * k2.n3[q] + 2 * k3.n3[q] + k4.n3[q]);
    }
  }
  return s;
}

}  // namespace

TEST_CASE("variational rhs vanishes at the uniform state") {
  const Parameters p = onset(2.5);
  const Grid3D g(16, 16, 15, p.a, p.b);
  Rhs3D r(g);
  flow(uniform_state(p, g), p, r);
  double worst = 0;
  for (std::size_t q = 0; q < g.size(); ++q)
    worst = std::max({worst, std::abs(r.psi[q]), std::abs(r.n1[q]), std::abs(r.n2[q]), std::abs(r.n3[q])});
  CHECK(worst <= 1e-12);
}

TEST_CASE("literal-mode psi residual at the uniform state") {
  Parameters p = onset(0.0);
  const Grid3D g(8, 8, 255, p.a, p.b);
  const Rhs3D r = rhs(uniform_state(p, g), p, RhsMode::PaperLiteral);
  const double expect = std::abs(1 / p.eps - 1 / (p.c * p.eps * p.eps));
  for (int k = 1; k <= g.nz(); k += 17) {
    const std::size_t q = g.index(3, 5, k);
    CHECK(std::abs(r.psi[q]) == doctest::Approx(expect).epsilon(1e-4));
  }
  p.c = 1 / p.eps;
  double res[2];
  int idx = 0;
  for (int nz : {255, 511}) {
    const Grid3D fine(8, 8, nz, p.a, p.b);
    const Rhs3D z = rhs(uniform_state(p, fine), p, RhsMode::PaperLiteral);
    res[idx++] = std::abs(z.psi[fine.index(1, 1, fine.mid_plane())]);
  }
  CHECK(res[0] / res[1] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("uniform state is a fixed point of the step") {
  const Parameters p = onset(2.5);
  const Grid3D g(16, 16, 15, p.a, p.b);
  const Field3D u = uniform_state(p, g);
  SolverConfig3D cfg;
  cfg.dt = 1e-2;
  CHECK(testing::max_state_diff(step(u, cfg, p), u) <= 1e-12);
}

TEST_CASE("step keeps unit director and boundary data") {
  for (RhsMode mode : {RhsMode::Variational, RhsMode::PaperLiteral}) {
    const Parameters p = onset(2.5);
    const Grid3D g(16, 16, 15, p.a, p.b);
    SolverConfig3D cfg;
    cfg.dt = 1e-2;
    cfg.mode = mode;
    const Field3D s = step(perturbed_state(p, g, 0.1, 1), cfg, p);
    CHECK(max_unit_defect(s.n1, s.n2, s.n3) <= 1e-14);
    CHECK(max_boundary_defect(s, p) == 0.0);
  }
}

TEST_CASE("step is equivariant") {
  const Parameters p = onset(2.5);
  const Grid3D g(16, 16, 15, p.a, p.b);
  const Field3D s = perturbed_state(p, g, 0.1, 6);
  SolverConfig3D cfg;
  cfg.dt = 1e-2;
  const double h = 2 * pi / 16;
  for (const GroupElement& e : {GroupElement::kappa_x(), GroupElement::kappa_y(), GroupElement::kappa_z(),
                                GroupElement::rotation(5 * h, 2 * h)}) {
    const Field3D a = step(apply_group_element(s, e), cfg, p);
    const Field3D b = apply_group_element(step(s, cfg, p), e);
    CHECK(testing::max_state_diff(a, b) <= 1e-12);
  }
}

TEST_CASE("one step has second-order local error") {
  const Parameters p = onset(2.5);
  const Grid3D g(16, 16, 15, p.a, p.b);
  const Field3D s0 = state_from_displacement(testing::random_displacement(g, 8, 0.05), 1.0, p);
  double err[2];
  int idx = 0;
  for (double dt : {2e-3, 1e-3}) {
    SolverConfig3D cfg;
    cfg.dt = dt;
    const Field3D a = step(s0, cfg, p);
    const Field3D b = reference(s0, p, dt, 40);
    err[idx++] = testing::max_state_diff(a, b);
  }
  const double ratio = err[0] / err[1];
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("variational run decreases the energy at every sample") {
  const Parameters p = onset(2.5);
  const Grid3D g(16, 16, 15, p.a, p.b);
  SolverConfig3D cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 1.0;
  cfg.trace_stride = 5;
  cfg.use_stop_rule = false;
  const RunResult3D r = run(perturbed_state(p, g, 0.1, 2), cfg, p);
  REQUIRE(r.trace.samples.size() >= 2);
  for (std::size_t i = 1; i < r.trace.samples.size(); ++i) {
    const auto& a = r.trace.samples[i - 1];
    const auto& b = r.trace.samples[i];
    CHECK(b.t > a.t);
    CHECK(b.energy.total <= a.energy.total + 1e-10 * std::abs(a.energy.total));
  }
  CHECK(r.steps == 100);
}

TEST_CASE("stopping rule ends a decaying run") {
  const Parameters p = onset(1.0);
  const Grid3D g(8, 8, 7, p.a, p.b);
  SolverConfig3D cfg;
  cfg.dt = 2e-2;
  cfg.t_end = 1e4;
  cfg.stop_tol = 1e-6;
  const RunResult3D r = run(perturbed_state(p, g, 0.05, 3), cfg, p);
  CHECK(r.converged);
  CHECK(r.trace.samples.back().t < 1e4);
}

TEST_CASE("config validation") {
  SolverConfig3D cfg;
  cfg.dt = 0;
  CHECK_THROWS_AS(cfg.validate(), std::domain_error);
  cfg = SolverConfig3D{};
  cfg.stop_tol = -1;
  CHECK_THROWS_AS(cfg.validate(), std::domain_error);
  CHECK(parse_rhs_mode("paper") == RhsMode::PaperLiteral);
  CHECK(to_string(RhsMode::Variational) == "variational");
  CHECK_THROWS(parse_rhs_mode("explicit"));
}

TEST_CASE("trace csv") {
  const Parameters p = onset(2.5);
  const Grid3D g(8, 8, 7, p.a, p.b);
  SolverConfig3D cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 0.1;
  const RunResult3D r = run(perturbed_state(p, g, 0.1, 2), cfg, p);
  const auto path = std::filesystem::temp_directory_path() / "undulate_trace_test.csv";
  write_trace_csv(path.string(), r.trace);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,E_total,E_compression,E_frank,E_potential,E_magnetic,amp,m_dom,n_dom");
  std::filesystem::remove(path);
  CHECK(midplane_amplitude(r.state) == doctest::Approx(r.trace.samples.back().amplitude));
  CHECK(amplitude_profile(r.state).size() == static_cast<std::size_t>(g.nz() + 2));
}
