#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "fields.hpp"
#include "undulate/core.hpp"
#include "undulate/random.hpp"
#include "undulate/snapshot.hpp"

using namespace undulate;
using std::numbers::pi;

namespace {

MaterialParameters reference_material() {
  MaterialParameters m;
  m.K = 0.001;
  m.C = 0.01;
  m.g0 = 0.5;
  m.r_temp = 0.25;
  m.q = 10;
  m.chi_a_abs = 1;
  m.H_mag = 1;
  m.d0 = 1;
  m.L1 = 3;
  m.L2 = 3;
  return m;
}

}  // namespace

TEST_CASE("derive_dimensionless reproduces the onset constants") {
  const MaterialParameters m = reference_material();
  const Parameters p = derive_dimensionless(m);
  CHECK(p.c == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
  CHECK(p.g == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(penetration_length(m) == doctest::Approx(0.031622776601683793).epsilon(1e-14));
  // eps = (lambda/d) sqrt(g0/r), d = 2 d0/pi; tau = chi H^2 d^2 eps / K (mpmath, 40 digits)
  CHECK(p.eps == doctest::Approx(0.070248147310407264).epsilon(1e-13));
  CHECK(p.tau == doctest::Approx(28.470501736687082).epsilon(1e-13));
  CHECK(p.a == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(p.b == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("derive_dimensionless all-ones case") {
  MaterialParameters m{1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  const Parameters p = derive_dimensionless(m);
  CHECK(penetration_length(m) == 1.0);
  CHECK(p.c == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.g == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("derive_dimensionless rejects nonpositive input") {
  MaterialParameters m = reference_material();
  m.C = 0;
  CHECK_THROWS_AS(derive_dimensionless(m), std::domain_error);
  m = reference_material();
  m.H_mag = -1;
  CHECK_THROWS_AS(derive_dimensionless(m), std::domain_error);
}

TEST_CASE("derive_dimensionless is invariant under a common scaling of the energy density") {
  Rng rng(7);
  const Parameters p0 = derive_dimensionless(reference_material());
  for (int t = 0; t < 10; ++t) {
    MaterialParameters m = reference_material();
    const double f = std::exp(rng.uniform(-5, 5));
    m.K *= f;
    m.C *= f;
    m.g0 *= f;
    m.r_temp *= f;
    m.chi_a_abs *= f;
    const Parameters p = derive_dimensionless(m);
    CHECK(std::abs(p.c - p0.c) <= 1e-12 * p0.c);
    CHECK(std::abs(p.g - p0.g) <= 1e-12 * p0.g);
    CHECK(std::abs(p.eps - p0.eps) <= 1e-12 * p0.eps);
    CHECK(std::abs(p.tau - p0.tau) <= 1e-12 * p0.tau);
  }
}

TEST_CASE("Parameters::validate names the offending field") {
  Parameters p;
  p.eps = 0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("eps"), std::domain_error);
  p = Parameters{};
  p.tau = -1;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("tau"), std::domain_error);
  p = Parameters{};
  p.delta = 2.5;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("delta"), std::domain_error);
  p.delta = 1.5;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("Grid3D geometry") {
  const Grid3D g(16, 8, 15, 2.0 / 3.0, 0.5);
  CHECK(g.hx() * g.nx() == doctest::Approx(2 * pi / g.a()).epsilon(1e-14));
  CHECK(g.hy() * g.ny() == doctest::Approx(2 * pi / g.b()).epsilon(1e-14));
  CHECK(g.hz() == doctest::Approx(pi / 16).epsilon(1e-14));
  CHECK(g.x(0) == doctest::Approx(-pi / g.a()));
  CHECK(g.y(0) == doctest::Approx(-pi / g.b()));
  CHECK(g.z(0) == doctest::Approx(-pi / 2));
  CHECK(g.z(g.nz() + 1) == doctest::Approx(pi / 2));
  CHECK(std::abs(g.z(g.mid_plane())) < 1e-14);
  CHECK(g.size() == 16u * 8u * 17u);
  CHECK(g.index(3, 2, 1) == (1u * 8 + 2) * 16 + 3);
  CHECK_THROWS_AS(Grid3D(6, 7, 15, 1, 1), std::domain_error);
  CHECK_THROWS_AS(Grid3D(2, 8, 15, 1, 1), std::domain_error);
  CHECK_THROWS_AS(Grid3D(8, 8, 2, 1, 1), std::domain_error);
  CHECK_THROWS_AS(Grid2D(5), std::domain_error);
}

TEST_CASE("uniform_state values") {
  Parameters p;
  p.c = 1;
  p.eps = 1;
  const Grid3D g(8, 8, 7, 1, 1);
  const Field3D s = uniform_state(p, g);
  const std::size_t mid = g.index(0, 0, g.mid_plane());
  CHECK(std::abs(s.psi[mid] - cplx(1, 0)) < 1e-15);
  const std::size_t top = g.index(0, 0, g.nz() + 1);
  CHECK(std::abs(s.psi[top] - cplx(0, 1)) < 1e-15);
  CHECK(max_boundary_defect(s, p) == 0.0);

  p.c = std::sqrt(5.0);
  p.eps = 0.3;
  const Field3D t = uniform_state(p, g);
  // pi/(2 c eps) with c = sqrt 5, eps = 0.3 (mpmath)
  CHECK(std::arg(t.psi[g.index(1, 2, g.nz() + 1)]) == doctest::Approx(2.3416049103469088).epsilon(1e-14));
  double worst = 0;
  for (const cplx& z : t.psi) worst = std::max(worst, std::abs(std::abs(z) - 1.0));
  CHECK(worst <= 1e-14);
  CHECK(max_unit_defect(t.n1, t.n2, t.n3) == 0.0);
}

TEST_CASE("perturbed_state properties") {
  Parameters p;
  p.eps = 0.3;
  p.c = std::sqrt(5.0);
  const Grid3D g(16, 16, 15, 2.0 / 3.0, 2.0 / 3.0);
  const Field3D u = uniform_state(p, g);

  const Field3D z = perturbed_state(p, g, 0.0, 3);
  CHECK(testing::max_state_diff(z, u) == 0.0);

  const Field3D a = perturbed_state(p, g, 0.1, 3);
  const Field3D b = perturbed_state(p, g, 0.1, 3);
  CHECK(testing::max_state_diff(a, b) == 0.0);
  CHECK(max_boundary_defect(a, p) == 0.0);
  CHECK(max_unit_defect(a.n1, a.n2, a.n3) <= 1e-12);

  double dev = 0;
  for (int k = 1; k <= g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t q = g.index(i, j, k);
        dev = std::max({dev, std::abs(a.n1[q]), std::abs(a.n2[q]), std::abs(a.n3[q] - 1.0)});
      }
  // 0.1 sqrt 3/(1 - 0.1 sqrt 3)
  CHECK(dev <= 0.20948977397617292);
  CHECK(dev > 0.0);

  const Field3D c = perturbed_state(p, g, 0.1, 4);
  CHECK(testing::max_state_diff(a, c) > 0.0);
  CHECK_THROWS_AS(perturbed_state(p, g, -0.1, 1), std::domain_error);
}

TEST_CASE("perturbed_state_2d properties") {
  const Grid2D g(32);
  const Field2D s = perturbed_state_2d(g, 0.1, 5);
  CHECK(max_unit_defect(s.n1, s.n2, s.n3) <= 1e-12);
  CHECK(std::abs(mean(s.phi)) <= 1e-15);
  const Field2D t = perturbed_state_2d(g, 0.1, 5);
  CHECK(testing::max_abs_diff(s.phi, t.phi) == 0.0);
  const Field2D e = perturbed_state_2d(g, 0.0, 5);
  for (std::size_t q = 0; q < g.size(); ++q) REQUIRE(e.n3[q] == 1.0);
}

TEST_CASE("snapshot round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "undulate_snapshot_test";
  std::filesystem::create_directories(dir);
  Parameters p;
  p.eps = 0.3;
  p.tau = 2.5;
  p.c = std::sqrt(5.0);
  p.g = 0.25;
  p.a = 2.0 / 3.0;
  p.b = 0.5;
  const Grid3D g(8, 16, 7, p.a, p.b);
  const Field3D s = perturbed_state(p, g, 0.1, 9);
  const std::string path = (dir / "s.und").string();
  write_snapshot(path, s, p);
  CHECK(std::filesystem::file_size(path) == kSnapshotHeaderBytes + 5 * 8 * g.size());
  std::ifstream in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "UNDU");
  const auto [r, q] = read_snapshot(path);
  CHECK(r.grid == g);
  CHECK(q.eps == p.eps);
  CHECK(q.tau == p.tau);
  CHECK(q.c == p.c);
  CHECK(q.b == p.b);
  CHECK(testing::max_state_diff(r, s) == 0.0);

  Parameters pp;
  pp.eps = 0.01;
  pp.delta = 1.5;
  const Field2D f = perturbed_state_2d(Grid2D(16), 0.1, 2);
  const std::string p2 = (dir / "s.und2").string();
  write_snapshot_2d(p2, f, pp);
  const auto [f2, q2] = read_snapshot_2d(p2);
  CHECK(f2.grid == f.grid);
  CHECK(q2.delta.value() == 1.5);
  CHECK(testing::max_abs_diff(f2.n1, f.n1) == 0.0);
  CHECK(testing::max_abs_diff(f2.phi, f.phi) == 0.0);
  CHECK_THROWS(read_snapshot(p2));

  write_slice_csv((dir / "z.csv").string(), s, SliceAxis::Z, g.mid_plane());
  std::ifstream csv(dir / "z.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "x,y,z,re_psi,im_psi,n1,n2,n3");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == g.nx() * g.ny());
  std::filesystem::remove_all(dir);
}
