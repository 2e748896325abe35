#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "undulate/aligned.hpp"

namespace undulate {

/// Material constants of the dimensional smectic-A model, all strictly positive.
struct MaterialParameters {
  double K = 0;          // Frank constant
  double C = 0;          // compression constant
  double g0 = 0;         // potential coefficient
  double r_temp = 0;     // T_NA - T
  double q = 0;          // layer wave number
  double chi_a_abs = 0;  // |chi_a|
  double H_mag = 0;      // field magnitude
  double d0 = 0;         // half sample thickness
  double L1 = 0;         // lateral half-lengths
  double L2 = 0;
};

/// Dimensionless parameters of the nondimensionalized de Gennes energy.
/// `delta` is only meaningful for the planar model (tau = eps^-delta).
struct Parameters {
  double eps = 0.3;
  double tau = 0.0;
  double c = 1.0;
  double g = 1.0;
  double a = 1.0;
  double b = 1.0;
  std::optional<double> delta;

  /// Throws std::domain_error naming the offending field.
  void validate() const;

  /// Product c*eps, the inverse layer wave number of the uniform state.
  double ceps() const { return c * eps; }
};

/// Layer period ratio lambda = sqrt(K/(C q^2)).
double penetration_length(const MaterialParameters& mat);

Parameters derive_dimensionless(const MaterialParameters& mat);

/// Box/torus grid: periodic in x, y and Dirichlet in z.
///
/// x_i = -pi/a + i hx, y_j = -pi/b + j hy, z_k = -pi/2 + k hz with
/// k = 0..nz+1; slabs k = 0 and k = nz+1 carry boundary data. Storage is
/// z-major: index(i,j,k) = (k*ny + j)*nx + i.
class Grid3D {
 public:
  Grid3D(int nx, int ny, int nz, double a, double b);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  int nz_total() const { return nz_ + 2; }
  double a() const { return a_; }
  double b() const { return b_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double hz() const { return hz_; }

  std::size_t slab() const { return static_cast<std::size_t>(nx_) * ny_; }
  std::size_t size() const { return slab() * nz_total(); }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * ny_ + j) * nx_ + i;
  }

  double x(int i) const;
  double y(int j) const;
  double z(int k) const;

  /// Index of the node nearest z = 0.
  int mid_plane() const { return (nz_ + 1) / 2; }

  /// Lateral cell volume hx*hy*hz, the quadrature weight of an interior node.
  double cell_volume() const { return hx_ * hy_ * hz_; }
  double lateral_area() const;

  bool operator==(const Grid3D& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && nz_ == o.nz_ && a_ == o.a_ && b_ == o.b_;
  }

 private:
  int nx_, ny_, nz_;
  double a_, b_;
  double hx_, hy_, hz_;
};

/// Order parameter and director sampled on every node of a Grid3D.
struct Field3D {
  explicit Field3D(const Grid3D& g)
      : grid(g), psi(g.size()), n1(g.size()), n2(g.size()), n3(g.size()) {}

  Grid3D grid;
  ComplexArray psi;
  RealArray n1, n2, n3;
};

/// Displacement u = (w1, w2, v) about the uniform state; zero on z-boundaries.
struct DisplacementField {
  explicit DisplacementField(const Grid3D& g)
      : grid(g), w1(g.size(), 0.0), w2(g.size(), 0.0), v(g.size(), 0.0) {}

  Grid3D grid;
  RealArray w1, w2, v;
};

/// Uniform N x N grid on the unit torus [0,1)^2, x fastest.
class Grid2D {
 public:
  explicit Grid2D(int n);

  int n() const { return n_; }
  double h() const { return 1.0 / n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n_ + i; }
  double x(int i) const { return i * h(); }

  bool operator==(const Grid2D& o) const { return n_ == o.n_; }

 private:
  int n_;
};

struct Field2D {
  explicit Field2D(const Grid2D& g)
      : grid(g), phi(g.size(), 0.0), n1(g.size(), 0.0), n2(g.size(), 0.0), n3(g.size(), 1.0) {}

  Grid2D grid;
  RealArray phi, n1, n2, n3;
};

/// e^{+-i pi/(2 c eps)}: Dirichlet value of psi on z = +-pi/2.
cplx boundary_psi(const Parameters& p, bool top);

Field3D uniform_state(const Parameters& p, const Grid3D& grid);

/// Uniform state plus band-limited noise of amplitude eta, reproducible from seed.
/// Boundary slabs are left exactly at their Dirichlet values.
Field3D perturbed_state(const Parameters& p, const Grid3D& grid, double eta, std::uint64_t seed);

/// n = normalize(eta u1, eta u2, 1 + eta u3), phi = eta phi0 with zero mean; the
/// random fields use Fourier modes |m|, |n| <= max_mode.
Field2D perturbed_state_2d(const Grid2D& grid, double eta, std::uint64_t seed, int max_mode = 1);

/// Re-imposes n = e3 and psi = e^{+-i pi/(2 c eps)} on both z-boundaries.
void impose_boundary(Field3D& f, const Parameters& p);

/// Largest | |n| - 1 | over all nodes.
double max_unit_defect(const RealArray& n1, const RealArray& n2, const RealArray& n3);

/// Largest deviation of boundary slabs from their Dirichlet data.
double max_boundary_defect(const Field3D& f, const Parameters& p);

double mean(const RealArray& values);

}  // namespace undulate
