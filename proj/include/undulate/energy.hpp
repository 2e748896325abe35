#pragma once

#include <memory>
#include <vector>

#include "undulate/core.hpp"
#include "undulate/fft.hpp"

namespace undulate {

/// Per-term energies. For the planar model `compression` holds (1/eps)|grad phi - n_par|^2,
/// `potential` is zero and `magnetic` holds the penalty eps^-delta n3^2.
struct EnergyBreakdown {
  double compression = 0;
  double frank = 0;
  double potential = 0;
  double magnetic = 0;
  double total = 0;
};

/// L2 gradient of the discrete 3D energy at interior nodes (zero on the plates).
/// For psi the convention is dF = Re sum conj(G) dpsi * hx hy hz.
struct Gradient3D {
  explicit Gradient3D(const Grid3D& g) : psi(g.size()), n1(g.size()), n2(g.size()), n3(g.size()) {}
  ComplexArray psi;
  RealArray n1, n2, n3;
};

/// Discrete de Gennes energy: spectral in x, y; half-point differences in z with
/// the layer phase carried by a gauge link exp(i hz (n3_k + n3_{k+1})/(2 c eps)),
/// which makes the uniform layered state an exact discrete critical point.
/// Holds FFT plans and scratch, so one instance serves a whole run.
class Energy3D {
 public:
  Energy3D(const Grid3D& grid, const Parameters& p);

  const Grid3D& grid() const { return grid_; }
  const Parameters& params() const { return p_; }

  EnergyBreakdown energy(const Field3D& s);
  /// Gradient of the compression and potential terms with respect to psi.
  void psi_gradient(const Field3D& s, ComplexArray& out);
  /// Gradient of the compression term with respect to n (Frank and field terms excluded).
  void n_coupling_gradient(const Field3D& s, RealArray& g1, RealArray& g2, RealArray& g3);
  void gradient(const Field3D& s, Gradient3D& out);

  LateralOps& ops() { return ops_; }

 private:
  void lateral_residuals(const Field3D& s);
  void z_residuals(const Field3D& s);

  Grid3D grid_;
  Parameters p_;
  LateralOps ops_;
  ComplexArray dx_, dy_, rx_, ry_, tmp_;
  ComplexArray sz_;    // s_k = psi_{k+1} - e^{i A_k} psi_k at half-points k = 0..nz
  ComplexArray link_;  // e^{i A_k}
  RealArray lap_;
};

EnergyBreakdown total_energy(const Field3D& state, const Parameters& p);

Gradient3D energy_gradient(const Field3D& state, const Parameters& p);

/// Taylor coefficient of t^2 in F(uniform + t u):
///   int (1/eps)|grad v - (w,0)|^2 + eps|grad w|^2 - tau|w|^2,
/// discretized consistently with Energy3D, so it equals <apply_L(u), u> exactly.
double second_variation(const DisplacementField& u, double tau, const Parameters& p);

/// psi = psi0 (1 + i t v/(c eps)), n = normalize(t w1, t w2, 1).
Field3D state_from_displacement(const DisplacementField& u, double t, const Parameters& p);

struct QuadraticReport {
  double fitted = 0;
  double target = 0;
  double rel_error = 0;
  std::vector<double> t_values;
  std::vector<double> excess;  // F(t u) - F(0)
};

/// Fits F(t u) - F(0) = c2 t^2 + c3 t^3 by least squares and compares c2 with
/// second_variation(u, p.tau).
QuadraticReport quadratic_expansion_check(const DisplacementField& u, const Parameters& p,
                                          const std::vector<double>& t_values);

/// Unit-torus spectral operators for the planar model.
class Planar {
 public:
  explicit Planar(const Grid2D& grid);

  const Grid2D& grid() const { return grid_; }
  LateralOps& ops() { return ops_; }

  EnergyBreakdown energy(const Field2D& s, const Parameters& p);
  /// Zero-mean solution of lap phi = div n_par (Nyquist-free symbols).
  RealArray solve_phase(const RealArray& n1, const RealArray& n2);
  /// H = (-n2 + phi_y, n1 - phi_x).
  std::pair<RealArray, RealArray> demag_field(const Field2D& s);
  /// d_x H2 - d_y H1.
  RealArray curl(const RealArray& h1, const RealArray& h2);
  /// lap phi - div n_par.
  RealArray phase_residual(const Field2D& s);

 private:
  Grid2D grid_;
  LateralOps ops_;
  RealArray a_, b_, c_;
};

EnergyBreakdown planar_energy(const Field2D& state, const Parameters& p);
RealArray solve_phase(const Field2D& state);
std::pair<RealArray, RealArray> demag_field(const Field2D& state);

/// sqrt(cell_area * sum f^2), the discrete L2 norm.
double l2_norm(const RealArray& f, double cell_area);

}  // namespace undulate
