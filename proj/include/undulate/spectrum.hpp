#pragma once

#include <array>
#include <utility>
#include <vector>

#include "undulate/core.hpp"

namespace undulate {

/// Fourier mode e^{i(a m x + b n y)} f_l(z) of a displacement field.
struct ModeIndex {
  int m = 0;
  int n = 0;
  int l = 1;

  bool operator==(const ModeIndex&) const = default;
};

struct ModeSpectrum {
  ModeIndex mode;
  double alpha = 0;   // a m
  double beta = 0;    // b n
  double p2 = 0;      // alpha^2 + beta^2 + l^2
  double tau_crit = 0;
  double slope = 0;   // d lambda / d tau at tau_crit
  std::pair<double, double> lambda_roots;  // at the requested tau
};

struct SearchBounds {
  int m_max = 8;
  int n_max = 8;
  int l_max = 4;
};

struct CriticalField {
  double tau_c = 0;
  std::vector<ModeIndex> argmin;
};

/// Complex amplitude and sampled z-profile of the eigenfunction e_{m,n,l}.
struct EigenProfile {
  ModeIndex mode;
  double lambda = 0;
  std::array<cplx, 3> amplitude;  // (i alpha/k^2, i beta/k^2, 1/(p^2 - lambda eps))
  std::vector<double> f;          // f_l(z_k), k = 0..nz+1

  /// e_{m,n,l}(z_k) component c.
  cplx value(int c, int k) const { return amplitude[c] * f[k]; }
};

double critical_field(const ModeIndex& mode, const Parameters& p);

/// Both roots of the eigenvalue quadratic at field tau, ascending.
/// Throws std::domain_error (with the discriminant) if the roots are complex.
std::pair<double, double> eigenvalues(const ModeIndex& mode, double tau, const Parameters& p);

double eigenvalue_slope(const ModeIndex& mode, const Parameters& p);

ModeSpectrum analyze_mode(const ModeIndex& mode, double tau, const Parameters& p);

/// Minimum of tau_{m,n,l} over m in [0,m_max], n in [0,n_max], l in [1,l_max].
/// Throws std::domain_error("bounds too small") if a minimizer lies on an upper face.
CriticalField global_critical_field(const Parameters& p, const SearchBounds& bounds,
                                    bool disallow_axial = false);

/// f_l(z) = cos(l z) for odd l, sin(l z) for even l.
double parity_profile(int l, double z);

EigenProfile eigenfunction(const ModeIndex& mode, double lambda, const Parameters& p,
                           const Grid3D& grid);

/// Real field Re(e_{m,n,l}(z) e^{i(a m x + b n y)}) scaled by `scale`.
DisplacementField eigenmode_field(const EigenProfile& e, const Grid3D& grid, double scale = 1.0);

/// The linearized operator about the uniform state, spectral in x, y and
/// second-order centered in z. Throws std::invalid_argument if u is nonzero on
/// a z-boundary slab.
DisplacementField apply_L(const DisplacementField& u, double tau, const Parameters& p);

/// <f, g> over interior nodes with weight hx hy hz.
double inner_product(const DisplacementField& f, const DisplacementField& g);

/// Modes in the nonnegative search box whose critical field is within
/// tol*|tau_mode0| of mode0's, excluding (|m0|, |n0|, l0) itself.
std::vector<ModeIndex> detect_resonances(const ModeIndex& mode0, const Parameters& p,
                                         const SearchBounds& bounds, double tol = 1e-9);

}  // namespace undulate
