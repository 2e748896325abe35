#pragma once

#include <array>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "undulate/core.hpp"
#include "undulate/spectrum.hpp"

namespace undulate {

/// Lateral translation u(x + phi/a, y + theta/b).
struct Rotation {
  double phi = 0;
  double theta = 0;
};

enum class Reflection { X, Y, Z };

/// Element of O(2) x O(2) x Z2 stored as a word of primitive factors.
/// The product g * h acts as g(h(u)): the right-most factor is applied first.
class GroupElement {
 public:
  using Factor = std::variant<Rotation, Reflection>;

  static GroupElement identity();
  static GroupElement rotation(double phi, double theta);
  static GroupElement kappa_x();
  static GroupElement kappa_y();
  static GroupElement kappa_z();

  GroupElement operator*(const GroupElement& rhs) const;

  const std::vector<Factor>& factors() const { return factors_; }
  std::string name() const;

 private:
  std::vector<Factor> factors_;
};

/// Action on displacements: kappa_x u = (-w1, w2, v)(-x, y, z),
/// kappa_y u = (w1, -w2, v)(x, -y, z), kappa_z u = -u(x, y, -z).
/// Rotations must shift by whole lattice cells; otherwise std::domain_error.
DisplacementField apply_group_element(const DisplacementField& u, const GroupElement& g);

/// The same action transported to (psi, n): kappa_x maps n to (-n1, n2, n3)(-x),
/// kappa_y to (n1, -n2, n3)(-y), kappa_z maps (psi, n) to (conj psi, -n1, -n2, n3)(-z).
Field3D apply_group_element(const Field3D& s, const GroupElement& g);

/// Action on the amplitude pair (u_{m,n,l}, u_{m,-n,l}) of one irreducible block.
std::pair<cplx, cplx> mode_action(cplx u1, cplx u2, const GroupElement& g, const ModeIndex& mode);

enum class IsotropyTag { O2xZ2, DxZ2, O2tilde, Dtilde };

std::string to_string(IsotropyTag tag);
/// Accepts the CLI names o2z2, dz2, o2t, dt.
IsotropyTag parse_isotropy_tag(const std::string& name);

struct IsotropySpec {
  IsotropyTag tag = IsotropyTag::O2xZ2;
  ModeIndex mode;
  std::vector<GroupElement> generators;
};

/// Generators of the isotropy group for base mode (m0, n0, l0); `phi` fixes the
/// representative of the continuous rotation family (unused by the dihedral groups).
/// Throws std::domain_error on m0, n0 < 1 or when l0 has the wrong parity.
IsotropySpec isotropy_spec(IsotropyTag tag, const ModeIndex& mode, double phi);

/// Smallest phi > 0 for which (phi/m0, -phi/n0) shifts the grid by whole cells.
double lattice_phi(const ModeIndex& mode, const Grid3D& grid);

/// isotropy_spec with phi = lattice_phi(mode, grid).
IsotropySpec isotropy_spec(IsotropyTag tag, const ModeIndex& mode, const Grid3D& grid);

struct FixedReport {
  bool fixed = false;
  double max_deviation = 0;
  std::vector<std::pair<std::string, double>> per_generator;
};

FixedReport is_fixed(const DisplacementField& u, const IsotropySpec& spec, double tol);

/// Real dimension and a unit basis vector of the fixed subspace of (u1, u2) in C^2.
struct FixedSpace {
  int dimension = 0;
  std::array<cplx, 2> basis{};
};

FixedSpace fixed_space(const IsotropySpec& spec, double tol = 1e-12);

struct BranchProfile {
  IsotropySpec spec;
  double r = 0;
  double lambda = 0;
  DisplacementField u;
  Field3D state;
};

/// Leading-order branch u = r * (kernel vector of the group), mapped to (psi, n).
BranchProfile branch_profile(const IsotropySpec& spec, double r, double lambda, const Parameters& p,
                             const Grid3D& grid);

}  // namespace undulate
