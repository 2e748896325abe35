#include "undulate/symmetry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "undulate/energy.hpp"

namespace undulate {

namespace {

using std::numbers::pi;

// Lattice shift for a translation by `angle` of a 2*pi-periodic lateral coordinate.
int lattice_shift(double angle, int n) {
  const double s = angle * n / (2.0 * pi);
  const double r = std::round(s);
  if (std::abs(s - r) > 1e-9 * std::max(1.0, std::abs(s)))
    throw std::domain_error("rotation angle is not a multiple of the lattice spacing");
  const long m = static_cast<long>(r) % n;
  return static_cast<int>(m < 0 ? m + n : m);
}

// Index map of one primitive: out[i,j,k] = in[src(i,j,k)].
struct Remap {
  int sx = 0, sy = 0;
  bool fx = false, fy = false, fz = false;
};

Remap remap_of(const GroupElement::Factor& f, const Grid3D& g) {
  Remap r;
  if (const auto* rot = std::get_if<Rotation>(&f)) {
    r.sx = lattice_shift(rot->phi, g.nx());
    r.sy = lattice_shift(rot->theta, g.ny());
  } else {
    switch (std::get<Reflection>(f)) {
      case Reflection::X: r.fx = true; break;
      case Reflection::Y: r.fy = true; break;
      case Reflection::Z: r.fz = true; break;
    }
  }
  return r;
}

template <class Array>
void permute(const Array& in, Array& out, const Remap& r, const Grid3D& g) {
  const int nx = g.nx(), ny = g.ny(), nzt = g.nz_total();
  std::vector<int> ix(nx), iy(ny);
  for (int i = 0; i < nx; ++i) ix[i] = r.fx ? (nx - i) % nx : (i + r.sx) % nx;
  for (int j = 0; j < ny; ++j) iy[j] = r.fy ? (ny - j) % ny : (j + r.sy) % ny;
  for (int k = 0; k < nzt; ++k) {
    const int kk = r.fz ? nzt - 1 - k : k;
    for (int j = 0; j < ny; ++j) {
      const std::size_t dst = g.index(0, j, k);
      const std::size_t src = g.index(0, iy[j], kk);
      for (int i = 0; i < nx; ++i) out[dst + i] = in[src + ix[i]];
    }
  }
}

void negate(RealArray& a) {
  for (double& v : a) v = -v;
}

std::string factor_name(const GroupElement::Factor& f) {
  if (const auto* rot = std::get_if<Rotation>(&f)) {
    std::ostringstream s;
    s.precision(6);
    s << "rot(" << rot->phi << "," << rot->theta << ")";
    return s.str();
  }
  switch (std::get<Reflection>(f)) {
    case Reflection::X: return "kx";
    case Reflection::Y: return "ky";
    case Reflection::Z: return "kz";
  }
  return "?";
}

double max_abs_diff(const RealArray& a, const RealArray& b) {
  double m = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) m = std::max(m, std::abs(a[q] - b[q]));
  return m;
}

}  // namespace

GroupElement GroupElement::identity() { return GroupElement(); }

GroupElement GroupElement::rotation(double phi, double theta) {
  GroupElement g;
  g.factors_.push_back(Rotation{phi, theta});
  return g;
}

GroupElement GroupElement::kappa_x() {
  GroupElement g;
  g.factors_.push_back(Reflection::X);
  return g;
}

GroupElement GroupElement::kappa_y() {
  GroupElement g;
  g.factors_.push_back(Reflection::Y);
  return g;
}

GroupElement GroupElement::kappa_z() {
  GroupElement g;
  g.factors_.push_back(Reflection::Z);
  return g;
}

GroupElement GroupElement::operator*(const GroupElement& rhs) const {
  GroupElement g = *this;
  g.factors_.insert(g.factors_.end(), rhs.factors_.begin(), rhs.factors_.end());
  return g;
}

std::string GroupElement::name() const {
  if (factors_.empty()) return "id";
  std::string s;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) s += "*";
    s += factor_name(factors_[i]);
  }
  return s;
}

DisplacementField apply_group_element(const DisplacementField& u, const GroupElement& g) {
  const Grid3D& grid = u.grid;
  DisplacementField cur = u;
  DisplacementField next(grid);
  for (auto it = g.factors().rbegin(); it != g.factors().rend(); ++it) {
    const Remap r = remap_of(*it, grid);
    permute(cur.w1, next.w1, r, grid);
    permute(cur.w2, next.w2, r, grid);
    permute(cur.v, next.v, r, grid);
    if (r.fx || r.fz) negate(next.w1);
    if (r.fy || r.fz) negate(next.w2);
    if (r.fz) negate(next.v);
    std::swap(cur, next);
  }
  return cur;
}

Field3D apply_group_element(const Field3D& s, const GroupElement& g) {
  const Grid3D& grid = s.grid;
  Field3D cur = s;
  Field3D next(grid);
  for (auto it = g.factors().rbegin(); it != g.factors().rend(); ++it) {
    const Remap r = remap_of(*it, grid);
    permute(cur.psi, next.psi, r, grid);
    permute(cur.n1, next.n1, r, grid);
    permute(cur.n2, next.n2, r, grid);
    permute(cur.n3, next.n3, r, grid);
    if (r.fx || r.fz) negate(next.n1);
    if (r.fy || r.fz) negate(next.n2);
    if (r.fz)
      for (cplx& v : next.psi) v = std::conj(v);
    std::swap(cur, next);
  }
  return cur;
}

std::pair<cplx, cplx> mode_action(cplx u1, cplx u2, const GroupElement& g, const ModeIndex& mode) {
  for (auto it = g.factors().rbegin(); it != g.factors().rend(); ++it) {
    if (const auto* rot = std::get_if<Rotation>(&*it)) {
      const cplx e = std::polar(1.0, mode.m * rot->phi);
      const cplx f = std::polar(1.0, mode.n * rot->theta);
      u1 = e * f * u1;
      u2 = e * std::conj(f) * u2;
      continue;
    }
    switch (std::get<Reflection>(*it)) {
      case Reflection::X: {
        const cplx t = std::conj(u2);
        u2 = std::conj(u1);
        u1 = t;
        break;
      }
      case Reflection::Y: std::swap(u1, u2); break;
      case Reflection::Z:
        if (mode.l % 2 != 0) {
          u1 = -u1;
          u2 = -u2;
        }
        break;
    }
  }
  return {u1, u2};
}

std::string to_string(IsotropyTag tag) {
  switch (tag) {
    case IsotropyTag::O2xZ2: return "o2z2";
    case IsotropyTag::DxZ2: return "dz2";
    case IsotropyTag::O2tilde: return "o2t";
    case IsotropyTag::Dtilde: return "dt";
  }
  return "?";
}

IsotropyTag parse_isotropy_tag(const std::string& name) {
  if (name == "o2z2") return IsotropyTag::O2xZ2;
  if (name == "dz2") return IsotropyTag::DxZ2;
  if (name == "o2t") return IsotropyTag::O2tilde;
  if (name == "dt") return IsotropyTag::Dtilde;
  throw std::invalid_argument("unknown isotropy group '" + name + "' (o2z2, dz2, o2t, dt)");
}

IsotropySpec isotropy_spec(IsotropyTag tag, const ModeIndex& mode, double phi) {
  if (mode.m < 1 || mode.n < 1) throw std::domain_error("isotropy groups need m0, n0 >= 1");
  if (mode.l < 1) throw std::domain_error("mode index l must be >= 1");
  const bool even = mode.l % 2 == 0;
  const bool wants_even = tag == IsotropyTag::O2xZ2 || tag == IsotropyTag::DxZ2;
  if (even != wants_even)
    throw std::domain_error(to_string(tag) + " requires l0 " + (wants_even ? "even" : "odd"));

  using G = GroupElement;
  const double m0 = mode.m, n0 = mode.n;
  IsotropySpec s;
  s.tag = tag;
  s.mode = mode;
  switch (tag) {
    case IsotropyTag::O2xZ2:
      s.generators = {G::rotation(phi / m0, -phi / n0), G::kappa_x() * G::kappa_y(), G::kappa_z()};
      break;
    case IsotropyTag::DxZ2:
      s.generators = {G::rotation(pi / m0, -pi / n0), G::kappa_x(), G::kappa_y(), G::kappa_z()};
      break;
    case IsotropyTag::O2tilde:
      s.generators = {G::rotation(phi / m0, -phi / n0), G::kappa_x() * G::kappa_y() * G::kappa_z()};
      break;
    case IsotropyTag::Dtilde:
      s.generators = {G::rotation(pi / m0, -pi / n0), G::kappa_z() * G::kappa_x(),
                      G::kappa_z() * G::kappa_y()};
      break;
  }
  return s;
}

double lattice_phi(const ModeIndex& mode, const Grid3D& grid) {
  const long nx = grid.nx(), ny = grid.ny();
  const long m0 = mode.m, n0 = mode.n;
  if (m0 < 1 || n0 < 1) throw std::domain_error("isotropy groups need m0, n0 >= 1");
  for (long sx = 1; sx < nx * n0; ++sx) {
    if ((m0 * sx * ny) % (n0 * nx) != 0) continue;
    const double phi = 2.0 * pi * m0 * sx / nx;
    // A rotation acting trivially on the base mode pair would not constrain it.
    if (std::abs(std::sin(phi)) < 1e-12) continue;
    return phi;
  }
  throw std::domain_error("grid admits no lattice-compatible rotation for this mode");
}

IsotropySpec isotropy_spec(IsotropyTag tag, const ModeIndex& mode, const Grid3D& grid) {
  const bool continuous = tag == IsotropyTag::O2xZ2 || tag == IsotropyTag::O2tilde;
  const double phi = continuous ? lattice_phi(mode, grid) : 0.0;
  return isotropy_spec(tag, mode, phi);
}

FixedReport is_fixed(const DisplacementField& u, const IsotropySpec& spec, double tol) {
  FixedReport r;
  for (const auto& g : spec.generators) {
    const DisplacementField t = apply_group_element(u, g);
    const double d = std::max({max_abs_diff(t.w1, u.w1), max_abs_diff(t.w2, u.w2),
                               max_abs_diff(t.v, u.v)});
    r.per_generator.emplace_back(g.name(), d);
    r.max_deviation = std::max(r.max_deviation, d);
  }
  r.fixed = r.max_deviation <= tol;
  return r;
}

FixedSpace fixed_space(const IsotropySpec& spec, double tol) {
  const int ng = static_cast<int>(spec.generators.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4 * ng, 4);
  for (int gi = 0; gi < ng; ++gi)
    for (int c = 0; c < 4; ++c) {
      cplx u[2] = {0.0, 0.0};
      u[c / 2] = (c % 2 == 0) ? cplx(1.0, 0.0) : cplx(0.0, 1.0);
      const auto [a, b] = mode_action(u[0], u[1], spec.generators[gi], spec.mode);
      const double img[4] = {a.real(), a.imag(), b.real(), b.imag()};
      for (int row = 0; row < 4; ++row) A(4 * gi + row, c) = img[row] - (row == c ? 1.0 : 0.0);
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  FixedSpace out;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  out.dimension = 4 - rank;
  if (out.dimension > 0) {
    const Eigen::Vector4d v = svd.matrixV().col(3);
    out.basis = {cplx(v(0), v(1)), cplx(v(2), v(3))};
  }
  return out;
}

BranchProfile branch_profile(const IsotropySpec& spec, double r, double lambda, const Parameters& p,
                             const Grid3D& grid) {
  // Amplitudes (c1, c2) on (e_{m0,n0,l0}, e_{m0,-n0,l0}); u = r Re(c1 e+ e^{i th+} + c2 e- e^{i th-}).
  cplx c1 = 1.0, c2 = 0.0;
  switch (spec.tag) {
    case IsotropyTag::O2xZ2: break;
    case IsotropyTag::DxZ2: c2 = 1.0; break;
    case IsotropyTag::O2tilde: c1 = cplx(0.0, -1.0); break;
    case IsotropyTag::Dtilde: c2 = -1.0; break;
  }
  const ModeIndex& m = spec.mode;
  const EigenProfile ep = eigenfunction(m, lambda, p, grid);
  const EigenProfile em = eigenfunction(ModeIndex{m.m, -m.n, m.l}, lambda, p, grid);

  BranchProfile b{spec, r, lambda, DisplacementField(grid), Field3D(grid)};
  RealArray* comp[3] = {&b.u.w1, &b.u.w2, &b.u.v};
  std::vector<cplx> plus(grid.slab()), minus(grid.slab());
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) {
      const double tx = grid.a() * m.m * grid.x(i);
      const double ty = grid.b() * m.n * grid.y(j);
      plus[static_cast<std::size_t>(j) * grid.nx() + i] = std::polar(1.0, tx + ty);
      minus[static_cast<std::size_t>(j) * grid.nx() + i] = std::polar(1.0, tx - ty);
    }
  for (int k = 1; k <= grid.nz(); ++k) {
    const std::size_t off = grid.index(0, 0, k);
    for (int c = 0; c < 3; ++c) {
      const cplx ap = r * c1 * ep.value(c, k);
      const cplx am = r * c2 * em.value(c, k);
      for (std::size_t q = 0; q < grid.slab(); ++q)
        (*comp[c])[off + q] = (ap * plus[q] + am * minus[q]).real();
    }
  }
  b.state = state_from_displacement(b.u, 1.0, p);
  return b;
}

}  // namespace undulate
