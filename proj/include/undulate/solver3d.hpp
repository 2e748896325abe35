#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "undulate/core.hpp"
#include "undulate/energy.hpp"
#include "undulate/tridiagonal.hpp"

namespace undulate {

/// Variational: the L2 descent flow of the discrete energy with mobility 1/2 for n
/// and 1/(2 c^2 eps^2) for psi, so the linearized flow is du/dt = -L u.
/// PaperLiteral: the printed flow equations, coefficient for coefficient.
enum class RhsMode { Variational, PaperLiteral };

std::string to_string(RhsMode mode);
RhsMode parse_rhs_mode(const std::string& name);

struct SolverConfig3D {
  double dt = 1e-3;
  double t_end = 10.0;
  long max_steps = 0;  // 0: no limit
  RhsMode mode = RhsMode::Variational;
  int snapshot_stride = 0;  // 0: no snapshots
  int trace_stride = 10;
  double stop_tol = 1e-8;
  bool use_stop_rule = true;
  int max_halvings = 6;

  void validate() const;
};

/// Time derivatives (dn/dt before projection, dpsi/dt), zero on the plates.
struct Rhs3D {
  explicit Rhs3D(const Grid3D& g) : psi(g.size()), n1(g.size()), n2(g.size()), n3(g.size()) {}
  ComplexArray psi;
  RealArray n1, n2, n3;
};

Rhs3D rhs(const Field3D& state, const Parameters& p, RhsMode mode);

/// Projection-method stepper with precomputed z-factorizations per lateral mode.
class Solver3D {
 public:
  Solver3D(const Parameters& p, const Grid3D& grid, RhsMode mode, double dt);

  /// Advances in place. Throws DefectError if |n*| < 1e-8 anywhere.
  void step(Field3D& s);

  double dt() const { return dt_; }
  void set_dt(double dt);
  Energy3D& energy() { return energy_; }

 private:
  void factorize();
  void solve_director(Field3D& s);
  void solve_psi_variational(Field3D& s);
  void solve_psi_literal(Field3D& s);
  void paper_director_force(const Field3D& s);
  void literal_psi_rhs(const Field3D& s);

  Parameters p_;
  Grid3D grid_;
  RhsMode mode_;
  double dt_;
  Energy3D energy_;
  TridiagonalBatch n_sys_, psi_sys_;
  std::vector<double> n_off_, psi_off_;
  RealArray f1_, f2_, f3_;
  ComplexArray hat_, chat_, cbuf_, gx_, gy_;
};

Field3D step(const Field3D& state, const SolverConfig3D& cfg, const Parameters& p);

struct TraceSample {
  double t = 0;
  EnergyBreakdown energy;
  double amplitude = 0;  // max |(n1, n2)| on the mid-plane
  int m_dom = 0;
  int n_dom = 0;
};

struct Trace {
  std::vector<TraceSample> samples;
};

struct RunResult3D {
  Field3D state;
  Trace trace;
  double dt = 0;
  int halvings = 0;
  long steps = 0;
  bool converged = false;
};

/// Called after accepted steps that are multiples of the snapshot stride.
using SnapshotObserver = std::function<void(const Field3D&, long step, double t)>;

/// Integrates until t_end, max_steps or the stopping rule
/// |E(t) - E(t - D)| / (D (1 + |E|)) < stop_tol with D = 100 dt.
/// In Variational mode a step that raises the energy is retried with dt/2,
/// at most max_halvings times, after which EnergyIncreaseError is thrown.
RunResult3D run(const Field3D& state0, const SolverConfig3D& cfg, const Parameters& p,
                const SnapshotObserver& observer = {});

double midplane_amplitude(const Field3D& s);

/// Lateral mode (m >= 0, n signed folded to >= 0) carrying the most power of
/// (n1, n2) on slab k, excluding the mean.
std::pair<int, int> dominant_mode(const Field3D& s, int k);

/// max |(n1, n2)| on every z slab.
std::vector<double> amplitude_profile(const Field3D& s);

void write_trace_csv(const std::string& path, const Trace& trace);

}  // namespace undulate
