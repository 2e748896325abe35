#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "undulate/core.hpp"
#include "undulate/energy.hpp"
#include "undulate/walls.hpp"

namespace undulate {

struct SolverConfig2D {
  double dt = 1e-3;
  long max_steps = 200000;
  double t_end = std::numeric_limits<double>::infinity();
  double stop_tol = 1e-8;
  int snapshot_stride = 0;
  int trace_stride = 100;
  double delta = 1.5;
  /// Replace the phase relaxation by the exact Poisson solve after every step.
  bool exact_phase = false;
  int max_halvings = 6;

  void validate() const;
};

/// Semi-implicit planar flow: spectral implicit diffusion, implicit n_par and n3
/// relaxation, explicit grad(phi) forcing, renormalization; then the implicit
/// phase relaxation driven by the new director.
class Solver2D {
 public:
  /// p.eps and p.delta (required) define the energy.
  Solver2D(const Parameters& p, const Grid2D& grid, double dt, bool exact_phase = false);

  void step(Field2D& s);

  double dt() const { return dt_; }
  void set_dt(double dt);
  Planar& planar() { return planar_; }

 private:
  Parameters p_;
  Grid2D grid_;
  double dt_;
  bool exact_phase_;
  Planar planar_;
  ComplexArray h1_, h2_, h3_, hp_;
};

Field2D step2d(const Field2D& state, const SolverConfig2D& cfg, const Parameters& p);

struct Trace2DSample {
  double t = 0;
  EnergyBreakdown energy;
  double mass1 = 0;  // integral of n1
  double mass2 = 0;
  double m3sq = 0;   // integral of n3^2
  std::pair<int, int> mode1{0, 0};  // dominant Fourier mode of n1
  std::pair<int, int> mode2{0, 0};
};

struct Trace2D {
  std::vector<Trace2DSample> samples;
};

struct RunResult2D {
  Field2D state;
  Trace2D trace;
  double dt = 0;
  int halvings = 0;
  long steps = 0;
  bool converged = false;
};

using SnapshotObserver2D = std::function<void(const Field2D&, long step, double t)>;

/// Runs to equilibrium with the same stopping rule as the 3D solver. The energy is
/// checked at every trace sample; an increase restarts from the previous sample
/// with dt halved (at most max_halvings times, then EnergyIncreaseError).
RunResult2D run2d(const Field2D& state0, const SolverConfig2D& cfg, const Parameters& p,
                  const SnapshotObserver2D& observer = {});

struct PatternClass {
  PatternKind kind = PatternKind::Other;
  double confidence = 0;
  double frac_x = 0;  // power fraction of (n1, n2) in modes varying only in x
  double frac_y = 0;
};

/// Stripe1D if >= 99% of the in-plane power varies in a single direction,
/// Square2D if both directions carry >= 25%, Other otherwise.
PatternClass classify_pattern(const Field2D& state);

/// Square wave s(t) = sign(cos(2 pi t)) sampled at cell centers offset by h/2.
Field2D synthetic_square(const Grid2D& grid);
Field2D synthetic_stripe(const Grid2D& grid);

void write_trace2d_csv(const std::string& path, const Trace2D& trace);

}  // namespace undulate
