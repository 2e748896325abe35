#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <stdexcept>

#include "undulate/errors.hpp"
#include "undulate/fft.hpp"
#include "undulate/snapshot.hpp"
#include "undulate/solver2d.hpp"
#include "undulate/solver3d.hpp"
#include "undulate/spectrum.hpp"
#include "undulate/symmetry.hpp"
#include "undulate/walls.hpp"

#ifndef UNDULATE_VERSION
#define UNDULATE_VERSION "0.0.0"
#endif

namespace undulate::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using V = ValueType;

OptionSpec common_threads() { return {"threads", V::Integer, 0, "worker threads (0: UNDULATE_THREADS or 1)"}; }
OptionSpec common_out(const std::string& dir) { return {"out-dir", V::Text, dir, "output directory"}; }

const std::map<std::string, std::vector<OptionSpec>>& tables() {
  static const std::map<std::string, std::vector<OptionSpec>> t = {
      {"spectrum",
       {{"eps", V::Real, 0.3, "layer thickness ratio"},
        {"a", V::Real, 1.0, "lateral wave number scale in x"},
        {"b", V::Real, 1.0, "lateral wave number scale in y"},
        {"mmax", V::Integer, 8, "largest |m| searched"},
        {"nmax", V::Integer, 8, "largest |n| searched"},
        {"lmax", V::Integer, 4, "largest l searched"},
        {"no-axial", V::Flag, false, "exclude modes with m = 0 or n = 0"},
        {"tol", V::Real, 1e-9, "relative tolerance for resonance detection"},
        common_out("spectrum-out"),
        common_threads()}},
      {"branch",
       {{"group", V::Text, "o2z2", "isotropy group: o2z2, dz2, o2t, dt"},
        {"m0", V::Integer, 1, "base mode m0"},
        {"n0", V::Integer, 1, "base mode n0"},
        {"l0", V::Integer, 2, "base mode l0"},
        {"r", V::Real, 0.05, "branch amplitude"},
        {"eps", V::Real, 0.3, "layer thickness ratio"},
        {"c", V::Real, 1.0, "order parameter scale"},
        {"g", V::Real, 1.0, "potential coefficient"},
        {"a", V::Real, 1.0, "lateral wave number scale in x"},
        {"b", V::Real, 1.0, "lateral wave number scale in y"},
        {"nx", V::Integer, 32, "grid points in x"},
        {"ny", V::Integer, 32, "grid points in y"},
        {"nz", V::Integer, 31, "interior grid points in z"},
        common_out("branch-out"),
        common_threads()}},
      {"energy",
       {{"snapshot", V::Text, "", "snapshot file (3D or planar)", true},
        common_out("energy-out"),
        common_threads()}},
      {"walls",
       {{"pattern", V::Text, "square", "wall pattern: square or stripe"},
        common_out("walls-out"),
        common_threads()}},
      {"sim3d",
       {{"eps", V::Real, 0.3, "layer thickness ratio"},
        {"tau", V::Real, 2.5, "magnetic field strength"},
        {"c", V::Real, 1.0, "order parameter scale"},
        {"g", V::Real, 1.0, "potential coefficient"},
        {"a", V::Real, 1.0, "lateral wave number scale in x"},
        {"b", V::Real, 1.0, "lateral wave number scale in y"},
        {"nx", V::Integer, 32, "grid points in x"},
        {"ny", V::Integer, 32, "grid points in y"},
        {"nz", V::Integer, 31, "interior grid points in z"},
        {"dt", V::Real, 1e-2, "time step"},
        {"tend", V::Real, 10.0, "final time"},
        {"eta", V::Real, 0.1, "perturbation amplitude"},
        {"seed", V::Integer, 1, "random seed"},
        {"mode", V::Text, "variational", "right-hand side: variational or paper"},
        {"snapshot-stride", V::Integer, 0, "steps between snapshots (0: final only)"},
        {"trace-stride", V::Integer, 10, "steps between trace samples"},
        {"stop-tol", V::Real, 1e-8, "relative energy-rate stopping tolerance"},
        {"no-stop-rule", V::Flag, false, "run to tend regardless of convergence"},
        common_out("sim3d-out"),
        common_threads()}},
      {"sim2d",
       {{"eps", V::Real, 0.01, "wall width"},
        {"delta", V::Real, 1.5, "penalty exponent, 1 < delta < 2"},
        {"n", V::Integer, 256, "grid points per side"},
        {"dt", V::Real, 1e-3, "time step"},
        {"tend", V::Real, 100.0, "final time"},
        {"max-steps", V::Integer, 200000, "step limit"},
        {"eta", V::Real, 0.1, "perturbation amplitude"},
        {"band", V::Integer, 1, "largest Fourier mode of the perturbation"},
        {"seed", V::Integer, 1, "random seed"},
        {"exact-phase", V::Flag, false, "solve the phase exactly after each step"},
        {"snapshot-stride", V::Integer, 0, "steps between snapshots (0: final only)"},
        {"trace-stride", V::Integer, 100, "steps between trace samples"},
        {"stop-tol", V::Real, 1e-8, "relative energy-rate stopping tolerance"},
        common_out("sim2d-out"),
        common_threads()}},
      {"reproduce",
       {{"target", V::Text, "", "spectrum-table, table1, onset or walls", true},
        {"seed", V::Integer, 1, "random seed for simulation targets"},
        common_out("reproduce-out"),
        common_threads()}},
  };
  return t;
}

const OptionSpec* find_option(const std::vector<OptionSpec>& opts, const std::string& key) {
  for (const auto& o : opts)
    if (o.key == key) return &o;
  return nullptr;
}

json parse_flag_value(const OptionSpec& o, const std::string& raw) {
  const auto bad = [&] { return UsageError(fmt::format("{}: cannot parse '{}'", o.key, raw)); };
  switch (o.type) {
    case V::Real: {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(raw, &used);
      } catch (const std::exception&) {
        throw bad();
      }
      if (used != raw.size()) throw bad();
      return v;
    }
    case V::Integer: {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(raw, &used);
      } catch (const std::exception&) {
        throw bad();
      }
      if (used != raw.size()) throw bad();
      return v;
    }
    case V::Text:
      return raw;
    case V::Flag:
      if (raw == "true" || raw == "1") return true;
      if (raw == "false" || raw == "0") return false;
      throw bad();
  }
  throw bad();
}

json check_file_value(const OptionSpec& o, const json& v) {
  const auto bad = [&] { return UsageError(fmt::format("{}: wrong type in config file", o.key)); };
  switch (o.type) {
    case V::Real:
      if (!v.is_number()) throw bad();
      return v.get<double>();
    case V::Integer:
      if (!v.is_number_integer()) throw bad();
      return v.get<long long>();
    case V::Text:
      if (!v.is_string()) throw bad();
      return v;
    case V::Flag:
      if (!v.is_boolean()) throw bad();
      return v;
  }
  throw bad();
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw UsageError(fmt::format("{}: {}", key, what));
}

// Range checks beyond Parameters::validate.
void validate_ranges(const ResolvedConfig& cfg) {
  const auto has = [&](const char* k) { return cfg.values.contains(k); };
  for (const char* k : {"eps", "c", "g", "a", "b", "dt", "r", "tol", "stop-tol"})
    if (has(k)) require(cfg.real(k) > 0.0 && std::isfinite(cfg.real(k)), k, "must be positive");
  for (const char* k : {"tau", "eta", "tend"})
    if (has(k)) require(cfg.real(k) >= 0.0 && std::isfinite(cfg.real(k)), k, "must be nonnegative");
  if (has("delta"))
    require(cfg.real("delta") > 1.0 && cfg.real("delta") < 2.0, "delta", "requires 1 < delta < 2");
  for (const char* k : {"nx", "ny", "n"})
    if (has(k)) require(cfg.integer(k) >= 4 && cfg.integer(k) % 2 == 0, k, "must be even and >= 4");
  if (has("nz")) require(cfg.integer("nz") >= 3, "nz", "must be >= 3");
  for (const char* k : {"mmax", "nmax", "lmax", "m0", "n0", "l0", "band", "trace-stride"})
    if (has(k)) require(cfg.integer(k) >= 1, k, "must be >= 1");
  for (const char* k : {"snapshot-stride", "max-steps", "threads", "seed"})
    if (has(k)) require(cfg.integer(k) >= 0, k, "must be nonnegative");
  if (has("group")) {
    try {
      parse_isotropy_tag(cfg.text("group"));
    } catch (const std::exception&) {
      throw UsageError("group: expected one of o2z2, dz2, o2t, dt");
    }
  }
  if (has("mode")) {
    try {
      parse_rhs_mode(cfg.text("mode"));
    } catch (const std::exception&) {
      throw UsageError("mode: expected variational or paper");
    }
  }
  if (has("pattern"))
    require(cfg.text("pattern") == "square" || cfg.text("pattern") == "stripe", "pattern",
            "expected square or stripe");
  if (has("target")) {
    const std::string t = cfg.text("target");
    require(t == "spectrum-table" || t == "table1" || t == "onset" || t == "walls", "target",
            "expected spectrum-table, table1, onset or walls");
  }
  if (has("snapshot")) require(!cfg.text("snapshot").empty(), "snapshot", "a snapshot file is required");
  require(!cfg.text("out-dir").empty(), "out-dir", "must not be empty");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("config: cannot open '{}'", path));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(fmt::format("config: invalid JSON in '{}': {}", path, e.what()));
  }
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns the output files it wrote and a grid description.

struct RunOutput {
  std::vector<std::string> files;
  ordered_json grid = ordered_json::object();
  int exit_code = 0;
};

std::string join(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string mode_list(const std::vector<ModeIndex>& modes) {
  std::string s;
  for (const auto& m : modes) s += fmt::format("{}({},{},{})", s.empty() ? "" : " ", m.m, m.n, m.l);
  return s;
}

std::string spectrum_csv(const Parameters& p, const SearchBounds& bounds, bool no_axial) {
  std::string csv = "m,n,l,p2,tau_crit,slope\n";
  for (int m = 0; m <= bounds.m_max; ++m)
    for (int n = 0; n <= bounds.n_max; ++n) {
      if (m == 0 && n == 0) continue;
      if (no_axial && (m == 0 || n == 0)) continue;
      for (int l = 1; l <= bounds.l_max; ++l) {
        const ModeIndex mode{m, n, l};
        const ModeSpectrum s = analyze_mode(mode, critical_field(mode, p), p);
        csv += fmt::format("{},{},{},{:.17g},{:.17g},{:.17g}\n", m, n, l, s.p2, s.tau_crit, s.slope);
      }
    }
  return csv;
}

RunOutput cmd_spectrum(const ResolvedConfig& cfg, const Parameters& p, const fs::path& dir) {
  const SearchBounds bounds{static_cast<int>(cfg.integer("mmax")), static_cast<int>(cfg.integer("nmax")),
                            static_cast<int>(cfg.integer("lmax"))};
  const bool no_axial = cfg.flag("no-axial");
  const CriticalField cf = global_critical_field(p, bounds, no_axial);
  RunOutput out;
  const std::string csv_path = join(dir, "spectrum.csv");
  write_text(csv_path, spectrum_csv(p, bounds, no_axial));
  out.files.push_back(csv_path);

  std::vector<ModeIndex> res;
  for (const auto& m : cf.argmin) {
    const auto r = detect_resonances(m, p, bounds, cfg.real("tol"));
    res.insert(res.end(), r.begin(), r.end());
  }
  const std::string summary = fmt::format("tau_c={:.12f} argmin={} resonances={}\n", cf.tau_c,
                                          mode_list(cf.argmin), res.empty() ? "none" : mode_list(res));
  const std::string sum_path = join(dir, "summary.txt");
  write_text(sum_path, summary);
  out.files.push_back(sum_path);
  std::cout << summary;
  out.grid = {{"mmax", bounds.m_max}, {"nmax", bounds.n_max}, {"lmax", bounds.l_max}};
  return out;
}

RunOutput cmd_branch(const ResolvedConfig& cfg, Parameters p, const fs::path& dir) {
  const Grid3D grid(static_cast<int>(cfg.integer("nx")), static_cast<int>(cfg.integer("ny")),
                    static_cast<int>(cfg.integer("nz")), p.a, p.b);
  const ModeIndex mode{static_cast<int>(cfg.integer("m0")), static_cast<int>(cfg.integer("n0")),
                       static_cast<int>(cfg.integer("l0"))};
  const IsotropyTag tag = parse_isotropy_tag(cfg.text("group"));
  IsotropySpec spec;
  try {
    spec = isotropy_spec(tag, mode, grid);
  } catch (const std::domain_error& e) {
    throw UsageError(fmt::format("l0: {}", e.what()));
  }
  p.tau = critical_field(mode, p);
  const BranchProfile bp = branch_profile(spec, cfg.real("r"), 0.0, p, grid);

  RunOutput out;
  const std::string snap = join(dir, "branch.und");
  write_snapshot(snap, bp.state, p);
  out.files.push_back(snap);

  std::string csv = "group,generator,max_deviation,fixed\n";
  for (IsotropyTag other : {IsotropyTag::O2xZ2, IsotropyTag::DxZ2, IsotropyTag::O2tilde, IsotropyTag::Dtilde}) {
    IsotropySpec s;
    try {
      s = isotropy_spec(other, mode, grid);
    } catch (const std::domain_error&) {
      continue;  // parity of l0 excludes this group
    }
    const FixedReport fr = is_fixed(bp.u, s, 1e-12);
    for (const auto& [name, dev] : fr.per_generator)
      csv += fmt::format("{},{},{:.3e},{}\n", to_string(other), name, dev, dev <= 1e-12 ? 1 : 0);
  }
  const std::string rep = join(dir, "symmetry.csv");
  write_text(rep, csv);
  out.files.push_back(rep);
  std::cout << fmt::format("group={} mode=({},{},{}) tau={:.12f} r={}\n", to_string(tag), mode.m, mode.n,
                           mode.l, p.tau, cfg.real("r"));
  out.grid = {{"nx", grid.nx()}, {"ny", grid.ny()}, {"nz", grid.nz()}};
  return out;
}

std::string energy_json(const EnergyBreakdown& e) {
  ordered_json j = {{"compression", e.compression}, {"frank", e.frank}, {"potential", e.potential},
                    {"magnetic", e.magnetic}, {"total", e.total}};
  return j.dump(2) + "\n";
}

bool is_planar_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("snapshot: cannot open '{}'", path));
  char magic[4] = {};
  in.read(magic, 4);
  return in && std::string(magic, 4) == "UND2";
}

RunOutput cmd_energy(const ResolvedConfig& cfg, Parameters& p, const fs::path& dir) {
  const std::string path = cfg.text("snapshot");
  RunOutput out;
  EnergyBreakdown e;
  if (is_planar_snapshot(path)) {
    auto [s, q] = read_snapshot_2d(path);
    e = planar_energy(s, q);
    p = q;
    out.grid = {{"n", s.grid.n()}};
  } else {
    auto [s, q] = read_snapshot(path);
    e = total_energy(s, q);
    p = q;
    out.grid = {{"nx", s.grid.nx()}, {"ny", s.grid.ny()}, {"nz", s.grid.nz()}};
  }
  const std::string text = energy_json(e);
  const std::string file = join(dir, "energy.json");
  write_text(file, text);
  out.files.push_back(file);
  std::cout << text;
  return out;
}

RunOutput cmd_walls(const ResolvedConfig& cfg, const fs::path& dir) {
  const bool square = cfg.text("pattern") == "square";
  const WallPattern pat = square ? square_pattern() : stripe_pattern();
  const double bound = pattern_lower_bound(pat);
  const std::string line = fmt::format("pattern={} lower_bound={:.15f}\n", cfg.text("pattern"), bound);
  RunOutput out;
  const std::string file = join(dir, "walls.txt");
  write_text(file, line);
  out.files.push_back(file);
  std::cout << line;
  return out;
}

RunOutput cmd_sim3d(const ResolvedConfig& cfg, const Parameters& p, const fs::path& dir) {
  const Grid3D grid(static_cast<int>(cfg.integer("nx")), static_cast<int>(cfg.integer("ny")),
                    static_cast<int>(cfg.integer("nz")), p.a, p.b);
  SolverConfig3D sc;
  sc.dt = cfg.real("dt");
  sc.t_end = cfg.real("tend");
  sc.mode = parse_rhs_mode(cfg.text("mode"));
  sc.snapshot_stride = static_cast<int>(cfg.integer("snapshot-stride"));
  sc.trace_stride = static_cast<int>(cfg.integer("trace-stride"));
  sc.stop_tol = cfg.real("stop-tol");
  sc.use_stop_rule = !cfg.flag("no-stop-rule");

  RunOutput out;
  const Field3D s0 = perturbed_state(p, grid, cfg.real("eta"), static_cast<std::uint64_t>(cfg.integer("seed")));
  SnapshotObserver obs = [&](const Field3D& s, long step, double) {
    const std::string f = join(dir, fmt::format("snap_{:08d}.und", step));
    write_snapshot(f, s, p);
    out.files.push_back(f);
  };
  const RunResult3D r = undulate::run(s0, sc, p, obs);

  const std::string fin = join(dir, "final.und");
  write_snapshot(fin, r.state, p);
  out.files.push_back(fin);
  const std::string tr = join(dir, "trace.csv");
  write_trace_csv(tr, r.trace);
  out.files.push_back(tr);
  const struct {
    SliceAxis axis;
    int index;
    const char* name;
  } slices[] = {{SliceAxis::Z, grid.mid_plane(), "slice_z0.csv"},
                {SliceAxis::Y, grid.ny() / 2, "slice_y0.csv"},
                {SliceAxis::X, grid.nx() / 2, "slice_x0.csv"}};
  for (const auto& sl : slices) {
    const std::string f = join(dir, sl.name);
    write_slice_csv(f, r.state, sl.axis, sl.index);
    out.files.push_back(f);
  }
  const TraceSample& last = r.trace.samples.back();
  std::cout << fmt::format("steps={} t={:.6g} dt={:.3g} halvings={} converged={} E={:.12g} amp={:.6g} mode=({},{})\n",
                           r.steps, last.t, r.dt, r.halvings, r.converged ? 1 : 0, last.energy.total,
                           last.amplitude, last.m_dom, last.n_dom);
  out.grid = {{"nx", grid.nx()}, {"ny", grid.ny()}, {"nz", grid.nz()}};
  return out;
}

struct Planar2DRun {
  RunResult2D result;
  PatternClass pattern;
};

Planar2DRun simulate_2d(const Parameters& p, const SolverConfig2D& sc, int n, double eta, int band,
                        std::uint64_t seed, const fs::path& dir, std::vector<std::string>& files) {
  const Field2D s0 = perturbed_state_2d(Grid2D(n), eta, seed, band);
  SnapshotObserver2D obs = [&](const Field2D& s, long step, double) {
    const std::string f = join(dir, fmt::format("snap_{:08d}.und2", step));
    write_snapshot_2d(f, s, p);
    files.push_back(f);
  };
  Planar2DRun out{run2d(s0, sc, p, obs), {}};
  out.pattern = classify_pattern(out.result.state);
  const std::string fin = join(dir, "final.und2");
  write_snapshot_2d(fin, out.result.state, p);
  files.push_back(fin);
  const std::string tr = join(dir, "trace.csv");
  write_trace2d_csv(tr, out.result.trace);
  files.push_back(tr);
  const std::string pl = join(dir, "planar.csv");
  write_planar_csv(pl, out.result.state);
  files.push_back(pl);
  return out;
}

RunOutput cmd_sim2d(const ResolvedConfig& cfg, const Parameters& p, const fs::path& dir) {
  SolverConfig2D sc;
  sc.dt = cfg.real("dt");
  sc.t_end = cfg.real("tend");
  sc.max_steps = cfg.integer("max-steps");
  sc.delta = cfg.real("delta");
  sc.exact_phase = cfg.flag("exact-phase");
  sc.snapshot_stride = static_cast<int>(cfg.integer("snapshot-stride"));
  sc.trace_stride = static_cast<int>(cfg.integer("trace-stride"));
  sc.stop_tol = cfg.real("stop-tol");
  RunOutput out;
  const int n = static_cast<int>(cfg.integer("n"));
  const Planar2DRun r = simulate_2d(p, sc, n, cfg.real("eta"), static_cast<int>(cfg.integer("band")),
                                    static_cast<std::uint64_t>(cfg.integer("seed")), dir, out.files);
  const Trace2DSample& last = r.result.trace.samples.back();
  std::cout << fmt::format(
      "steps={} t={:.6g} dt={:.3g} halvings={} converged={} E={:.12g} mass1={:.3e} mass2={:.3e} pattern={}\n",
      r.result.steps, last.t, r.result.dt, r.result.halvings, r.result.converged ? 1 : 0, last.energy.total,
      last.mass1, last.mass2, to_string(r.pattern.kind));
  out.grid = {{"n", n}};
  return out;
}

// --- reproduce -------------------------------------------------------------

struct Check {
  std::string name;
  double measured;
  std::string expected;
  bool pass;
};

ordered_json report_json(const std::string& target, const std::vector<Check>& checks) {
  ordered_json j;
  j["target"] = target;
  j["checks"] = ordered_json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"name", c.name}, {"measured", c.measured}, {"expected", c.expected}, {"pass", c.pass}});
  return j;
}

Parameters onset_parameters(double tau) {
  Parameters p;
  p.eps = 0.3;
  p.tau = tau;
  p.c = std::sqrt(5.0);
  p.g = 0.25;
  p.a = 2.0 / 3.0;
  p.b = 2.0 / 3.0;
  return p;
}

std::vector<Check> reproduce_walls() {
  const double sq = pattern_lower_bound(square_pattern());
  const double st = pattern_lower_bound(stripe_pattern());
  const double sq_exact = 2.0 * std::numbers::sqrt2 * (4.0 - std::numbers::pi);
  const double st_exact = 8.0 * (std::numbers::sqrt2 - 1.0);
  return {{"square_bound", sq, fmt::format("{:.15f}", sq_exact), std::abs(sq - sq_exact) <= 1e-12},
          {"stripe_bound", st, fmt::format("{:.15f}", st_exact), std::abs(st - st_exact) <= 1e-12},
          {"square_below_stripe", st - sq, "> 0", sq < st}};
}

std::vector<Check> reproduce_spectrum(const fs::path& dir, std::vector<std::string>& files) {
  const Parameters p = onset_parameters(0.0);
  const SearchBounds bounds{8, 8, 4};
  const CriticalField cf = global_critical_field(p, bounds, false);
  const std::string csv = join(dir, "spectrum.csv");
  write_text(csv, spectrum_csv(p, bounds, false));
  files.push_back(csv);
  return {{"tau_c", cf.tau_c, "in [1.9, 2.1]", cf.tau_c >= 1.9 && cf.tau_c <= 2.1}};
}

std::vector<Check> reproduce_table1(std::uint64_t seed, const fs::path& dir, std::vector<std::string>& files) {
  Parameters p;
  p.eps = 0.01;
  p.delta = 1.5;
  SolverConfig2D sc;
  sc.delta = 1.5;
  const Planar2DRun r = simulate_2d(p, sc, 256, 0.1, 1, seed, dir, files);
  const Trace2DSample& last = r.result.trace.samples.back();
  const double E = last.energy.total;
  return {{"energy_eps_0.01", E, "3.50 within 15%", std::abs(E - 3.50) <= 0.15 * 3.50},
          {"square_pattern", r.pattern.kind == PatternKind::Square2D ? 1.0 : 0.0, "1 (square)",
           r.pattern.kind == PatternKind::Square2D},
          {"mass1", last.mass1, "|.| <= 1e-2", std::abs(last.mass1) <= 1e-2},
          {"mass2", last.mass2, "|.| <= 1e-2", std::abs(last.mass2) <= 1e-2}};
}

std::vector<Check> reproduce_onset(std::uint64_t seed, const fs::path& dir, std::vector<std::string>& files) {
  std::vector<Check> checks;
  const Grid3D grid(64, 64, 63, 2.0 / 3.0, 2.0 / 3.0);
  for (double tau : {1.5, 2.5}) {
    const Parameters p = onset_parameters(tau);
    SolverConfig3D sc;
    sc.dt = 1e-2;
    sc.t_end = tau < 2.0 ? 8.0 : 12.0;
    sc.trace_stride = 50;
    sc.use_stop_rule = false;
    const RunResult3D r = undulate::run(perturbed_state(p, grid, 0.1, seed), sc, p);
    const std::string tag = tau < 2.0 ? "tau1.5" : "tau2.5";
    const std::string tr = join(dir, "trace_" + tag + ".csv");
    write_trace_csv(tr, r.trace);
    files.push_back(tr);
    const double a0 = r.trace.samples.front().amplitude;
    const double a1 = r.trace.samples.back().amplitude;
    if (tau < 2.0) {
      checks.push_back({"decay_ratio_" + tag, a1 / a0, "< 0.01", a1 < 0.01 * a0});
      continue;
    }
    double amin = a0;
    for (const auto& s : r.trace.samples) amin = std::min(amin, s.amplitude);
    const auto& last = r.trace.samples.back();
    const int k2 = last.m_dom * last.m_dom + last.n_dom * last.n_dom;
    checks.push_back({"growth_ratio_" + tag, a1 / amin, ">= 10", a1 >= 10.0 * amin});
    checks.push_back({"dominant_m2n2_" + tag, static_cast<double>(k2), "in {4,5,8}", k2 == 4 || k2 == 5 || k2 == 8});
    const std::vector<double> prof = amplitude_profile(r.state);
    const auto peak = std::max_element(prof.begin(), prof.end()) - prof.begin();
    const double zp = grid.z(static_cast<int>(peak));
    checks.push_back({"profile_peak_z_" + tag, zp, "in [-pi/6, pi/6]", std::abs(zp) <= std::numbers::pi / 6.0});
  }
  return checks;
}

RunOutput cmd_reproduce(const ResolvedConfig& cfg, const fs::path& dir) {
  const std::string target = cfg.text("target");
  const auto seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  RunOutput out;
  std::vector<Check> checks;
  if (target == "walls") checks = reproduce_walls();
  else if (target == "spectrum-table") checks = reproduce_spectrum(dir, out.files);
  else if (target == "table1") checks = reproduce_table1(seed, dir, out.files);
  else checks = reproduce_onset(seed, dir, out.files);

  bool all = true;
  for (const auto& c : checks) {
    std::cout << fmt::format("{:<24} measured={:<22.15g} expected={:<18} {}\n", c.name, c.measured, c.expected,
                             c.pass ? "PASS" : "FAIL");
    all = all && c.pass;
  }
  std::cout << fmt::format("reproduce {}: {}\n", target, all ? "PASS" : "FAIL");
  const std::string rep = join(dir, "report.json");
  write_text(rep, report_json(target, checks).dump(2) + "\n");
  out.files.push_back(rep);
  out.exit_code = all ? 0 : 4;
  return out;
}

}  // namespace

std::vector<std::string> subcommands() {
  std::vector<std::string> names;
  for (const auto& [k, v] : tables()) names.push_back(k);
  return names;
}

const std::vector<OptionSpec>& options_for(const std::string& subcommand) {
  const auto it = tables().find(subcommand);
  if (it == tables().end()) throw UsageError(fmt::format("unknown subcommand '{}'", subcommand));
  return it->second;
}

double ResolvedConfig::real(const std::string& key) const { return values.at(key).get<double>(); }
long ResolvedConfig::integer(const std::string& key) const { return values.at(key).get<long>(); }
std::string ResolvedConfig::text(const std::string& key) const { return values.at(key).get<std::string>(); }
bool ResolvedConfig::flag(const std::string& key) const { return values.at(key).get<bool>(); }

ResolvedConfig resolve_config(const std::string& subcommand, const std::map<std::string, std::string>& flags,
                              const std::optional<json>& file) {
  const auto& opts = options_for(subcommand);
  ResolvedConfig cfg;
  cfg.subcommand = subcommand;
  for (const auto& o : opts) {
    cfg.values[o.key] = o.fallback;
    cfg.source[o.key] = "default";
  }
  if (file) {
    if (!file->is_object()) throw UsageError("config: top level must be a JSON object");
    for (const auto& [key, value] : file->items()) {
      const OptionSpec* o = find_option(opts, key);
      if (!o) throw UsageError(fmt::format("{}: unknown key for '{}'", key, subcommand));
      cfg.values[key] = check_file_value(*o, value);
      cfg.source[key] = "file";
    }
  }
  for (const auto& [key, raw] : flags) {
    const OptionSpec* o = find_option(opts, key);
    if (!o) throw UsageError(fmt::format("{}: unknown key for '{}'", key, subcommand));
    cfg.values[key] = parse_flag_value(*o, raw);
    cfg.source[key] = "flag";
  }
  validate_ranges(cfg);
  return cfg;
}

ResolvedConfig parse_config(const std::vector<std::string>& args) {
  if (args.empty()) throw UsageError("missing subcommand");
  const std::string sub = args.front();
  const auto& opts = options_for(sub);

  CLI::App app{"undulate " + sub};
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> handles;
  std::map<std::string, bool> switches;
  std::string config_path;
  app.add_option("--config", config_path, "flat JSON config file; flags take precedence");
  for (const auto& o : opts) {
    if (o.type == V::Flag) {
      handles[o.key] = app.add_flag("--" + o.key, switches[o.key], o.help);
    } else {
      const std::string name = o.positional ? o.key + ",--" + o.key : "--" + o.key;
      handles[o.key] = app.add_option(name, raw[o.key], o.help);
    }
  }
  std::vector<std::string> rest(args.begin() + 1, args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  }

  std::map<std::string, std::string> given;
  for (const auto& o : opts)
    if (handles[o.key]->count() > 0) given[o.key] = o.type == V::Flag ? "true" : raw[o.key];
  std::optional<json> file;
  if (!config_path.empty()) file = read_json_file(config_path);
  ResolvedConfig cfg = resolve_config(sub, given, file);
  if (!config_path.empty()) cfg.config_file = config_path;
  return cfg;
}

Parameters parameters_from(const ResolvedConfig& cfg) {
  Parameters p;
  const auto set = [&](const char* key, double& field) {
    if (cfg.values.contains(key)) field = cfg.real(key);
  };
  set("eps", p.eps);
  set("tau", p.tau);
  set("c", p.c);
  set("g", p.g);
  set("a", p.a);
  set("b", p.b);
  if (cfg.values.contains("delta")) p.delta = cfg.real("delta");
  try {
    p.validate();
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
  return p;
}

int resolve_threads(const ResolvedConfig& cfg) {
  const long t = cfg.values.contains("threads") ? cfg.integer("threads") : 0;
  if (t > 0) return static_cast<int>(t);
  if (const char* env = std::getenv("UNDULATE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw UsageError("UNDULATE_THREADS: expected a positive integer");
    return static_cast<int>(v);
  }
  return 1;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + " for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 initialization failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

void write_manifest(const std::string& out_dir, const ResolvedConfig& cfg, const Parameters& p,
                    const ordered_json& grid, int threads, double wall_seconds,
                    const std::vector<std::string>& outputs) {
  ordered_json m;
  m["subcommand"] = cfg.subcommand;
  m["tool_version"] = UNDULATE_VERSION;
  ordered_json params = {{"eps", p.eps}, {"tau", p.tau}, {"c", p.c}, {"g", p.g}, {"a", p.a}, {"b", p.b}};
  params["delta"] = p.delta ? json(*p.delta) : json(nullptr);
  m["parameters"] = params;
  m["grid"] = grid;
  m["config"] = cfg.values;
  ordered_json src = ordered_json::object();
  for (const auto& [k, v] : cfg.source) src[k] = v;
  m["provenance"] = src;
  m["config_file"] = cfg.config_file ? json(*cfg.config_file) : json(nullptr);
  m["threads"] = threads;
  m["wall_clock_seconds"] = wall_seconds;

  std::vector<OutputRecord> records;
  m["outputs"] = ordered_json::array();
  for (const auto& f : outputs) {
    OutputRecord r{fs::relative(f, out_dir).generic_string(), sha256_file(f), fs::file_size(f)};
    m["outputs"].push_back({{"path", r.path}, {"sha256", r.sha256}, {"bytes", r.bytes}});
    records.push_back(r);
  }
  write_text(join(out_dir, "manifest.json"), m.dump(2) + "\n");
  for (const auto& r : records)
    if (sha256_file(join(out_dir, r.path)) != r.sha256)
      throw std::runtime_error("output " + r.path + " changed while writing the manifest");
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const std::string usage = fmt::format(
      "usage: undulate <spectrum|branch|energy|walls|sim3d|sim2d|reproduce> [options]\n"
      "       undulate <subcommand> --help\n");
  if (args.empty() || args.front() == "--help" || args.front() == "-h") {
    std::cout << usage;
    return args.empty() ? 2 : 0;
  }
  if (args.front() == "--version") {
    std::cout << "undulate " << UNDULATE_VERSION << "\n";
    return 0;
  }
  try {
    const ResolvedConfig cfg = parse_config(args);
    Parameters p = parameters_from(cfg);
    const int threads = resolve_threads(cfg);
    set_fft_threads(threads);
    const fs::path dir(cfg.text("out-dir"));
    fs::create_directories(dir);

    const auto t0 = std::chrono::steady_clock::now();
    RunOutput out;
    const std::string& sub = cfg.subcommand;
    if (sub == "spectrum") out = cmd_spectrum(cfg, p, dir);
    else if (sub == "branch") out = cmd_branch(cfg, p, dir);
    else if (sub == "energy") out = cmd_energy(cfg, p, dir);
    else if (sub == "walls") out = cmd_walls(cfg, dir);
    else if (sub == "sim3d") out = cmd_sim3d(cfg, p, dir);
    else if (sub == "sim2d") out = cmd_sim2d(cfg, p, dir);
    else out = cmd_reproduce(cfg, dir);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string resolved = join(dir, "config.json");
    write_text(resolved, cfg.values.dump(2) + "\n");
    out.files.push_back(resolved);
    write_manifest(dir.string(), cfg, p, out.grid, threads, wall, out.files);
    return out.exit_code;
  } catch (const HelpRequested& e) {
    std::cout << e.what();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DefectError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const EnergyIncreaseError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace undulate::cli
