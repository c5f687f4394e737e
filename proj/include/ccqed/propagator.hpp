#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ccqed/model.hpp"

namespace ccqed {

struct EvolveOptions {
  /// Local error bound per Krylov step on a unit-norm state.
  double accuracy_tol = 1e-9;
  int max_krylov = 40;
  long max_substeps = 10'000'000;
  bool store_states = true;
};

/// Time-stamped evolution record. `states` is empty unless requested.
struct Trajectory {
  BasisPtr basis;
  std::vector<double> times;
  std::vector<Amplitudes> states;
  std::map<std::string, std::vector<double>> observables;
  double max_norm_deviation = 0.0;
  long substeps = 0;
  long matvecs = 0;
};

/// Called once per output time with the sample index, time and state.
using SampleObserver = std::function<void(std::size_t, double, const Amplitudes&)>;

/// Piecewise-constant generator: `h` acts from `start` until the next segment.
struct Segment {
  double start;
  const SparseOperator* h;
};

/// exp(-i H t) psi0 sampled on an ascending grid (psi0 sits at t_grid[0]).
/// Adaptive Lanczos short-iterative propagation; bit-reproducible.
Trajectory evolve(const SparseOperator& h, const State& psi0, std::span<const double> t_grid,
                  const EvolveOptions& options = {}, const SampleObserver& observer = {});

Trajectory evolve_piecewise(std::span<const Segment> segments, const State& psi0, std::span<const double> t_grid,
                            const EvolveOptions& options = {}, const SampleObserver& observer = {});

/// H0 -> H0 + (U0/w)|e><e| -> H0, split exactly at tau and tau + w.
Trajectory evolve_pulsed(const KickedHamiltonian& kicked, const State& psi0, std::span<const double> t_grid,
                         const EvolveOptions& options = {}, const SampleObserver& observer = {});

/// Single propagation exp(-i H dt) psi; dt may be negative.
Amplitudes propagate(const SparseOperator& h, const Amplitudes& psi, double dt, const EvolveOptions& options = {});

struct PulseConvergence {
  std::vector<double> widths;
  /// Max |P(l, t_final)| change between consecutive widths (first entry is 0).
  std::vector<double> max_density_change;
  bool converged = false;
  double width_w = 0.0;
  Trajectory trajectory;
};

/// Halves the pulse width until the final density profile changes by less
/// than `w_conv_tol` between consecutive widths.
PulseConvergence converge_pulse_width(const KickedHamiltonian& kicked, const State& psi0,
                                      std::span<const double> t_grid, const EvolveOptions& options = {},
                                      double w_conv_tol = 1e-6, int max_halvings = 16);

/// Spectral-decomposition propagation; oracle for `evolve`.
Trajectory full_diag_reference(const SparseOperator& h, const State& psi0, std::span<const double> t_grid,
                               int dense_cap = 4000);

/// Uniform grid t0, t0 + dt, ... up to t_end (inclusive within dt * 1e-9).
std::vector<double> uniform_grid(double t0, double t_end, double dt);

}  // namespace ccqed
