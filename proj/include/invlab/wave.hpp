#pragma once

#include <utility>
#include <vector>

#include "invlab/eigensystem.hpp"
#include "invlab/norms.hpp"
#include "invlab/trace.hpp"

namespace invlab {

struct WaveRunOptions {
  int snapshot_every = 0;   // 0: keep no interior snapshots
  bool record_energy = false;
};

/// One point of the trajectory; the velocity is the centered difference at
/// the snapshot step (the given u1 at step 0, backward 2nd order at step M).
struct WaveState {
  ScalarField displacement;
  ScalarField velocity;
  int step = 0;
};

struct WaveSolution {
  BoundaryTrace trace;
  ScalarField final_displacement;
  ScalarField final_velocity;            // backward 2nd-order at t = M dt
  std::vector<WaveState> snapshots;
  std::vector<double> midpoint_energy;   // conserved discrete energy, one per step
};

/// Explicit leapfrog for u_tt - Laplacian u + q u = 0, u = 0 on the
/// boundary, (u, u_t)(0) = (u0, u1). The boundary trace is the one-sided
/// second-order normal difference at the measured nodes, every step.
/// Throws config_error on CFL violation and instability_error (naming the
/// step) if the iteration produces non-finite values.
WaveSolution solve_wave_ivp(const DomainSpec& spec, const ScalarField& q, const ScalarField& u0,
                            const ScalarField& u1, const WaveRunOptions& opts = {});

/// Same stepper driven by the separated source g(t) f(x), zero initial data.
WaveSolution solve_wave_source(const DomainSpec& spec, const ScalarField& q, const ScalarField& f,
                               const TimeSignal& g, const WaveRunOptions& opts = {});

/// Trapezoid time convolution of a trace with g, per node (Duhamel's
/// identity maps the impulse trace to the g-driven source trace).
BoundaryTrace duhamel_convolve(const BoundaryTrace& base, const TimeSignal& g);

/// ||u_t||^2 + ||grad u||^2 + <q u, u> evaluated on discrete fields.
double wave_energy(const ScalarField& u, const ScalarField& velocity, const ScalarField& q);

ProbeMeasurement measure_probe(const DomainSpec& spec, const ScalarField& q,
                               const EigenSystem& es, int k);

/// Variant reusing a precomputed background trace for phi_k.
ProbeMeasurement measure_probe(const DomainSpec& spec, const ScalarField& q,
                               const EigenSystem& es, int k, const BoundaryTrace& baseline);

}  // namespace invlab
