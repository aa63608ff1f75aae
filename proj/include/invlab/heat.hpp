#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "invlab/eigensystem.hpp"
#include "invlab/norms.hpp"
#include "invlab/trace.hpp"

namespace invlab {

struct HeatRunOptions {
  int snapshot_every = 0;
};

struct HeatSolution {
  BoundaryTrace trace;
  ScalarField final_field;
  std::vector<std::pair<int, ScalarField>> snapshots;
};

/// Crank-Nicolson stepper for u_t - Laplacian u + q u = g(t) f, u = 0 on
/// the boundary. Holds the factorized implicit matrix so repeated solves
/// with the same potential share the factorization; all methods are const
/// and safe to call concurrently.
class HeatSolver {
 public:
  HeatSolver(const DomainSpec& spec, const ScalarField& q);

  const DomainSpec& spec() const { return *spec_; }
  const ScalarField& potential() const { return q_; }

  HeatSolution solve_source(const ScalarField& f, const TimeSignal& g,
                            const HeatRunOptions& opts = {}) const;
  HeatSolution solve_ivp(const ScalarField& u0, const HeatRunOptions& opts = {}) const;

 private:
  HeatSolution run(const ScalarField* u0, const ScalarField* f, const TimeSignal* g,
                   const HeatRunOptions& opts) const;

  const DomainSpec* spec_;
  ScalarField q_;
  DirichletOperator A_;
  SparseFactor implicit_;  // I + dt/2 A
};

HeatSolution solve_heat_source(const DomainSpec& spec, const ScalarField& q, const ScalarField& f,
                               const TimeSignal& g, const HeatRunOptions& opts = {});
HeatSolution solve_heat_ivp(const DomainSpec& spec, const ScalarField& q, const ScalarField& u0,
                            const HeatRunOptions& opts = {});

/// Probe difference for the heat measurement map, with the H0-calligraphic
/// probe norm (kernel exp(-lambda_k t) drives the identity cross-checks).
ProbeMeasurement heat_probe(const DomainSpec& spec, const ScalarField& q, const EigenSystem& es,
                            int k);

/// Variant reusing a precomputed background trace and a prebuilt solver.
ProbeMeasurement heat_probe(const HeatSolver& solver, const EigenSystem& es, int k,
                            const BoundaryTrace& baseline);

struct ObservabilityRecord {
  double lhs = 0.0;    // ||S_q(f)(tau)||_{L2}
  double rhs = 0.0;    // ||normal trace||_{L2(Lambda)}
  double ratio = 0.0;  // lhs / rhs
  enum class Flag { ok, undefined, violation } flag = Flag::ok;
};

/// Final-time observability sample for one field f.
ObservabilityRecord final_time_observability(const DomainSpec& spec, const ScalarField& q,
                                             const ScalarField& f);

ObservabilityRecord final_time_observability(const HeatSolver& solver, const ScalarField& f);

}  // namespace invlab
