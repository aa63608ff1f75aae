#include "invlab/wave.hpp"

#include <cmath>
#include <sstream>

namespace invlab {

namespace {

void extract_normal_trace(const DomainSpec& spec, const TraceLayout& layout, const double* u,
                          double* out) {
  const int n = spec.grid_points;
  if (spec.dim == 1) {
    const double ih = 1.0 / (2.0 * spec.h(0));
    for (std::size_t p = 0; p < layout.nodes.size(); ++p) {
      out[p] = layout.nodes[p].edge == Edge::left ? -(4.0 * u[0] - u[1]) * ih
                                                  : -(4.0 * u[n - 1] - u[n - 2]) * ih;
    }
    return;
  }
  const double ihx = 1.0 / (2.0 * spec.h(0));
  const double ihy = 1.0 / (2.0 * spec.h(1));
  for (std::size_t p = 0; p < layout.nodes.size(); ++p) {
    const TraceNode& node = layout.nodes[p];
    const int a = node.index_along - 1;  // 0-based index along the edge
    switch (node.edge) {
      case Edge::bottom:
        out[p] = -(4.0 * u[a] - u[n + a]) * ihy;
        break;
      case Edge::top:
        out[p] = -(4.0 * u[(n - 1) * n + a] - u[(n - 2) * n + a]) * ihy;
        break;
      case Edge::left:
        out[p] = -(4.0 * u[a * n] - u[a * n + 1]) * ihx;
        break;
      case Edge::right:
        out[p] = -(4.0 * u[a * n + (n - 1)] - u[a * n + (n - 2)]) * ihx;
        break;
    }
  }
}

struct StepContext {
  const DomainSpec& spec;
  DirichletOperator minus_lap;  // q = 0 operator, reused for the stencil
  const ScalarField& q;

  StepContext(const DomainSpec& s, const ScalarField& potential)
      : spec(s), minus_lap(s, ScalarField(s)), q(potential) {}

  // out = (-Laplacian + q) u
  void apply_A(const Eigen::VectorXd& u, Eigen::VectorXd& out) const {
    minus_lap.apply_laplacian(u.data(), out.data());
    out.array() += q.values.array() * u.array();
  }
};

WaveSolution run_leapfrog(const DomainSpec& spec, const ScalarField& q, const ScalarField& u0,
                          const ScalarField& u1, const ScalarField* f, const TimeSignal* g,
                          const WaveRunOptions& opts) {
  spec.validate();
  if (spec.cfl_number() > 1.0 + 1e-12) {
    throw config_error("cfl: wave stepper requires dt * sqrt(sum 1/h_i^2) <= 1");
  }
  q.require_grid(spec, "solve_wave: potential");
  u0.require_grid(spec, "solve_wave: initial displacement");
  u1.require_grid(spec, "solve_wave: initial velocity");
  if (!q.all_finite() || !u0.all_finite() || !u1.all_finite()) {
    throw numerical_error("solve_wave: non-finite input field");
  }
  const int M = spec.time_steps();
  if (g != nullptr && g->steps() < M) throw dimension_error("solve_wave: source signal too short");

  StepContext ctx(spec, q);
  const double dt = spec.dt;
  const double dt2 = dt * dt;

  TraceLayout layout = make_trace_layout(spec);
  WaveSolution sol;
  sol.trace = BoundaryTrace(spec, layout, dt, M);
  if (opts.record_energy) sol.midpoint_energy.reserve(static_cast<std::size_t>(M));

  const int N = spec.interior_count();
  const std::size_t P = layout.size();
  std::vector<double> row(P);
  auto store_trace = [&](int step, const Eigen::VectorXd& u) {
    extract_normal_trace(spec, layout, u.data(), row.data());
    for (std::size_t p = 0; p < P; ++p) {
      sol.trace.values(step, static_cast<Eigen::Index>(p)) = row[p];
    }
  };
  double cell = spec.h(0);
  if (spec.dim == 2) cell *= spec.h(1);

  Eigen::VectorXd prev = u0.values;
  Eigen::VectorXd Au(N), next(N);

  store_trace(0, prev);
  if (opts.snapshot_every > 0) sol.snapshots.push_back({u0, u1, 0});

  // Second-order start: u^1 = u0 + dt u1 + dt^2/2 (-A u0 + g(0) f).
  ctx.apply_A(prev, Au);
  Eigen::VectorXd cur = prev + dt * u1.values - 0.5 * dt2 * Au;
  if (f != nullptr) cur += 0.5 * dt2 * (*g)(0) * f->values;
  store_trace(1, cur);
  if (opts.record_energy) {
    const double kin = (cur - prev).squaredNorm() / dt2;
    sol.midpoint_energy.push_back(cell * (kin + Au.dot(cur)));
  }

  for (int nstep = 1; nstep < M; ++nstep) {
    ctx.apply_A(cur, Au);
    next = 2.0 * cur - prev - dt2 * Au;
    if (f != nullptr) next += dt2 * (*g)(nstep) * f->values;

    const double check = next.squaredNorm();
    if (!std::isfinite(check)) {
      std::ostringstream os;
      os << "wave stepper produced non-finite values at step " << nstep + 1 << " (t = "
         << (nstep + 1) * dt << ")";
      throw instability_error(os.str());
    }

    if (opts.snapshot_every > 0 && nstep % opts.snapshot_every == 0) {
      ScalarField vel(spec, Eigen::VectorXd((next - prev) / (2.0 * dt)));
      sol.snapshots.push_back({ScalarField(spec, cur), std::move(vel), nstep});
    }

    prev.swap(cur);
    cur.swap(next);
    store_trace(nstep + 1, cur);

    if (opts.record_energy) {
      // A u^n is still in Au (u^n is now `prev`).
      const double kin = (cur - prev).squaredNorm() / dt2;
      sol.midpoint_energy.push_back(cell * (kin + Au.dot(cur)));
    }
  }

  sol.final_displacement = ScalarField(spec, cur);
  ScalarField vel(spec);
  if (M >= 2) {
    vel.values = (3.0 * cur - 4.0 * prev + next) / (2.0 * dt);
    // after the final swap `next` holds u^{M-2}
  } else {
    vel.values = (cur - prev) / dt;
  }
  sol.final_velocity = vel;
  if (opts.snapshot_every > 0 && M % opts.snapshot_every == 0 && M >= 1) {
    sol.snapshots.push_back({sol.final_displacement, std::move(vel), M});
  }
  return sol;
}

}  // namespace

WaveSolution solve_wave_ivp(const DomainSpec& spec, const ScalarField& q, const ScalarField& u0,
                            const ScalarField& u1, const WaveRunOptions& opts) {
  return run_leapfrog(spec, q, u0, u1, nullptr, nullptr, opts);
}

WaveSolution solve_wave_source(const DomainSpec& spec, const ScalarField& q, const ScalarField& f,
                               const TimeSignal& g, const WaveRunOptions& opts) {
  f.require_grid(spec, "solve_wave_source: source profile");
  ScalarField zero(spec);
  return run_leapfrog(spec, q, zero, zero, &f, &g, opts);
}

BoundaryTrace duhamel_convolve(const BoundaryTrace& base, const TimeSignal& g) {
  base.require_signal_axis(g, "duhamel_convolve");
  BoundaryTrace out = base;
  const int M = base.steps();
  for (int p = 0; p < base.node_count(); ++p) {
    out.values(0, p) = 0.0;
    for (int i = 1; i <= M; ++i) {
      double acc = 0.5 * (g(i) * base.values(0, p) + g(0) * base.values(i, p));
      for (int j = 1; j < i; ++j) acc += g(i - j) * base.values(j, p);
      out.values(i, p) = base.dt * acc;
    }
  }
  return out;
}

double wave_energy(const ScalarField& u, const ScalarField& velocity, const ScalarField& q) {
  u.require_same_grid(velocity, "wave_energy");
  u.require_same_grid(q, "wave_energy");
  const double kin = norm_l2(velocity);
  const double pot = norm_h10(u);
  ScalarField qu(*u.spec);
  qu.values = q.values.array() * u.values.array();
  return kin * kin + pot * pot + inner_l2(qu, u);
}

ProbeMeasurement measure_probe(const DomainSpec& spec, const ScalarField& q,
                               const EigenSystem& es, int k) {
  if (k < 1 || k > es.K) throw config_error("measure_probe: k out of range");
  ScalarField zero(spec);
  WaveSolution base = solve_wave_ivp(spec, es.q0, es.phi[static_cast<std::size_t>(k - 1)], zero);
  return measure_probe(spec, q, es, k, base.trace);
}

ProbeMeasurement measure_probe(const DomainSpec& spec, const ScalarField& q,
                               const EigenSystem& es, int k, const BoundaryTrace& baseline) {
  if (k < 1 || k > es.K) throw config_error("measure_probe: k out of range");
  ScalarField zero(spec);
  const ScalarField& phik = es.phi[static_cast<std::size_t>(k - 1)];
  WaveSolution pert = solve_wave_ivp(spec, q, phik, zero);
  ProbeMeasurement m;
  m.k = k;
  m.lambda = es.lambda[k - 1];
  m.difference = pert.trace - baseline;
  m.data_h1_norm = m.difference.h1_time_l2();
  m.probe_norm = field_norm(phik, FieldNorm::H_Delta_cal).value;
  return m;
}

}  // namespace invlab
