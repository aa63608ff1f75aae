#include "invlab/heat.hpp"

#include <cmath>
#include <sstream>

namespace invlab {

namespace {

void extract_normal_trace_heat(const DomainSpec& spec, const TraceLayout& layout, const double* u,
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
    const int a = node.index_along - 1;
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

}  // namespace

HeatSolver::HeatSolver(const DomainSpec& spec, const ScalarField& q)
    : spec_(&spec), q_(q), A_(spec, q) {
  spec.validate();
  if (!q.all_finite()) throw numerical_error("heat solver: non-finite potential");
  Eigen::SparseMatrix<double> M = A_.assemble();
  M *= 0.5 * spec.dt;
  Eigen::SparseMatrix<double> I(M.rows(), M.cols());
  I.setIdentity();
  M = M + I;
  implicit_.factorize(M);
}

HeatSolution HeatSolver::run(const ScalarField* u0, const ScalarField* f, const TimeSignal* g,
                             const HeatRunOptions& opts) const {
  const DomainSpec& spec = *spec_;
  const int M = spec.time_steps();
  const int N = spec.interior_count();
  const double dt = spec.dt;
  if (g != nullptr && g->steps() < M) throw dimension_error("solve_heat: source signal too short");

  TraceLayout layout = make_trace_layout(spec);
  HeatSolution sol;
  sol.trace = BoundaryTrace(spec, layout, dt, M);

  const std::size_t P = layout.size();
  std::vector<double> row(P);
  auto store_trace = [&](int step, const Eigen::VectorXd& u) {
    extract_normal_trace_heat(spec, layout, u.data(), row.data());
    for (std::size_t p = 0; p < P; ++p) {
      sol.trace.values(step, static_cast<Eigen::Index>(p)) = row[p];
    }
  };

  Eigen::VectorXd cur = u0 != nullptr ? u0->values : Eigen::VectorXd::Zero(N);
  Eigen::VectorXd Au(N), rhs(N), next(N);

  store_trace(0, cur);
  if (opts.snapshot_every > 0) sol.snapshots.emplace_back(0, ScalarField(spec, cur));

  for (int nstep = 0; nstep < M; ++nstep) {
    A_.apply(cur.data(), Au.data());
    rhs = cur - 0.5 * dt * Au;
    if (f != nullptr) {
      rhs += 0.5 * dt * ((*g)(nstep) + (*g)(nstep + 1)) * f->values;
    }
    implicit_.solve(rhs.data(), next.data());
    if (!std::isfinite(next.squaredNorm())) {
      std::ostringstream os;
      os << "heat stepper produced non-finite values at step " << nstep + 1;
      throw numerical_error(os.str());
    }
    cur.swap(next);
    store_trace(nstep + 1, cur);
    if (opts.snapshot_every > 0 && (nstep + 1) % opts.snapshot_every == 0) {
      sol.snapshots.emplace_back(nstep + 1, ScalarField(spec, cur));
    }
  }
  sol.final_field = ScalarField(spec, cur);
  return sol;
}

HeatSolution HeatSolver::solve_source(const ScalarField& f, const TimeSignal& g,
                                      const HeatRunOptions& opts) const {
  f.require_grid(*spec_, "solve_heat_source: source profile");
  if (!f.all_finite()) throw numerical_error("solve_heat_source: non-finite source");
  return run(nullptr, &f, &g, opts);
}

HeatSolution HeatSolver::solve_ivp(const ScalarField& u0, const HeatRunOptions& opts) const {
  u0.require_grid(*spec_, "solve_heat_ivp: initial field");
  if (!u0.all_finite()) throw numerical_error("solve_heat_ivp: non-finite initial field");
  return run(&u0, nullptr, nullptr, opts);
}

HeatSolution solve_heat_source(const DomainSpec& spec, const ScalarField& q, const ScalarField& f,
                               const TimeSignal& g, const HeatRunOptions& opts) {
  return HeatSolver(spec, q).solve_source(f, g, opts);
}

HeatSolution solve_heat_ivp(const DomainSpec& spec, const ScalarField& q, const ScalarField& u0,
                            const HeatRunOptions& opts) {
  return HeatSolver(spec, q).solve_ivp(u0, opts);
}

ProbeMeasurement heat_probe(const DomainSpec& spec, const ScalarField& q, const EigenSystem& es,
                            int k) {
  if (k < 1 || k > es.K) throw config_error("heat_probe: k out of range");
  HeatSolver background(spec, es.q0);
  HeatSolution base = background.solve_ivp(es.phi[static_cast<std::size_t>(k - 1)]);
  HeatSolver solver(spec, q);
  return heat_probe(solver, es, k, base.trace);
}

ProbeMeasurement heat_probe(const HeatSolver& solver, const EigenSystem& es, int k,
                            const BoundaryTrace& baseline) {
  if (k < 1 || k > es.K) throw config_error("heat_probe: k out of range");
  const ScalarField& phik = es.phi[static_cast<std::size_t>(k - 1)];
  HeatSolution pert = solver.solve_ivp(phik);
  ProbeMeasurement m;
  m.k = k;
  m.lambda = es.lambda[k - 1];
  m.difference = pert.trace - baseline;
  m.data_h1_norm = m.difference.h1_time_l2();
  m.probe_norm = field_norm(phik, FieldNorm::H0_cal).value;
  return m;
}

ObservabilityRecord final_time_observability(const HeatSolver& solver, const ScalarField& f) {
  HeatSolution sol = solver.solve_ivp(f);
  ObservabilityRecord rec;
  rec.lhs = norm_l2(sol.final_field);
  rec.rhs = sol.trace.l2_lambda();
  if (rec.rhs == 0.0) {
    rec.ratio = 0.0;
    rec.flag = rec.lhs > 0.0 ? ObservabilityRecord::Flag::violation
                             : ObservabilityRecord::Flag::undefined;
  } else {
    rec.ratio = rec.lhs / rec.rhs;
    rec.flag = ObservabilityRecord::Flag::ok;
  }
  return rec;
}

ObservabilityRecord final_time_observability(const DomainSpec& spec, const ScalarField& q,
                                             const ScalarField& f) {
  HeatSolver solver(spec, q);
  return final_time_observability(solver, f);
}

}  // namespace invlab
