#include "invlab/stability.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace invlab {

namespace {

int tri_index(int k, int j) {
  // symmetric pair storage, j <= k
  if (j > k) std::swap(k, j);
  return k * (k + 1) / 2 + j;
}

ScalarField mode_product(const EigenSystem& es, int k, int j) {
  ScalarField out(*es.spec);
  out.values = es.phi[static_cast<std::size_t>(k)].values.array() *
               es.phi[static_cast<std::size_t>(j)].values.array();
  return out;
}

/// Projects a trace onto H^1_l by subtracting its t = 0 row (measured data
/// perturbed by noise no longer vanishes exactly at t = 0).
BoundaryTrace project_h1l(const BoundaryTrace& w) {
  BoundaryTrace out = w;
  const Eigen::RowVectorXd first = out.values.row(0);
  out.values.rowwise() -= first;
  return out;
}

/// Discrete sup of |grad v| (forward differences, zero extension).
double sup_gradient(const ScalarField& v) {
  const DomainSpec& s = *v.spec;
  const int n = s.grid_points;
  double sup = 0.0;
  if (s.dim == 1) {
    const double ih = 1.0 / s.h(0);
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
      sup = std::max(sup, std::abs((v.values[i] - prev) * ih));
      prev = v.values[i];
    }
    sup = std::max(sup, std::abs(prev * ih));
  } else {
    const double ihx = 1.0 / s.h(0);
    const double ihy = 1.0 / s.h(1);
    for (int j = 0; j < n; ++j) {
      double prev = 0.0;
      for (int i = 0; i < n; ++i) {
        const double u = v.values[j * n + i];
        sup = std::max(sup, std::abs((u - prev) * ihx));
        prev = u;
      }
      sup = std::max(sup, std::abs(prev * ihx));
    }
    for (int i = 0; i < n; ++i) {
      double prev = 0.0;
      for (int j = 0; j < n; ++j) {
        const double u = v.values[j * n + i];
        sup = std::max(sup, std::abs((u - prev) * ihy));
        prev = u;
      }
      sup = std::max(sup, std::abs(prev * ihy));
    }
  }
  return sup;
}

struct LeastSquares {
  Eigen::VectorXd coeffs;
  double condition_number = 0.0;
  bool regularized = false;
};

LeastSquares solve_normal_equations(Eigen::MatrixXd G, Eigen::VectorXd b, double cond_limit) {
  LeastSquares out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sol(G);
  const double lmax = sol.eigenvalues().maxCoeff();
  const double lmin = sol.eigenvalues().minCoeff();
  out.condition_number = lmin > 0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(out.condition_number <= cond_limit)) {
    const double reg = lmax / cond_limit;
    G.diagonal().array() += reg;
    out.regularized = true;
  }
  out.coeffs = G.ldlt().solve(b);
  return out;
}

}  // namespace

std::string problem_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::wave_potential: return "wave_potential";
    case ProblemKind::wave_source: return "wave_source";
    case ProblemKind::heat_source: return "heat_source";
    case ProblemKind::heat_potential: return "heat_potential";
  }
  return "?";
}

ProblemKind problem_from_name(const std::string& name) {
  if (name == "wave_potential") return ProblemKind::wave_potential;
  if (name == "wave_source") return ProblemKind::wave_source;
  if (name == "heat_source") return ProblemKind::heat_source;
  if (name == "heat_potential") return ProblemKind::heat_potential;
  throw config_error("unknown problem kind '" + name + "'");
}

Modulus modulus_for(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::wave_potential: return Modulus::Psi;
    case ProblemKind::wave_source: return Modulus::Phi;
    case ProblemKind::heat_source: return Modulus::Phi;
    case ProblemKind::heat_potential: return Modulus::Theta;
  }
  return Modulus::Psi;
}

ProblemFamily family_for(ProblemKind kind) {
  return (kind == ProblemKind::wave_potential || kind == ProblemKind::wave_source)
             ? ProblemFamily::wave
             : ProblemFamily::heat;
}

double opnorm_surrogate(const std::vector<ProbeMeasurement>& probes) {
  if (probes.empty()) throw config_error("opnorm_surrogate: empty probe list");
  double g = 0.0;
  for (const auto& p : probes) {
    if (p.probe_norm > 0) g = std::max(g, p.data_h1_norm / p.probe_norm);
  }
  return g;
}

BoundaryTrace inject_noise(const BoundaryTrace& trace, double level, std::uint64_t seed) {
  if (level < 0.0) throw config_error("inject_noise: level must be >= 0");
  if (level == 0.0) return trace;
  BoundaryTrace out = trace;
  Rng rng(seed);
  const double sigma = level * trace.rms();
  for (Eigen::Index j = 0; j < out.values.rows(); ++j) {
    for (Eigen::Index p = 0; p < out.values.cols(); ++p) {
      out.values(j, p) += sigma * rng.normal();
    }
  }
  return out;
}

const BoundaryTrace& PotentialLab::impulse(int k, int j) const {
  return impulse_[static_cast<std::size_t>(tri_index(k, j))];
}

PotentialLab PotentialLab::build(ProblemFamily family, const DomainSpec& spec,
                                 const EigenSystem& es, int K, int jobs) {
  if (K < 1 || K > es.K) throw config_error("potential lab: K out of range");
  PotentialLab lab;
  lab.family_ = family;
  lab.spec_ = &spec;
  lab.es_ = &es;
  lab.K_ = K;

  const int M = spec.time_steps();
  lab.kernels_.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    lab.kernels_.push_back(family == ProblemFamily::wave
                               ? TimeSignal::cosine(std::sqrt(es.lambda[k]), spec.dt, M)
                               : TimeSignal::exp_decay(es.lambda[k], spec.dt, M));
  }

  std::shared_ptr<const HeatSolver> heat;
  if (family == ProblemFamily::heat) heat = std::make_shared<HeatSolver>(spec, es.q0);

  lab.baseline_.resize(static_cast<std::size_t>(K));
  parallel_for(
      static_cast<std::size_t>(K),
      [&](std::size_t k) {
        const ScalarField& phik = es.phi[k];
        if (family == ProblemFamily::wave) {
          ScalarField zero(spec);
          lab.baseline_[k] = solve_wave_ivp(spec, es.q0, phik, zero).trace;
        } else {
          lab.baseline_[k] = heat->solve_ivp(phik).trace;
        }
      },
      jobs);

  const int pairs = K * (K + 1) / 2;
  lab.impulse_.resize(static_cast<std::size_t>(pairs));
  parallel_for(
      static_cast<std::size_t>(pairs),
      [&](std::size_t idx) {
        // invert triangular index
        int k = static_cast<int>((std::sqrt(8.0 * static_cast<double>(idx) + 1.0) - 1.0) / 2.0);
        while (tri_index(k + 1, 0) <= static_cast<int>(idx)) ++k;
        const int j = static_cast<int>(idx) - tri_index(k, 0);
        ScalarField prod = mode_product(es, k, j);
        if (family == ProblemFamily::wave) {
          ScalarField zero(spec);
          lab.impulse_[idx] = solve_wave_ivp(spec, es.q0, zero, prod).trace;
        } else {
          lab.impulse_[idx] = heat->solve_ivp(prod).trace;
        }
      },
      jobs);
  return lab;
}

std::vector<ProbeMeasurement> PotentialLab::measure(const ScalarField& q, double noise_level,
                                                    std::uint64_t seed, int jobs) const {
  q.require_grid(*spec_, "potential lab measure");
  std::vector<ProbeMeasurement> probes(static_cast<std::size_t>(K_));
  std::shared_ptr<const HeatSolver> heat;
  if (family_ == ProblemFamily::heat) heat = std::make_shared<HeatSolver>(*spec_, q);
  parallel_for(
      static_cast<std::size_t>(K_),
      [&](std::size_t k) {
        const ScalarField& phik = es_->phi[k];
        BoundaryTrace measured;
        if (family_ == ProblemFamily::wave) {
          ScalarField zero(*spec_);
          measured = solve_wave_ivp(*spec_, q, phik, zero).trace;
        } else {
          measured = heat->solve_ivp(phik).trace;
        }
        if (noise_level > 0.0) {
          measured = inject_noise(measured, noise_level, mix_seed(seed, k + 1));
        }
        ProbeMeasurement m;
        m.k = static_cast<int>(k) + 1;
        m.lambda = es_->lambda[static_cast<Eigen::Index>(k)];
        m.difference = measured - baseline_[k];
        m.data_h1_norm = m.difference.h1_time_l2();
        m.probe_norm = family_ == ProblemFamily::wave
                           ? field_norm(phik, FieldNorm::H_Delta_cal).value
                           : field_norm(phik, FieldNorm::H0_cal).value;
        probes[k] = std::move(m);
      },
      jobs);
  return probes;
}

ExtractionResult extract_coefficients(const PotentialLab& lab,
                                      const std::vector<ProbeMeasurement>& probes,
                                      const ExtractionOptions& opts) {
  const int K = lab.K();
  if (static_cast<int>(probes.size()) < K) {
    throw config_error("extract_coefficients: needs probes for every k <= K");
  }
  ExtractionResult out;
  out.coeffs = Eigen::VectorXd::Zero(K);

  // Per-probe data series and responses, either in the deconvolved domain
  // (invert S_{g_k}, then fit against the impulse responses) or in the
  // convolved one.
  std::vector<BoundaryTrace> data(static_cast<std::size_t>(K));
  std::vector<std::vector<const BoundaryTrace*>> resp(static_cast<std::size_t>(K));
  std::vector<std::vector<BoundaryTrace>> conv_store(static_cast<std::size_t>(K));

  for (int k = 0; k < K; ++k) {
    if (opts.use_deconvolution) {
      ConvolutionKernel kernel(lab.kernel(k));
      data[static_cast<std::size_t>(k)] =
          invert_S(kernel, project_h1l(probes[static_cast<std::size_t>(k)].difference));
      resp[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(K));
      for (int j = 0; j < K; ++j) {
        resp[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = &lab.impulse(k, j);
      }
    } else {
      data[static_cast<std::size_t>(k)] = probes[static_cast<std::size_t>(k)].difference;
      conv_store[static_cast<std::size_t>(k)].reserve(static_cast<std::size_t>(K));
      resp[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(K));
      for (int j = 0; j < K; ++j) {
        conv_store[static_cast<std::size_t>(k)].push_back(
            duhamel_convolve(lab.impulse(k, j), lab.kernel(k)));
        resp[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
            &conv_store[static_cast<std::size_t>(k)].back();
      }
    }
  }

  // d_k ~ -sum_j c_j X_kj (difference orientation: q run minus q0 run).
  if (opts.diagonal_only) {
    for (int k = 0; k < K; ++k) {
      const BoundaryTrace& x = *resp[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
      const double nn = inner_l2_lambda(x, x);
      out.coeffs[k] = nn > 0 ? -inner_l2_lambda(data[static_cast<std::size_t>(k)], x) / nn : 0.0;
    }
    return out;
  }

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(K, K);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(K);
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < K; ++j) {
      const BoundaryTrace& xj = *resp[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
      b[j] -= inner_l2_lambda(data[static_cast<std::size_t>(k)], xj);
      for (int l = j; l < K; ++l) {
        const BoundaryTrace& xl = *resp[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
        const double gjl = inner_l2_lambda(xj, xl);
        G(j, l) += gjl;
        if (l != j) G(l, j) += gjl;
      }
    }
  }
  LeastSquares ls = solve_normal_equations(std::move(G), std::move(b), opts.condition_limit);
  out.coeffs = std::move(ls.coeffs);
  out.condition_number = ls.condition_number;
  out.regularized = ls.regularized;
  return out;
}

ReconstructionResult reconstruct_potential(const Eigen::VectorXd& coeffs, const EigenSystem& es,
                                           double gamma, const StabilitySchedule& sched,
                                           TruncationPolicy policy) {
  if (!(gamma >= 0.0)) throw domain_error("reconstruct_potential: gamma must be >= 0");
  ReconstructionResult out;
  const int K = static_cast<int>(coeffs.size());
  if (policy == TruncationPolicy::fixed_full) {
    out.level = K;
    out.dq_hat = es.synthesize(coeffs, K);
    return out;
  }
  if (gamma > sched.gamma_star || gamma == 0.0) {
    out.trivial_branch = true;
    out.level = 0;
    out.dq_hat = ScalarField(*es.spec);
    return out;
  }
  out.sstar = sched.sstar(gamma);
  int N = static_cast<int>(std::floor(out.sstar));
  if (N < 1) N = 1;
  if (N > K) {
    out.truncation_starved = true;
    N = K;
  }
  out.level = N;
  out.dq_hat = es.synthesize(coeffs, N);
  return out;
}

SourceLab SourceLab::build(ProblemFamily family, const DomainSpec& spec, const EigenSystem& es,
                           int K, const ScalarField& q, TimeSignal g, int jobs) {
  if (K < 1 || K > es.K) throw config_error("source lab: K out of range");
  q.require_grid(spec, "source lab potential");
  SourceLab lab;
  lab.family_ = family;
  lab.spec_ = &spec;
  lab.es_ = &es;
  lab.K_ = K;
  lab.q_ = q;
  lab.kernel_.emplace(std::move(g));  // validates g(0) != 0
  if (family == ProblemFamily::heat) lab.heat_ = std::make_shared<HeatSolver>(spec, q);

  lab.impulse_.resize(static_cast<std::size_t>(K));
  parallel_for(
      static_cast<std::size_t>(K),
      [&](std::size_t j) {
        const ScalarField& phij = es.phi[j];
        if (family == ProblemFamily::wave) {
          ScalarField zero(spec);
          lab.impulse_[j] = solve_wave_ivp(spec, q, zero, phij).trace;
        } else {
          lab.impulse_[j] = lab.heat_->solve_ivp(phij).trace;
        }
      },
      jobs);
  return lab;
}

BoundaryTrace SourceLab::measure(const ScalarField& f, double noise_level,
                                 std::uint64_t seed) const {
  f.require_grid(*spec_, "source lab measure");
  BoundaryTrace tr;
  if (family_ == ProblemFamily::wave) {
    tr = solve_wave_source(*spec_, q_, f, kernel_->g).trace;
  } else {
    tr = heat_->solve_source(f, kernel_->g).trace;
  }
  if (noise_level > 0.0) tr = inject_noise(tr, noise_level, seed);
  return tr;
}

SourceEstimate estimate_source(const SourceLab& lab, const BoundaryTrace& data, double gamma,
                               const StabilitySchedule& sched, TruncationPolicy policy) {
  SourceEstimate out;
  const int K = lab.K();
  int N = K;
  if (policy == TruncationPolicy::schedule) {
    // eps* minimizes m/sqrt(eps) + B(g,tau) e^{mu eps} gamma; the retained
    // mode count follows the proof-side coupling N <= eps^{n/2} < N + 1.
    double best_eps = 1.0;
    double best_val = std::numeric_limits<double>::infinity();
    const double B = lab.kernel().bound_factor;
    for (int i = 0; i <= 400; ++i) {
      const double eps = std::pow(10.0, -2.0 + 5.0 * i / 400.0);
      const double val = sched.m / std::sqrt(eps) + B * std::exp(sched.mu * eps) * gamma;
      if (val < best_val) {
        best_val = val;
        best_eps = eps;
      }
    }
    out.eps_star = best_eps;
    N = static_cast<int>(std::floor(std::pow(best_eps, sched.n / 2.0)));
    N = std::max(1, std::min(N, K));
  }
  out.level = N;

  const BoundaryTrace decon = invert_S(lab.kernel(), project_h1l(data));
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N, N);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
  for (int j = 0; j < N; ++j) {
    b[j] = inner_l2_lambda(decon, lab.impulse(j));
    for (int l = j; l < N; ++l) {
      const double gjl = inner_l2_lambda(lab.impulse(j), lab.impulse(l));
      G(j, l) = gjl;
      if (l != j) G(l, j) = gjl;
    }
  }
  LeastSquares ls = solve_normal_equations(std::move(G), std::move(b), 1e8);
  out.condition_number = ls.condition_number;
  out.regularized = ls.regularized;
  out.coeffs = Eigen::VectorXd::Zero(K);
  out.coeffs.head(N) = ls.coeffs;
  out.f_hat = lab.eigensystem().synthesize(out.coeffs, N);
  return out;
}

namespace {

std::string check_member(ProblemKind kind, const FamilyMember& member, const EigenSystem& es,
                         double m) {
  const ScalarField& f = member.field;
  switch (kind) {
    case ProblemKind::wave_potential: {
      if (es.q0.values.size() && es.q0.values.minCoeff() < -1e-12) {
        return "background potential must satisfy q0 >= 0";
      }
      ScalarField q = es.q0 + f;
      if (q.max_abs() > m + 1e-12) return "perturbed potential leaves the m-ball in L^inf";
      if (f.max_abs() > m + 1e-12 || sup_gradient(f) > m + 1e-12) {
        return "perturbation leaves the m-ball in W^{1,inf}";
      }
      return {};
    }
    case ProblemKind::heat_potential: {
      if (es.q0.max_abs() > m + 1e-12 || sup_gradient(es.q0) > m + 1e-12) {
        return "background potential leaves the m-ball in W^{1,inf}";
      }
      ScalarField q = es.q0 + f;
      if (q.max_abs() > m + 1e-12 || sup_gradient(q) > m + 1e-12) {
        return "perturbed potential leaves the m-ball in W^{1,inf}";
      }
      return {};
    }
    case ProblemKind::wave_source: {
      if (norm_l2(f) > m + 1e-12) return "source leaves the m-ball in L^2";
      return {};
    }
    case ProblemKind::heat_source: {
      if (norm_h10(f) > m + 1e-12) return "source leaves the m-ball in H^1_0";
      return {};
    }
  }
  return {};
}

}  // namespace

StabilityReport run_stability_experiment(ProblemKind kind, const std::vector<FamilyMember>& family,
                                         const PotentialLab* plab, const SourceLab* slab,
                                         const StabilitySchedule& sched, std::uint64_t seed,
                                         int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  if (family.empty()) throw config_error("family empty");
  const bool potential_kind =
      kind == ProblemKind::wave_potential || kind == ProblemKind::heat_potential;
  if (potential_kind && plab == nullptr) {
    throw config_error("run_stability_experiment: potential problem needs a PotentialLab");
  }
  if (!potential_kind && slab == nullptr) {
    throw config_error("run_stability_experiment: source problem needs a SourceLab");
  }
  const EigenSystem& es = potential_kind ? plab->eigensystem() : slab->eigensystem();

  for (const auto& member : family) {
    const std::string violation = check_member(kind, member, es, sched.m);
    if (!violation.empty()) {
      throw config_error("family member '" + member.id + "' rejected: " + violation);
    }
  }

  StabilityReport report;
  report.kind = kind;
  report.modulus = modulus_for(kind);
  report.records.resize(family.size());

  for (std::size_t i = 0; i < family.size(); ++i) {
    const FamilyMember& member = family[i];
    StabilityRecord rec;
    rec.id = member.id;
    rec.holdout = member.holdout;
    const std::uint64_t member_seed = mix_seed(seed, 1000 + i);

    if (potential_kind) {
      ScalarField q = es.q0 + member.field;
      auto probes = plab->measure(q, member.noise_level, member_seed, jobs);
      rec.gamma = opnorm_surrogate(probes);
      rec.error = norm_l2(member.field);
      auto extraction = extract_coefficients(*plab, probes);
      auto recon = reconstruct_potential(extraction.coeffs, es, rec.gamma, sched,
                                         TruncationPolicy::fixed_full);
      const double denom = std::max(rec.error, 1e-300);
      rec.recon_rel_error = norm_l2(recon.dq_hat - member.field) / denom;
    } else {
      BoundaryTrace data = slab->measure(member.field, member.noise_level, member_seed);
      rec.gamma = data.h1_time_l2();
      rec.error = kind == ProblemKind::wave_source ? spectral_hminus1(member.field, es)
                                                   : norm_l2(member.field);
      auto estimate = estimate_source(*slab, data, rec.gamma, sched, TruncationPolicy::fixed_full);
      const double fnorm = kind == ProblemKind::wave_source
                               ? spectral_hminus1(member.field, es)
                               : norm_l2(member.field);
      const ScalarField err_field = estimate.f_hat - member.field;
      const double err = kind == ProblemKind::wave_source ? spectral_hminus1(err_field, es)
                                                          : norm_l2(err_field);
      rec.recon_rel_error = err / std::max(fnorm, 1e-300);
    }
    rec.modulus = modulus_value(report.modulus, rec.gamma, sched.n);
    rec.branch = sched.trivial_branch(rec.gamma) ? "trivial" : "modulus";
    report.records[i] = std::move(rec);
  }

  double c_train = 0.0, c_hold = 0.0;
  for (const auto& rec : report.records) {
    if (rec.gamma == 0.0 && rec.error == 0.0) continue;  // identical pair; never dominates
    if (!std::isfinite(rec.modulus) || rec.modulus == 0.0) continue;
    const double ratio = rec.error / rec.modulus;
    if (rec.holdout) {
      c_hold = std::max(c_hold, ratio);
    } else {
      c_train = std::max(c_train, ratio);
    }
  }
  report.fitted_C = c_train;
  report.holdout_C = c_hold;
  bool any_holdout = false;
  for (const auto& rec : report.records) any_holdout |= rec.holdout;
  if (any_holdout) {
    report.pass = c_train > 0 ? (c_hold <= 2.0 * c_train && c_hold >= 0.5 * c_train)
                              : c_hold == 0.0;
  } else {
    report.pass = true;  // nothing to validate against
  }
  for (auto& rec : report.records) rec.fitted_C = report.fitted_C;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

RateFitResult fit_exponential_rate(const std::vector<RateProbe>& probes,
                                   const std::vector<double>& eps_grid,
                                   const std::vector<double>& rate_grid) {
  if (probes.empty() || eps_grid.empty() || rate_grid.empty()) {
    throw config_error("fit_exponential_rate: empty inputs");
  }
  RateFitResult out;
  out.rate_grid = rate_grid;
  out.C_of_rate.reserve(rate_grid.size());
  // The admissible constant C*(rate) is unbounded and increasing, so the
  // fitted rate is the one at which the eps tradeoff is most active: the
  // per-probe minimizer of a/sqrt(eps) + b e^{rate eps} sits inside the
  // grid for the largest number of probes. Below that rate the exponential
  // is negligible (minimizer pinned at eps_max), above it dominant
  // (minimizer pinned at eps_min); neither regime identifies the rate.
  std::size_t best_interior = 0;
  std::size_t best_idx = 0;
  for (std::size_t ri = 0; ri < rate_grid.size(); ++ri) {
    const double r = rate_grid[ri];
    double c = std::numeric_limits<double>::infinity();
    std::size_t interior = 0;
    for (const auto& p : probes) {
      if (!(p.d > 0)) continue;
      double best_val = std::numeric_limits<double>::infinity();
      std::size_t best_eps = 0;
      for (std::size_t ei = 0; ei < eps_grid.size(); ++ei) {
        const double rhs = p.a / std::sqrt(eps_grid[ei]) + p.b * std::exp(r * eps_grid[ei]);
        if (rhs < best_val) {
          best_val = rhs;
          best_eps = ei;
        }
      }
      c = std::min(c, best_val / p.d);
      if (best_eps > 0 && best_eps + 1 < eps_grid.size()) ++interior;
    }
    out.C_of_rate.push_back(c);
    if (interior > best_interior) {
      best_interior = interior;
      best_idx = ri;
    }
  }
  out.rate_hat = rate_grid[best_idx];
  out.C_hat = out.C_of_rate[best_idx];
  return out;
}

RateFitResult fit_wave_observability(const DomainSpec& spec, const ScalarField& q,
                                     const std::vector<ScalarField>& probe_fields,
                                     const std::vector<double>& eps_grid,
                                     const std::vector<double>& rate_grid) {
  std::vector<RateProbe> probes(probe_fields.size());
  parallel_for(probe_fields.size(), [&](std::size_t i) {
    const ScalarField& u0 = probe_fields[i];
    ScalarField zero(spec);
    WaveSolution sol = solve_wave_ivp(spec, q, u0, zero);
    probes[i] = RateProbe{norm_h10(u0), sol.trace.l2_lambda(), norm_l2(u0)};
  });
  return fit_exponential_rate(probes, eps_grid, rate_grid);
}

RateFitResult fit_heat_interpolation(const DomainSpec& spec, const ScalarField& q,
                                     const TimeSignal& g,
                                     const std::vector<ScalarField>& probe_fields,
                                     const std::vector<double>& eps_grid,
                                     const std::vector<double>& rate_grid) {
  ConvolutionKernel kernel(g);
  const double prefactor = kernel.bound_factor / std::sqrt(2.0);  // 1/|g0| e^{tau ||g'||^2/g0^2}
  HeatSolver solver(spec, q);
  std::vector<RateProbe> probes(probe_fields.size());
  parallel_for(probe_fields.size(), [&](std::size_t i) {
    const ScalarField& f = probe_fields[i];
    HeatSolution sol = solver.solve_source(f, g);
    probes[i] = RateProbe{norm_h10(f), prefactor * sol.trace.h1_time_l2(), norm_l2(f)};
  });
  return fit_exponential_rate(probes, eps_grid, rate_grid);
}

}  // namespace invlab
