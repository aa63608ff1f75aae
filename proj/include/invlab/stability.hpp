#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "invlab/heat.hpp"
#include "invlab/schedule.hpp"
#include "invlab/volterra.hpp"
#include "invlab/wave.hpp"

namespace invlab {

enum class ProblemKind { wave_potential, wave_source, heat_source, heat_potential };

std::string problem_name(ProblemKind kind);
ProblemKind problem_from_name(const std::string& name);
Modulus modulus_for(ProblemKind kind);
ProblemFamily family_for(ProblemKind kind);

/// max_k ||d_k||_{H1((0,tau);L2(Upsilon))} / ||phi_k|| over the probe set: a
/// finite lower-bound surrogate for the operator norm of the measurement
/// gap (the moduli are increasing, so a lower bound is conservative).
double opnorm_surrogate(const std::vector<ProbeMeasurement>& probes);

/// Adds seeded zero-mean Gaussian noise with rms = level * rms(trace);
/// level 0 returns the trace unchanged.
BoundaryTrace inject_noise(const BoundaryTrace& trace, double level, std::uint64_t seed);

/// Shared forward machinery for the potential problems: background probe
/// traces and the linearized unit-mode impulse responses
///   wave: trace of the IVP with data (0, phi_j phi_k) under q0,
///   heat: trace of the IVP with initial field phi_j phi_k under q0,
/// stored once per (spec, q0, K) and reused across family members.
class PotentialLab {
 public:
  static PotentialLab build(ProblemFamily family, const DomainSpec& spec, const EigenSystem& es,
                            int K, int jobs = 0);

  ProblemFamily family() const { return family_; }
  const DomainSpec& spec() const { return *spec_; }
  const EigenSystem& eigensystem() const { return *es_; }
  int K() const { return K_; }

  const TimeSignal& kernel(int k) const { return kernels_[static_cast<std::size_t>(k)]; }
  const BoundaryTrace& baseline(int k) const { return baseline_[static_cast<std::size_t>(k)]; }
  const BoundaryTrace& impulse(int k, int j) const;

  /// Probe measurements d_k for the perturbed potential q, with seeded
  /// measurement noise injected into the perturbed trace.
  std::vector<ProbeMeasurement> measure(const ScalarField& q, double noise_level,
                                        std::uint64_t seed, int jobs = 0) const;

 private:
  ProblemFamily family_ = ProblemFamily::wave;
  const DomainSpec* spec_ = nullptr;
  const EigenSystem* es_ = nullptr;
  int K_ = 0;
  std::vector<TimeSignal> kernels_;
  std::vector<BoundaryTrace> baseline_;
  std::vector<BoundaryTrace> impulse_;  // triangular storage, j <= k
};

struct ExtractionOptions {
  bool use_deconvolution = true;  // false fits in the convolved domain instead
  bool diagonal_only = false;     // per-mode scalar fits instead of the K x K system
  double condition_limit = 1e8;   // Tikhonov regularization kicks in beyond this
};

struct ExtractionResult {
  Eigen::VectorXd coeffs;
  double condition_number = 0.0;
  bool regularized = false;
};

/// Estimates the spectral coefficients of q - q0 from the probe set by
/// linearized least squares against the unit-mode responses.
ExtractionResult extract_coefficients(const PotentialLab& lab,
                                      const std::vector<ProbeMeasurement>& probes,
                                      const ExtractionOptions& opts = {});

enum class TruncationPolicy {
  schedule,    // N = floor(sstar(gamma)), zero field on the trivial branch
  fixed_full,  // keep all K modes (oracle/diagnostic reconstructions)
};

struct ReconstructionResult {
  ScalarField dq_hat;
  int level = 0;
  bool trivial_branch = false;
  bool truncation_starved = false;  // floor(sstar) exceeded K; clamped
  double sstar = 0.0;
};

ReconstructionResult reconstruct_potential(const Eigen::VectorXd& coeffs, const EigenSystem& es,
                                           double gamma, const StabilitySchedule& sched,
                                           TruncationPolicy policy = TruncationPolicy::schedule);

/// Forward machinery for the source problems at a fixed (q, g): per-mode
/// impulse traces under q, reused across members.
class SourceLab {
 public:
  static SourceLab build(ProblemFamily family, const DomainSpec& spec, const EigenSystem& es,
                         int K, const ScalarField& q, TimeSignal g, int jobs = 0);

  ProblemFamily family() const { return family_; }
  const DomainSpec& spec() const { return *spec_; }
  const EigenSystem& eigensystem() const { return *es_; }
  const ConvolutionKernel& kernel() const { return *kernel_; }
  const ScalarField& potential() const { return q_; }
  int K() const { return K_; }
  const BoundaryTrace& impulse(int j) const { return impulse_[static_cast<std::size_t>(j)]; }

  /// Measured data trace for source f (with seeded noise).
  BoundaryTrace measure(const ScalarField& f, double noise_level, std::uint64_t seed) const;

 private:
  ProblemFamily family_ = ProblemFamily::wave;
  const DomainSpec* spec_ = nullptr;
  const EigenSystem* es_ = nullptr;
  int K_ = 0;
  ScalarField q_;
  std::optional<ConvolutionKernel> kernel_;
  std::shared_ptr<const HeatSolver> heat_;
  std::vector<BoundaryTrace> impulse_;
};

struct SourceEstimate {
  ScalarField f_hat;
  Eigen::VectorXd coeffs;
  int level = 0;
  double eps_star = 0.0;  // minimizer of the interpolation bound (schedule policy)
  double condition_number = 0.0;
  bool regularized = false;
};

/// Deconvolves the data by g, then least-squares fits the spectral
/// coefficients of f against the per-mode impulse traces. Under the
/// schedule policy the retained mode count is floor(eps*^{n/2}) with eps*
/// minimizing m/sqrt(eps) + B(g,tau) e^{mu eps} gamma.
SourceEstimate estimate_source(const SourceLab& lab, const BoundaryTrace& data, double gamma,
                               const StabilitySchedule& sched,
                               TruncationPolicy policy = TruncationPolicy::schedule);

struct FamilyMember {
  std::string id;
  ScalarField field;  // delta q for potential problems, f for source problems
  double noise_level = 0.0;
  bool holdout = false;
};

struct StabilityRecord {
  std::string id;
  double gamma = 0.0;
  double error = 0.0;
  double modulus = 0.0;
  double fitted_C = 0.0;  // single experiment-level constant, repeated per row
  std::string branch;     // "modulus" or "trivial"
  bool holdout = false;
  double recon_rel_error = 0.0;  // fixed-full diagnostic reconstruction
};

struct StabilityReport {
  ProblemKind kind = ProblemKind::wave_potential;
  Modulus modulus = Modulus::Psi;
  std::vector<StabilityRecord> records;
  double fitted_C = 0.0;   // max error/modulus over training rows
  double holdout_C = 0.0;  // same over holdout rows
  bool pass = false;       // holdout_C within a factor 2 of fitted_C
  double wall_seconds = 0.0;
};

/// Runs a full stability experiment over the family. Pass exactly one of
/// plab/slab matching the problem kind. Members violating the m-ball
/// constraints are rejected with the constraint named in the exception.
StabilityReport run_stability_experiment(ProblemKind kind, const std::vector<FamilyMember>& family,
                                         const PotentialLab* plab, const SourceLab* slab,
                                         const StabilitySchedule& sched, std::uint64_t seed,
                                         int jobs = 0);

/// One probe's norms for the exponential-rate fits: the bound reads
/// C * d <= a / sqrt(eps) + b * e^{rate * eps}.
struct RateProbe {
  double a = 0.0;  // strong-norm term
  double b = 0.0;  // data term (any fixed prefactor folded in)
  double d = 0.0;  // weak-norm term being controlled
};

struct RateFitResult {
  std::vector<double> rate_grid;
  std::vector<double> C_of_rate;  // largest admissible C per rate
  double rate_hat = 0.0;          // elbow: smallest rate achieving 90% of the plateau
  double C_hat = 0.0;
};

RateFitResult fit_exponential_rate(const std::vector<RateProbe>& probes,
                                   const std::vector<double>& eps_grid,
                                   const std::vector<double>& rate_grid);

/// Observability-style fit for the wave measurement: probes are initial
/// displacements (u1 = 0); a = ||u0||_{H1_0}, b = ||trace||_{L2(Lambda)},
/// d = ||u0||_{L2}.
RateFitResult fit_wave_observability(const DomainSpec& spec, const ScalarField& q,
                                     const std::vector<ScalarField>& probe_fields,
                                     const std::vector<double>& eps_grid,
                                     const std::vector<double>& rate_grid);

/// Interpolation-inequality fit for the heat measurement at fixed (q, g):
/// a = ||f||_{H1_0}, b = (1/|g0|) e^{tau ||g'||^2/g0^2} ||trace||_{H1},
/// d = ||f||_{L2}.
RateFitResult fit_heat_interpolation(const DomainSpec& spec, const ScalarField& q,
                                     const TimeSignal& g,
                                     const std::vector<ScalarField>& probe_fields,
                                     const std::vector<double>& eps_grid,
                                     const std::vector<double>& rate_grid);

}  // namespace invlab
