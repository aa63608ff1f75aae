#pragma once

#include <limits>

#include "invlab/common.hpp"

namespace invlab {

enum class Modulus { Psi, Phi, Theta };

/// Log-type stability moduli:
///   Psi(y)   = |ln y|^{-1/(8+2n)} + y
///   Phi(y)   = |ln y|^{-1/2}      + y
///   Theta(y) = |ln y|^{-1/(1+4n)} + y
/// extended by continuity with value 0 at y = 0; returns +infinity at y = 1
/// where the first term degenerates (the bound is vacuous there).
double modulus_value(Modulus kind, double gamma, int n);

enum class KappaReading {
  mu1_inverse,  // kappa = tau^2 + mu1^{-1/2} + m/mu1 + 1 (default)
  mu_inverse,   // kappa = tau^2 + mu1^{-1/2} + m/mu  + 1
};

enum class ProblemFamily { wave, heat };

/// The constant schedule behind the stability moduli: kappa, rho, theta,
/// gamma* and the truncation functions epsilon(s) and chi(s).
struct StabilitySchedule {
  ProblemFamily family = ProblemFamily::wave;
  int n = 2;
  double m = 1.0;
  double tau = 2.0;
  double mu1 = 0.0;     // first Dirichlet-Laplacian eigenvalue
  double weyl_c = 1.0;  // c tilde
  double mu = 1.0;      // observability rate constant (configured)
  KappaReading reading = KappaReading::mu1_inverse;

  double kappa = 0.0;
  double rho = 0.0;         // c tilde * (kappa + 1)
  double theta = 0.0;       // 1 + rho + mu
  double gamma_star = 0.0;  // e^{-theta}
  double eps_exponent = 0.0;

  static StabilitySchedule wave(int n, double m, double tau, double mu1, double weyl_c,
                                double mu = 1.0, KappaReading reading = KappaReading::mu1_inverse);
  static StabilitySchedule heat(int n, double m, double tau, double mu1, double weyl_c,
                                double rate = 1.0, KappaReading reading = KappaReading::mu1_inverse);

  double epsilon(double s) const;  // s^{8/n + 2} (wave) or s^{4 + 1/n} (heat)
  double chi(double s) const;      // s^{2/n} e^{theta eps(s)}; overflows for large s
  double log_chi(double s) const;  // always finite

  /// Root of chi(s) = 1/gamma on s >= 1, by bisection in the log domain to
  /// residual |chi(s) gamma - 1| <= 1e-9. Throws out_of_regime_error when
  /// gamma > gamma* (use the trivial branch there).
  double sstar(double gamma) const;
  /// Same with gamma passed as |ln gamma| (usable far below DBL_MIN).
  double sstar_from_neglog(double neglog_gamma) const;

  bool trivial_branch(double gamma) const { return gamma > gamma_star; }

  /// floor(sstar(gamma)) clamped to [1, K]; use only when gamma <= gamma*.
  int truncation_level(double gamma, int K) const;

  void finalize();  // derives kappa/rho/theta/gamma*
};

}  // namespace invlab
