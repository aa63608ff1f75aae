#include "invlab/schedule.hpp"

#include <cmath>

namespace invlab {

double modulus_value(Modulus kind, double gamma, int n) {
  if (gamma < 0.0) throw domain_error("modulus: gamma must be >= 0");
  if (gamma == 0.0) return 0.0;
  const double l = std::abs(std::log(gamma));
  if (l == 0.0) return std::numeric_limits<double>::infinity();
  double expo = 0.0;
  switch (kind) {
    case Modulus::Psi: expo = 1.0 / (8.0 + 2.0 * n); break;
    case Modulus::Phi: expo = 0.5; break;
    case Modulus::Theta: expo = 1.0 / (1.0 + 4.0 * n); break;
  }
  return std::pow(l, -expo) + gamma;
}

void StabilitySchedule::finalize() {
  if (!(mu1 > 0.0)) throw config_error("schedule: mu1 must be > 0");
  if (!(weyl_c > 1.0)) throw config_error("schedule: weyl constant must be > 1");
  if (!(m > 0.0) || !(tau > 0.0) || !(mu > 0.0)) {
    throw config_error("schedule: m, tau and mu must be > 0");
  }
  const double inv_rate = reading == KappaReading::mu1_inverse ? m / mu1 : m / mu;
  kappa = tau * tau + 1.0 / std::sqrt(mu1) + inv_rate + 1.0;
  rho = weyl_c * (kappa + 1.0);
  theta = 1.0 + rho + mu;
  gamma_star = std::exp(-theta);
}

StabilitySchedule StabilitySchedule::wave(int n, double m, double tau, double mu1, double weyl_c,
                                          double mu, KappaReading reading) {
  StabilitySchedule s;
  s.family = ProblemFamily::wave;
  s.n = n;
  s.m = m;
  s.tau = tau;
  s.mu1 = mu1;
  s.weyl_c = weyl_c;
  s.mu = mu;
  s.reading = reading;
  s.eps_exponent = 8.0 / n + 2.0;
  s.finalize();
  return s;
}

StabilitySchedule StabilitySchedule::heat(int n, double m, double tau, double mu1, double weyl_c,
                                          double rate, KappaReading reading) {
  StabilitySchedule s;
  s.family = ProblemFamily::heat;
  s.n = n;
  s.m = m;
  s.tau = tau;
  s.mu1 = mu1;
  s.weyl_c = weyl_c;
  s.mu = rate;
  s.reading = reading;
  s.eps_exponent = 4.0 + 1.0 / n;
  s.finalize();
  return s;
}

double StabilitySchedule::epsilon(double s) const { return std::pow(s, eps_exponent); }

double StabilitySchedule::log_chi(double s) const {
  return (2.0 / n) * std::log(s) + theta * epsilon(s);
}

double StabilitySchedule::chi(double s) const { return std::exp(log_chi(s)); }

double StabilitySchedule::sstar_from_neglog(double neglog_gamma) const {
  if (!(neglog_gamma >= theta)) {
    throw out_of_regime_error(
        "schedule_sstar: gamma exceeds gamma* (trivial branch applies)");
  }
  const double target = neglog_gamma;  // want log_chi(s) == |ln gamma|
  double lo = 1.0;
  if (log_chi(lo) >= target - 1e-12 * std::max(1.0, target)) {
    return 1.0;  // endpoint: chi(1) = e^theta = 1/gamma*
  }
  double hi = std::pow(target / theta, 1.0 / eps_exponent) + 1.0;
  while (log_chi(hi) < target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_chi(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

double StabilitySchedule::sstar(double gamma) const {
  if (!(gamma > 0.0)) throw domain_error("schedule_sstar: gamma must be > 0");
  if (gamma > gamma_star) {
    throw out_of_regime_error(
        "schedule_sstar: gamma exceeds gamma* (trivial branch applies)");
  }
  return sstar_from_neglog(-std::log(gamma));
}

int StabilitySchedule::truncation_level(double gamma, int K) const {
  const double s = sstar(gamma);
  int N = static_cast<int>(std::floor(s));
  if (N < 1) N = 1;
  if (N > K) N = K;
  return N;
}

}  // namespace invlab
