#include "invlab/timesignal.hpp"

#include <cmath>

namespace invlab {

TimeSignal TimeSignal::sample(const std::function<double(double)>& f, double dt, int steps) {
  Eigen::VectorXd s(steps + 1);
  for (int j = 0; j <= steps; ++j) s[j] = f(j * dt);
  return TimeSignal(dt, std::move(s));
}

TimeSignal TimeSignal::constant(double value, double dt, int steps) {
  return TimeSignal(dt, Eigen::VectorXd::Constant(steps + 1, value));
}

TimeSignal TimeSignal::cosine(double omega, double dt, int steps) {
  return sample([omega](double t) { return std::cos(omega * t); }, dt, steps);
}

TimeSignal TimeSignal::sine(double omega, double dt, int steps) {
  return sample([omega](double t) { return std::sin(omega * t); }, dt, steps);
}

TimeSignal TimeSignal::one_plus_t(double dt, int steps) {
  return sample([](double t) { return 1.0 + t; }, dt, steps);
}

TimeSignal TimeSignal::exp_decay(double rate, double dt, int steps) {
  return sample([rate](double t) { return std::exp(-rate * t); }, dt, steps);
}

double TimeSignal::l2_norm() const {
  const int M = steps();
  double acc = 0.0;
  for (int j = 0; j <= M; ++j) {
    const double w = (j == 0 || j == M) ? 0.5 : 1.0;
    acc += w * samples[j] * samples[j];
  }
  return std::sqrt(dt * acc);
}

TimeSignal TimeSignal::derivative() const {
  return TimeSignal(dt, fd_derivative4(samples, dt));
}

void TimeSignal::require_same_axis(const TimeSignal& other, const char* what) const {
  if (samples.size() != other.samples.size() || std::abs(dt - other.dt) > 1e-15) {
    throw dimension_error(std::string(what) + ": time axes differ");
  }
}

Eigen::VectorXd fd_derivative2(const Eigen::VectorXd& v, double dt) {
  const Eigen::Index n = v.size();
  Eigen::VectorXd d(n);
  if (n < 3) throw dimension_error("fd_derivative2: need at least 3 samples");
  for (Eigen::Index i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2 * dt);
  d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * dt);
  d[n - 1] = (3 * v[n - 1] - 4 * v[n - 2] + v[n - 3]) / (2 * dt);
  return d;
}

Eigen::VectorXd fd_derivative4(const Eigen::VectorXd& v, double dt) {
  const Eigen::Index n = v.size();
  if (n < 5) return fd_derivative2(v, dt);
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 2; i + 2 < n; ++i) {
    d[i] = (v[i - 2] - 8 * v[i - 1] + 8 * v[i + 1] - v[i + 2]) / (12 * dt);
  }
  d[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * dt);
  d[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * dt);
  d[n - 1] = (25 * v[n - 1] - 48 * v[n - 2] + 36 * v[n - 3] - 16 * v[n - 4] + 3 * v[n - 5]) / (12 * dt);
  d[n - 2] = (3 * v[n - 1] + 10 * v[n - 2] - 18 * v[n - 3] + 6 * v[n - 4] - v[n - 5]) / (12 * dt);
  return d;
}

}  // namespace invlab
