#pragma once

#include <functional>

#include <Eigen/Dense>

#include "invlab/common.hpp"

namespace invlab {

/// Uniformly sampled time signal g(t_j), j = 0..M.
struct TimeSignal {
  double dt = 0.0;
  Eigen::VectorXd samples;

  TimeSignal() = default;
  TimeSignal(double step, Eigen::VectorXd s) : dt(step), samples(std::move(s)) {}

  static TimeSignal sample(const std::function<double(double)>& f, double dt, int steps);
  static TimeSignal constant(double value, double dt, int steps);
  static TimeSignal cosine(double omega, double dt, int steps);
  static TimeSignal sine(double omega, double dt, int steps);
  static TimeSignal one_plus_t(double dt, int steps);
  static TimeSignal exp_decay(double rate, double dt, int steps);

  int steps() const { return static_cast<int>(samples.size()) - 1; }
  double duration() const { return steps() * dt; }
  double operator()(int j) const { return samples[j]; }

  /// Discrete L2(0, tau) norm (trapezoid weights).
  double l2_norm() const;
  /// Samplewise 4th-order finite-difference derivative.
  TimeSignal derivative() const;

  void require_same_axis(const TimeSignal& other, const char* what) const;
};

/// 4th-order first derivative of a sampled series (5-point stencils,
/// one-sided at the ends). Series must have at least 5 samples.
Eigen::VectorXd fd_derivative4(const Eigen::VectorXd& v, double dt);

/// 2nd-order first derivative (centered; one-sided 2nd order at the ends).
Eigen::VectorXd fd_derivative2(const Eigen::VectorXd& v, double dt);

}  // namespace invlab
