#pragma once

#include <iosfwd>

#include "invlab/domain.hpp"
#include "invlab/timesignal.hpp"

namespace invlab {

/// Time series of the normal derivative on the measured boundary nodes.
/// Row j holds the values at time t_j = j * dt, one column per node.
struct BoundaryTrace {
  const DomainSpec* spec = nullptr;
  TraceLayout layout;
  double dt = 0.0;
  Eigen::MatrixXd values;  // (steps + 1) x node_count

  BoundaryTrace() = default;
  BoundaryTrace(const DomainSpec& s, TraceLayout lay, double step, int steps)
      : spec(&s),
        layout(std::move(lay)),
        dt(step),
        values(Eigen::MatrixXd::Zero(steps + 1, static_cast<Eigen::Index>(layout.size()))) {}

  int steps() const { return static_cast<int>(values.rows()) - 1; }
  int node_count() const { return static_cast<int>(values.cols()); }
  double duration() const { return steps() * dt; }

  /// L2(Upsilon) norm of the trace at time index j.
  double spatial_l2(int j) const;

  /// L2(Lambda) = L2((0,tau); L2(Upsilon)) norm, trapezoid in time.
  double l2_lambda() const;

  /// H1((0,tau); L2(Upsilon)) norm: (||w||^2 + ||w'||^2)^{1/2} with the time
  /// derivative taken by centered differences (one-sided at the ends).
  double h1_time_l2() const;

  /// Samplewise time derivative trace (2nd order stencils).
  BoundaryTrace time_derivative() const;

  /// rms over all (node, time) samples, uniform weights.
  double rms() const;

  void require_compatible(const BoundaryTrace& other, const char* what) const;
  void require_signal_axis(const TimeSignal& g, const char* what) const;

  /// CSV with header "time,node_1,...,node_P" and %.17g values.
  void write_csv(std::ostream& os) const;
};

BoundaryTrace operator+(const BoundaryTrace& a, const BoundaryTrace& b);
BoundaryTrace operator-(const BoundaryTrace& a, const BoundaryTrace& b);
BoundaryTrace operator*(double c, const BoundaryTrace& a);

/// L2(Lambda) inner product.
double inner_l2_lambda(const BoundaryTrace& a, const BoundaryTrace& b);

/// Multiplies row j by exp(-rate * t_j); realizes the substitution sending
/// solutions for potential q to solutions for q + rate.
BoundaryTrace exponentially_weighted(const BoundaryTrace& tr, double rate);

/// Difference of the measured traces for an eigenfield probe under the
/// perturbed and background potentials, with the norms the stability
/// machinery consumes (probe_norm is the wave or heat calligraphic norm).
struct ProbeMeasurement {
  int k = 0;
  double lambda = 0.0;
  BoundaryTrace difference;   // trace(q run) - trace(q0 run)
  double data_h1_norm = 0.0;  // H1((0,tau); L2(Upsilon)) of the difference
  double probe_norm = 0.0;
};

}  // namespace invlab
