#pragma once

#include "invlab/timesignal.hpp"
#include "invlab/trace.hpp"

namespace invlab {

/// Causal convolution kernel g with the explicit inversion bound factor
/// B(g, tau) = sqrt(2)/|g(0)| * exp(tau ||g'||^2 / g(0)^2). Construction
/// rejects kernels with |g(0)| below 1e-12.
struct ConvolutionKernel {
  TimeSignal g;
  double g0 = 0.0;
  double gprime_l2 = 0.0;
  double bound_factor = 0.0;

  explicit ConvolutionKernel(TimeSignal signal);
};

/// (S h)(t) = int_0^t g(t - s) h(s) ds by trapezoid, per node; (S h)(0) = 0.
BoundaryTrace apply_S(const ConvolutionKernel& kernel, const BoundaryTrace& h);

/// Scalar-signal convenience overload.
TimeSignal apply_S(const ConvolutionKernel& kernel, const TimeSignal& h);

struct InvertOptions {
  /// Width (odd, in samples) of a moving-average mollifier applied to the
  /// data before differentiation; 0 disables it.
  int mollifier_width = 0;
};

/// Inverts S by differentiating the data and marching the resulting
/// second-kind equation g(0) h(t) + int_0^t g'(t-s) h(s) ds = w'(t).
/// Requires w(0) = 0 (throws domain_error otherwise).
BoundaryTrace invert_S(const ConvolutionKernel& kernel, const BoundaryTrace& w,
                       const InvertOptions& opts = {});

TimeSignal invert_S(const ConvolutionKernel& kernel, const TimeSignal& w,
                    const InvertOptions& opts = {});

}  // namespace invlab
