#include "invlab/volterra.hpp"

#include <cmath>

namespace invlab {

namespace {

void convolve_column(const Eigen::VectorXd& g, const double* h, double* out, int M, double dt) {
  out[0] = 0.0;
  for (int i = 1; i <= M; ++i) {
    double acc = 0.5 * (g[i] * h[0] + g[0] * h[i]);
    for (int j = 1; j < i; ++j) acc += g[i - j] * h[j];
    out[i] = dt * acc;
  }
}

Eigen::VectorXd mollify(const Eigen::VectorXd& v, int width) {
  if (width <= 1) return v;
  if (width % 2 == 0) ++width;
  const int half = width / 2;
  const Eigen::Index n = v.size();
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + half);
    out[i] = v.segment(lo, hi - lo + 1).mean();
  }
  return out;
}

/// Second-kind Volterra march, trapezoid with the order-3 Gregory end
/// correction: a h_i + I_i = y_i with I_i = dt*T_i - (dt/12)(f_i - f_{i-1}
/// - f_1 + f_0), f_j = gp_{i-j} h_j. The correction keeps the round trip
/// through the trapezoidal apply_S within the 1e-6 contract at dt = 1e-3.
void march_column(const Eigen::VectorXd& gp, const Eigen::VectorXd& y, double a, double dt,
                  double* h, int M) {
  h[0] = y[0] / a;
  for (int i = 1; i <= M; ++i) {
    double trap = 0.5 * gp[i] * h[0];
    for (int j = 1; j < i; ++j) trap += gp[i - j] * h[j];
    if (i < 3) {
      h[i] = (y[i] - dt * trap) / (a + 0.5 * dt * gp[0]);
    } else {
      const double known =
          y[i] - dt * trap + (dt / 12.0) * (-gp[1] * h[i - 1] - gp[i - 1] * h[1] + gp[i] * h[0]);
      h[i] = known / (a + 0.5 * dt * gp[0] - dt / 12.0 * gp[0]);
    }
  }
}

}  // namespace

ConvolutionKernel::ConvolutionKernel(TimeSignal signal) : g(std::move(signal)) {
  g0 = g.samples[0];
  if (std::abs(g0) < 1e-12) {
    throw domain_error("convolution kernel requires g(0) != 0 (|g(0)| >= 1e-12)");
  }
  TimeSignal gp = g.derivative();
  gprime_l2 = gp.l2_norm();
  bound_factor = std::sqrt(2.0) / std::abs(g0) *
                 std::exp(g.duration() * gprime_l2 * gprime_l2 / (g0 * g0));
  if (!std::isfinite(bound_factor)) {
    throw domain_error("convolution kernel bound factor overflows");
  }
}

BoundaryTrace apply_S(const ConvolutionKernel& kernel, const BoundaryTrace& h) {
  h.require_signal_axis(kernel.g, "apply_S");
  BoundaryTrace out = h;
  const int M = h.steps();
  Eigen::VectorXd col(M + 1), res(M + 1);
  for (int p = 0; p < h.node_count(); ++p) {
    col = h.values.col(p);
    convolve_column(kernel.g.samples, col.data(), res.data(), M, h.dt);
    out.values.col(p) = res;
  }
  return out;
}

TimeSignal apply_S(const ConvolutionKernel& kernel, const TimeSignal& h) {
  kernel.g.require_same_axis(h, "apply_S");
  Eigen::VectorXd out(h.samples.size());
  convolve_column(kernel.g.samples, h.samples.data(), out.data(), h.steps(), h.dt);
  return TimeSignal(h.dt, std::move(out));
}

BoundaryTrace invert_S(const ConvolutionKernel& kernel, const BoundaryTrace& w,
                       const InvertOptions& opts) {
  w.require_signal_axis(kernel.g, "invert_S");
  const double scale = std::max(w.values.cwiseAbs().maxCoeff(), 1.0);
  if (w.values.row(0).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw domain_error("invert_S: data does not vanish at t = 0 (not in H^1_l)");
  }
  const Eigen::VectorXd gp = fd_derivative4(kernel.g.samples, kernel.g.dt);
  BoundaryTrace out = w;
  const int M = w.steps();
  Eigen::VectorXd col(M + 1), h(M + 1);
  for (int p = 0; p < w.node_count(); ++p) {
    col = w.values.col(p);
    if (opts.mollifier_width > 1) col = mollify(col, opts.mollifier_width);
    Eigen::VectorXd wp = fd_derivative4(col, w.dt);
    march_column(gp, wp, kernel.g0, w.dt, h.data(), M);
    out.values.col(p) = h;
  }
  return out;
}

TimeSignal invert_S(const ConvolutionKernel& kernel, const TimeSignal& w,
                    const InvertOptions& opts) {
  kernel.g.require_same_axis(w, "invert_S");
  const double scale = std::max(w.samples.cwiseAbs().maxCoeff(), 1.0);
  if (std::abs(w.samples[0]) > 1e-8 * scale) {
    throw domain_error("invert_S: data does not vanish at t = 0 (not in H^1_l)");
  }
  const Eigen::VectorXd gp = fd_derivative4(kernel.g.samples, kernel.g.dt);
  Eigen::VectorXd col = w.samples;
  if (opts.mollifier_width > 1) col = mollify(col, opts.mollifier_width);
  Eigen::VectorXd wp = fd_derivative4(col, w.dt);
  Eigen::VectorXd h(w.samples.size());
  march_column(gp, wp, kernel.g0, w.dt, h.data(), w.steps());
  return TimeSignal(w.dt, std::move(h));
}

}  // namespace invlab
