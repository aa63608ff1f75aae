#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "invlab/random_fields.hpp"
#include "invlab/volterra.hpp"
#include "test_support.hpp"

using namespace invlab;
using namespace testsupport;

namespace {

TimeSignal make_signal(const std::function<double(double)>& f, double dt, int M) {
  return TimeSignal::sample(f, dt, M);
}

}  // namespace

TEST_CASE("apply_S closed forms") {
  const double dt = 1e-3;
  const int M = 1000;
  ConvolutionKernel one(TimeSignal::constant(1.0, dt, M));

  TimeSignal h1 = TimeSignal::constant(1.0, dt, M);
  TimeSignal w = apply_S(one, h1);
  CHECK(w.samples[0] == 0.0);
  CHECK(w.samples[M] == doctest::Approx(M * dt).epsilon(1e-12));

  TimeSignal hc = make_signal([](double t) { return std::cos(t); }, dt, M);
  TimeSignal ws = apply_S(one, hc);
  double worst = 0.0;
  for (int j = 0; j <= M; ++j) {
    worst = std::max(worst, std::abs(ws.samples[j] - std::sin(j * dt)));
  }
  CHECK(worst <= dt * dt);

  TimeSignal h0 = TimeSignal::constant(0.0, dt, M);
  CHECK(apply_S(one, h0).samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kernel requires g(0) != 0 and finite bound factor") {
  const double dt = 1e-3;
  const int M = 100;
  CHECK_THROWS_AS(ConvolutionKernel(TimeSignal::sine(1.0, dt, M)), domain_error);
  ConvolutionKernel ok(TimeSignal::constant(1.0, dt, M));
  CHECK(ok.bound_factor == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("g = 1 inversion is discrete differentiation") {
  const double dt = 1e-3;
  const int M = 1000;
  ConvolutionKernel one(TimeSignal::constant(1.0, dt, M));
  TimeSignal w = make_signal([](double t) { return t; }, dt, M);
  TimeSignal h = invert_S(one, w);
  double worst = 0.0;
  for (int j = 0; j <= M; ++j) worst = std::max(worst, std::abs(h.samples[j] - 1.0));
  CHECK(worst < 1e-10);
}

TEST_CASE("round trip: h = sin(3t), g = cos(2t), dt = 1e-3") {
  const double dt = 1e-3;
  const int M = 1000;
  ConvolutionKernel kernel(TimeSignal::cosine(2.0, dt, M));
  TimeSignal h = make_signal([](double t) { return std::sin(3.0 * t); }, dt, M);
  TimeSignal w = apply_S(kernel, h);
  TimeSignal hr = invert_S(kernel, w);
  CHECK((hr.samples - h.samples).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("round trip both ways on boundary traces") {
  DomainSpec spec = square_spec(9, 1.0, 1e-3);
  TraceLayout layout = make_trace_layout(spec);
  const int M = spec.time_steps();
  ConvolutionKernel kernel(TimeSignal::cosine(2.0, spec.dt, M));

  BoundaryTrace h(spec, layout, spec.dt, M);
  for (int p = 0; p < h.node_count(); ++p) {
    for (int j = 0; j <= M; ++j) {
      h.values(j, p) = std::sin(3.0 * j * spec.dt) * (1.0 + 0.2 * p);
    }
  }
  BoundaryTrace w = apply_S(kernel, h);
  BoundaryTrace hr = invert_S(kernel, w);
  CHECK((hr.values - h.values).cwiseAbs().maxCoeff() <= 1e-6);

  // invert then apply on an H^1_l member
  BoundaryTrace w2 = apply_S(kernel, hr);
  CHECK((w2.values - w.values).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("cosine kernel inversion matches the resolvent closed form") {
  // For g = cos(omega t): h(t) = w'(t) + omega^2 int_0^t w.
  const double dt = 1e-3;
  const int M = 1500;
  const double omega = 4.0;
  ConvolutionKernel kernel(TimeSignal::cosine(omega, dt, M));
  TimeSignal h = make_signal([](double t) { return std::cos(1.3 * t) * (1 + t); }, dt, M);
  TimeSignal w = apply_S(kernel, h);
  TimeSignal hr = invert_S(kernel, w);
  CHECK((hr.samples - h.samples).cwiseAbs().maxCoeff() < 5e-5);
}

TEST_CASE("explicit inversion bound holds with 5% slack on random band-limited data") {
  DomainSpec spec = square_spec(9, 2.0, 1e-3);
  TraceLayout layout = make_trace_layout(spec);
  const int M = spec.time_steps();
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    TimeSignal profile = band_limited_signal(spec.dt, M, 4, seed);
    BoundaryTrace h(spec, layout, spec.dt, M);
    for (int p = 0; p < h.node_count(); ++p) {
      h.values.col(p) = (1.0 + 0.1 * p) * profile.samples;
    }
    for (int gi = 0; gi < 3; ++gi) {
      TimeSignal g = gi == 0   ? TimeSignal::constant(1.0, spec.dt, M)
                     : gi == 1 ? TimeSignal::cosine(1.0, spec.dt, M)
                               : TimeSignal::one_plus_t(spec.dt, M);
      ConvolutionKernel kernel(std::move(g));
      BoundaryTrace w = apply_S(kernel, h);
      CHECK(h.l2_lambda() <= 1.05 * kernel.bound_factor * w.h1_time_l2());
      ++checked;
    }
  }
  CHECK(checked == 75);
}

TEST_CASE("S is time invariant away from the endpoints") {
  const double dt = 1e-3;
  const int M = 2000;
  const int shift = 300;
  ConvolutionKernel kernel(TimeSignal::cosine(2.0, dt, M));
  // pulse supported well inside (0, tau - shift dt)
  auto pulse = [](double t) {
    const double s = (t - 0.5) / 0.15;
    return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
  };
  TimeSignal h = make_signal(pulse, dt, M);
  TimeSignal h_shift = make_signal([&](double t) { return t < shift * dt ? 0.0 : pulse(t - shift * dt); },
                                   dt, M);
  TimeSignal w = apply_S(kernel, h);
  TimeSignal w_shift = apply_S(kernel, h_shift);
  double worst = 0.0;
  for (int j = shift; j <= M; ++j) {
    worst = std::max(worst, std::abs(w_shift.samples[j] - w.samples[j - shift]));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("invert_S rejects data that does not vanish at t = 0") {
  const double dt = 1e-3;
  const int M = 200;
  ConvolutionKernel kernel(TimeSignal::constant(1.0, dt, M));
  TimeSignal w = TimeSignal::constant(1.0, dt, M);
  CHECK_THROWS_AS(invert_S(kernel, w), domain_error);
}

TEST_CASE("mollifier smooths noisy data before differentiation") {
  const double dt = 1e-3;
  const int M = 1000;
  ConvolutionKernel kernel(TimeSignal::constant(1.0, dt, M));
  TimeSignal h = make_signal([](double t) { return std::sin(2.0 * t); }, dt, M);
  TimeSignal w = apply_S(kernel, h);
  Rng rng(99);
  TimeSignal noisy = w;
  for (int j = 1; j <= M; ++j) noisy.samples[j] += 2e-5 * rng.normal();
  InvertOptions opts;
  opts.mollifier_width = 9;
  TimeSignal smooth = invert_S(kernel, noisy, opts);
  TimeSignal rough = invert_S(kernel, noisy);
  const double err_smooth = (smooth.samples - h.samples).lpNorm<1>() / (M + 1);
  const double err_rough = (rough.samples - h.samples).lpNorm<1>() / (M + 1);
  CHECK(err_smooth < err_rough);
}

TEST_CASE("grid mismatch raises a dimension error") {
  const double dt = 1e-3;
  ConvolutionKernel kernel(TimeSignal::constant(1.0, dt, 100));
  TimeSignal h = TimeSignal::constant(1.0, dt, 200);
  CHECK_THROWS_AS(apply_S(kernel, h), dimension_error);
}
