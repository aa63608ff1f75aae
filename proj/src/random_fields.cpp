#include "invlab/random_fields.hpp"

#include <cmath>

namespace invlab {

ScalarField smooth_bump(const DomainSpec& spec, double cx, double cy, double radius,
                        double amplitude) {
  if (!(radius > 0.0)) throw config_error("smooth_bump: radius must be > 0");
  return ScalarField::sample(spec, [=](double x, double y) {
    const double dx = x - cx;
    const double dy = spec.dim == 2 ? y - cy : 0.0;
    const double r2 = (dx * dx + dy * dy) / (radius * radius);
    if (r2 >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - r2));
  });
}

ScalarField random_mode_field(const DomainSpec& spec, int max_mode, double sup_norm,
                              std::uint64_t seed) {
  Rng rng(seed);
  struct ModeCoef {
    int i, j;
    double a;
  };
  std::vector<ModeCoef> coefs;
  for (int i = 1; i <= max_mode; ++i) {
    if (spec.dim == 1) {
      coefs.push_back({i, 0, rng.normal() / (i * i)});
    } else {
      for (int j = 1; j <= max_mode; ++j) {
        coefs.push_back({i, j, rng.normal() / (i * i + j * j)});
      }
    }
  }
  ScalarField f = ScalarField::sample(spec, [&](double x, double y) {
    double v = 0.0;
    for (const auto& c : coefs) {
      double s = c.a * std::sin(c.i * M_PI * x / spec.length[0]);
      if (spec.dim == 2) s *= std::sin(c.j * M_PI * y / spec.length[1]);
      v += s;
    }
    return v;
  });
  const double amp = f.max_abs();
  if (amp > 0) f.values *= sup_norm / amp;
  return f;
}

ScalarField random_nonneg_potential(const DomainSpec& spec, double m, int max_mode,
                                    std::uint64_t seed) {
  ScalarField f = random_mode_field(spec, max_mode, 1.0, seed);
  const double lo = f.values.size() ? f.values.minCoeff() : 0.0;
  const double hi = f.values.size() ? f.values.maxCoeff() : 1.0;
  const double span = hi - lo;
  if (span <= 0) return ScalarField(spec);
  ScalarField out(spec, Eigen::VectorXd((f.values.array() - lo) * (m / span)),
                  FieldTag::potential);
  return out;
}

TimeSignal band_limited_signal(double dt, int steps, int max_mode, std::uint64_t seed) {
  Rng rng(seed);
  const double T = dt * steps;
  std::vector<double> a(static_cast<std::size_t>(max_mode)), b(static_cast<std::size_t>(max_mode));
  for (int j = 0; j < max_mode; ++j) {
    a[static_cast<std::size_t>(j)] = rng.normal();
    b[static_cast<std::size_t>(j)] = rng.normal();
  }
  TimeSignal sig = TimeSignal::sample(
      [&](double t) {
        double v = 0.0;
        for (int j = 1; j <= max_mode; ++j) {
          const double w = M_PI * j * t / T;
          v += a[static_cast<std::size_t>(j - 1)] * std::cos(w) +
               b[static_cast<std::size_t>(j - 1)] * std::sin(w);
        }
        return v;
      },
      dt, steps);
  const double amp = sig.samples.cwiseAbs().maxCoeff();
  if (amp > 0) sig.samples /= amp;
  return sig;
}

}  // namespace invlab
