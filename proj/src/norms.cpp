#include "invlab/norms.hpp"

#include <cmath>

namespace invlab {

namespace {
double cell_measure(const DomainSpec& s) {
  double c = s.h(0);
  if (s.dim == 2) c *= s.h(1);
  return c;
}
}  // namespace

double norm_l2(const ScalarField& v) {
  return std::sqrt(cell_measure(*v.spec)) * v.values.norm();
}

double norm_h10(const ScalarField& v) {
  const DomainSpec& s = *v.spec;
  const int n = s.grid_points;
  const double cell = cell_measure(s);
  double acc = 0.0;
  if (s.dim == 1) {
    const double ih = 1.0 / s.h(0);
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = (v.values[i] - prev) * ih;
      acc += d * d;
      prev = v.values[i];
    }
    acc += (prev * ih) * (prev * ih);
  } else {
    const double ihx = 1.0 / s.h(0);
    const double ihy = 1.0 / s.h(1);
    for (int j = 0; j < n; ++j) {
      double prev = 0.0;
      for (int i = 0; i < n; ++i) {
        const double u = v.values[j * n + i];
        const double d = (u - prev) * ihx;
        acc += d * d;
        prev = u;
      }
      acc += (prev * ihx) * (prev * ihx);
    }
    for (int i = 0; i < n; ++i) {
      double prev = 0.0;
      for (int j = 0; j < n; ++j) {
        const double u = v.values[j * n + i];
        const double d = (u - prev) * ihy;
        acc += d * d;
        prev = u;
      }
      acc += (prev * ihy) * (prev * ihy);
    }
  }
  return std::sqrt(cell * acc);
}

ScalarField discrete_laplacian(const ScalarField& v) {
  const DomainSpec& s = *v.spec;
  DirichletOperator minus_lap(s, ScalarField(s));
  ScalarField out(s);
  minus_lap.apply_laplacian(v.values.data(), out.values.data());
  out.values = -out.values;
  return out;
}

double spectral_h1(const ScalarField& v, const EigenSystem& es) {
  v.require_grid(*es.spec, "spectral_h1");
  double acc = 0.0;
  for (int k = 0; k < es.K; ++k) {
    const double c = inner_l2(v, es.phi[static_cast<std::size_t>(k)]);
    acc += es.lambda[k] * c * c;
  }
  return std::sqrt(acc);
}

double spectral_hminus1(const ScalarField& v, const EigenSystem& es) {
  v.require_grid(*es.spec, "spectral_hminus1");
  double acc = 0.0;
  for (int k = 0; k < es.K; ++k) {
    const double c = inner_l2(v, es.phi[static_cast<std::size_t>(k)]);
    acc += c * c / es.lambda[k];
  }
  return std::sqrt(acc);
}

NormResult field_norm(const ScalarField& v, FieldNorm kind, const EigenSystem* es) {
  NormResult out;
  switch (kind) {
    case FieldNorm::L2:
      out.value = norm_l2(v);
      return out;
    case FieldNorm::H1_0:
      out.value = norm_h10(v);
      return out;
    case FieldNorm::H_minus1: {
      if (es == nullptr) throw config_error("H^{-1} norm requires an EigenSystem");
      out.value = spectral_hminus1(v, *es);
      double resolved = 0.0;
      for (int k = 0; k < es->K; ++k) {
        const double c = inner_l2(v, es->phi[static_cast<std::size_t>(k)]);
        resolved += c * c;
      }
      const double total = norm_l2(v);
      out.truncated = total > 0 && resolved < (1.0 - 0.01) * total * total;
      return out;
    }
    case FieldNorm::H_Delta_cal:
      out.value = norm_h10(v) + norm_l2(discrete_laplacian(v));
      return out;
    case FieldNorm::H0_cal:
      out.value = norm_h10(v) + norm_h10(discrete_laplacian(v));
      return out;
  }
  throw config_error("unknown norm kind");
}

}  // namespace invlab
