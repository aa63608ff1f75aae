#include "invlab/trace.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace invlab {

double BoundaryTrace::spatial_l2(int j) const {
  double acc = 0.0;
  for (int p = 0; p < node_count(); ++p) {
    acc += layout.weights[p] * values(j, p) * values(j, p);
  }
  return std::sqrt(acc);
}

double BoundaryTrace::l2_lambda() const {
  const int M = steps();
  double acc = 0.0;
  for (int j = 0; j <= M; ++j) {
    const double w = (j == 0 || j == M) ? 0.5 : 1.0;
    const double s = spatial_l2(j);
    acc += w * s * s;
  }
  return std::sqrt(dt * acc);
}

BoundaryTrace BoundaryTrace::time_derivative() const {
  BoundaryTrace out(*spec, layout, dt, steps());
  for (int p = 0; p < node_count(); ++p) {
    out.values.col(p) = fd_derivative2(values.col(p), dt);
  }
  return out;
}

double BoundaryTrace::h1_time_l2() const {
  const double a = l2_lambda();
  const double b = time_derivative().l2_lambda();
  return std::sqrt(a * a + b * b);
}

double BoundaryTrace::rms() const {
  if (values.size() == 0) return 0.0;
  return std::sqrt(values.squaredNorm() / static_cast<double>(values.size()));
}

void BoundaryTrace::require_compatible(const BoundaryTrace& other, const char* what) const {
  if (values.rows() != other.values.rows() || values.cols() != other.values.cols() ||
      std::abs(dt - other.dt) > 1e-15) {
    throw dimension_error(std::string(what) + ": traces have different time axes or node sets");
  }
}

void BoundaryTrace::require_signal_axis(const TimeSignal& g, const char* what) const {
  if (g.samples.size() != values.rows() || std::abs(g.dt - dt) > 1e-15) {
    throw dimension_error(std::string(what) + ": signal and trace time axes differ");
  }
}

void BoundaryTrace::write_csv(std::ostream& os) const {
  os << "time";
  for (int p = 1; p <= node_count(); ++p) os << ",node_" << p;
  os << "\n";
  char buf[32];
  for (int j = 0; j <= steps(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", j * dt);
    os << buf;
    for (int p = 0; p < node_count(); ++p) {
      std::snprintf(buf, sizeof buf, "%.17g", values(j, p));
      os << ',' << buf;
    }
    os << "\n";
  }
}

BoundaryTrace operator+(const BoundaryTrace& a, const BoundaryTrace& b) {
  a.require_compatible(b, "trace addition");
  BoundaryTrace out = a;
  out.values += b.values;
  return out;
}

BoundaryTrace operator-(const BoundaryTrace& a, const BoundaryTrace& b) {
  a.require_compatible(b, "trace subtraction");
  BoundaryTrace out = a;
  out.values -= b.values;
  return out;
}

BoundaryTrace operator*(double c, const BoundaryTrace& a) {
  BoundaryTrace out = a;
  out.values *= c;
  return out;
}

double inner_l2_lambda(const BoundaryTrace& a, const BoundaryTrace& b) {
  a.require_compatible(b, "trace inner product");
  const int M = a.steps();
  double acc = 0.0;
  for (int j = 0; j <= M; ++j) {
    const double w = (j == 0 || j == M) ? 0.5 : 1.0;
    double s = 0.0;
    for (int p = 0; p < a.node_count(); ++p) {
      s += a.layout.weights[p] * a.values(j, p) * b.values(j, p);
    }
    acc += w * s;
  }
  return a.dt * acc;
}

BoundaryTrace exponentially_weighted(const BoundaryTrace& tr, double rate) {
  BoundaryTrace out = tr;
  for (int j = 0; j <= tr.steps(); ++j) {
    out.values.row(j) *= std::exp(-rate * (j * tr.dt));
  }
  return out;
}

}  // namespace invlab
