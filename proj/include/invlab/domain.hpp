#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "invlab/common.hpp"

namespace invlab {

enum class Edge { left, right, bottom, top };

std::string edge_name(Edge e);
Edge edge_from_name(const std::string& name, int dim);

/// One measured sub-interval of a boundary edge, in edge-local arc length.
/// For dim == 1 an edge is a single endpoint and the interval is ignored.
struct EdgeWindow {
  Edge edge = Edge::bottom;
  double from = 0.0;
  double to = 0.0;
};

/// Rectangle geometry, uniform grid, measurement window and time axis.
struct DomainSpec {
  int dim = 2;                       // 1 or 2
  std::array<double, 2> length{1.0, 1.0};
  int grid_points = 31;              // interior nodes per side
  double tau = 2.0;                  // time horizon
  double dt = 1e-3;                  // time step
  std::vector<EdgeWindow> windows;   // union = measured sub-boundary

  double h(int axis) const { return length[static_cast<std::size_t>(axis)] / (grid_points + 1); }

  int interior_count() const {
    return dim == 1 ? grid_points : grid_points * grid_points;
  }

  /// Number of time steps M = ceil(tau / dt). Norms and kernels use the
  /// effective horizon M * dt (== tau whenever tau is a multiple of dt).
  int time_steps() const { return static_cast<int>(std::ceil(tau / dt - 1e-12)); }
  double effective_tau() const { return time_steps() * dt; }

  /// dt * sqrt(sum 1/h_i^2); must be <= 1 for the explicit wave stepper.
  double cfl_number() const {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += 1.0 / (h(a) * h(a));
    return dt * std::sqrt(s);
  }

  /// Interior node coordinate along an axis, index in [1, grid_points].
  double coord(int axis, int index) const { return h(axis) * index; }

  /// Flat index of interior node (i[, j]) with i the x index, both 1-based.
  int node_index(int i, int j = 1) const {
    return dim == 1 ? i - 1 : (j - 1) * grid_points + (i - 1);
  }

  /// Throws config_error listing every violated constraint.
  void validate() const;
  /// Collects violations without throwing; empty means valid.
  std::vector<std::string> violations() const;

  double edge_length(Edge e) const;
  double domain_measure() const {
    return dim == 1 ? length[0] : length[0] * length[1];
  }
  double diameter() const {
    return dim == 1 ? length[0] : std::hypot(length[0], length[1]);
  }
};

bool operator==(const DomainSpec& a, const DomainSpec& b);

/// Spatial compatibility (dimension, side lengths, grid); fields care only
/// about this, not about the time axis or windows.
bool same_spatial_grid(const DomainSpec& a, const DomainSpec& b);

/// One measured boundary node of the trace grid.
struct TraceNode {
  Edge edge;
  int index_along;      // 1-based grid index along the edge
  double coord_along;   // edge-local coordinate of the node
};

/// The discrete realization of the measured sub-boundary: the boundary grid
/// nodes lying inside the declared windows, plus their quadrature weights
/// (surface measure per node: h along the edge in 2d, 1 in 1d).
struct TraceLayout {
  std::vector<TraceNode> nodes;
  Eigen::VectorXd weights;

  std::size_t size() const { return nodes.size(); }
};

/// Builds the trace layout for a spec; throws config_error when the windows
/// select no nodes (the sub-boundary must have positive surface measure).
TraceLayout make_trace_layout(const DomainSpec& spec);

enum class FieldTag { none, potential, source, initial, eigenfunction };

/// A grid function on the interior nodes of a DomainSpec. The referenced
/// spec must outlive the field.
struct ScalarField {
  const DomainSpec* spec = nullptr;
  Eigen::VectorXd values;
  FieldTag tag = FieldTag::none;

  ScalarField() = default;
  explicit ScalarField(const DomainSpec& s, FieldTag t = FieldTag::none)
      : spec(&s), values(Eigen::VectorXd::Zero(s.interior_count())), tag(t) {}
  ScalarField(const DomainSpec& s, Eigen::VectorXd v, FieldTag t = FieldTag::none);

  /// Samples a function of the space coordinates on the interior grid.
  /// For dim == 1 the function receives (x, 0).
  static ScalarField sample(const DomainSpec& s,
                            const std::function<double(double, double)>& f,
                            FieldTag tag = FieldTag::none);

  int size() const { return static_cast<int>(values.size()); }
  double max_abs() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
  bool all_finite() const { return values.allFinite(); }

  double operator()(int i, int j = 1) const { return values[spec->node_index(i, j)]; }
  double& operator()(int i, int j = 1) { return values[spec->node_index(i, j)]; }

  /// Throws dimension_error unless `other` lives on the same grid.
  void require_same_grid(const ScalarField& other, const char* what) const;
  void require_grid(const DomainSpec& s, const char* what) const;
};

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double c, const ScalarField& a);

/// Discrete L2(Omega) inner product h^n * sum(a*b).
double inner_l2(const ScalarField& a, const ScalarField& b);

}  // namespace invlab
