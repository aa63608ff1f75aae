#include "invlab/domain.hpp"

#include <algorithm>
#include <sstream>

namespace invlab {

std::string edge_name(Edge e) {
  switch (e) {
    case Edge::left: return "left";
    case Edge::right: return "right";
    case Edge::bottom: return "bottom";
    case Edge::top: return "top";
  }
  return "?";
}

Edge edge_from_name(const std::string& name, int dim) {
  if (name == "left") return Edge::left;
  if (name == "right") return Edge::right;
  if (dim >= 2) {
    if (name == "bottom") return Edge::bottom;
    if (name == "top") return Edge::top;
  }
  throw config_error("unknown edge '" + name + "' for dimension " + std::to_string(dim));
}

std::vector<std::string> DomainSpec::violations() const {
  std::vector<std::string> out;
  if (dim != 1 && dim != 2) out.push_back("dimension: n must be 1 or 2");
  for (int a = 0; a < std::max(dim, 1); ++a) {
    if (!(length[static_cast<std::size_t>(a)] > 0.0))
      out.push_back("length: side length " + std::to_string(a + 1) + " must be > 0");
  }
  if (grid_points < 3) out.push_back("grid: N_g must be >= 3");
  if (!(tau > 0.0)) out.push_back("time: tau must be > 0");
  if (!(dt > 0.0)) out.push_back("time: dt must be > 0");
  if (dt > 0.0 && grid_points >= 3 && cfl_number() > 1.0 + 1e-12) {
    std::ostringstream os;
    os << "cfl: dt*sqrt(sum 1/h_i^2) = " << cfl_number() << " exceeds 1";
    out.push_back(os.str());
  }
  if (windows.empty()) out.push_back("window: measurement window list is empty");
  for (const auto& w : windows) {
    if (dim == 1) continue;  // endpoint windows carry no interval
    const double el = edge_length(w.edge);
    if (!(w.from >= 0.0 && w.to <= el + 1e-12 && w.from < w.to)) {
      out.push_back("window: interval [" + std::to_string(w.from) + ", " +
                    std::to_string(w.to) + "] invalid on edge " + edge_name(w.edge));
    }
  }
  if (out.empty()) {
    // Window may still select no grid nodes.
    try {
      make_trace_layout(*this);
    } catch (const config_error& e) {
      out.push_back(e.what());
    }
  }
  return out;
}

void DomainSpec::validate() const {
  auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid domain spec:";
  for (const auto& s : v) msg += "\n  - " + s;
  throw config_error(msg);
}

double DomainSpec::edge_length(Edge e) const {
  if (dim == 1) return 0.0;
  return (e == Edge::bottom || e == Edge::top) ? length[0] : length[1];
}

bool same_spatial_grid(const DomainSpec& a, const DomainSpec& b) {
  return a.dim == b.dim && a.grid_points == b.grid_points && a.length == b.length;
}

bool operator==(const DomainSpec& a, const DomainSpec& b) {
  if (a.dim != b.dim || a.grid_points != b.grid_points) return false;
  if (a.length != b.length || a.tau != b.tau || a.dt != b.dt) return false;
  if (a.windows.size() != b.windows.size()) return false;
  for (std::size_t i = 0; i < a.windows.size(); ++i) {
    if (a.windows[i].edge != b.windows[i].edge) return false;
    if (a.windows[i].from != b.windows[i].from) return false;
    if (a.windows[i].to != b.windows[i].to) return false;
  }
  return true;
}

TraceLayout make_trace_layout(const DomainSpec& spec) {
  TraceLayout layout;
  if (spec.dim == 1) {
    bool left = false, right = false;
    for (const auto& w : spec.windows) {
      if (w.edge == Edge::left) left = true;
      if (w.edge == Edge::right) right = true;
    }
    if (left) layout.nodes.push_back({Edge::left, 0, 0.0});
    if (right) layout.nodes.push_back({Edge::right, 0, spec.length[0]});
    layout.weights = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(layout.nodes.size()));
  } else {
    for (const auto& w : spec.windows) {
      const int axis = (w.edge == Edge::bottom || w.edge == Edge::top) ? 0 : 1;
      const double h = spec.h(axis);
      for (int i = 1; i <= spec.grid_points; ++i) {
        const double c = h * i;
        if (c > w.from - 1e-12 && c < w.to + 1e-12) {
          layout.nodes.push_back({w.edge, i, c});
        }
      }
    }
    // Deduplicate nodes shared by overlapping windows, keep a stable order.
    std::sort(layout.nodes.begin(), layout.nodes.end(), [](const TraceNode& a, const TraceNode& b) {
      if (a.edge != b.edge) return static_cast<int>(a.edge) < static_cast<int>(b.edge);
      return a.index_along < b.index_along;
    });
    layout.nodes.erase(std::unique(layout.nodes.begin(), layout.nodes.end(),
                                   [](const TraceNode& a, const TraceNode& b) {
                                     return a.edge == b.edge && a.index_along == b.index_along;
                                   }),
                       layout.nodes.end());
    layout.weights.resize(static_cast<Eigen::Index>(layout.nodes.size()));
    for (std::size_t p = 0; p < layout.nodes.size(); ++p) {
      const Edge e = layout.nodes[p].edge;
      const int axis = (e == Edge::bottom || e == Edge::top) ? 0 : 1;
      layout.weights[static_cast<Eigen::Index>(p)] = spec.h(axis);
    }
  }
  if (layout.nodes.empty()) {
    throw config_error("window: measurement window selects no boundary nodes");
  }
  return layout;
}

ScalarField::ScalarField(const DomainSpec& s, Eigen::VectorXd v, FieldTag t)
    : spec(&s), values(std::move(v)), tag(t) {
  if (values.size() != s.interior_count()) {
    throw dimension_error("field values do not match grid size");
  }
}

ScalarField ScalarField::sample(const DomainSpec& s,
                                const std::function<double(double, double)>& f,
                                FieldTag tag) {
  ScalarField out(s, tag);
  if (s.dim == 1) {
    for (int i = 1; i <= s.grid_points; ++i) out.values[s.node_index(i)] = f(s.coord(0, i), 0.0);
  } else {
    for (int j = 1; j <= s.grid_points; ++j) {
      const double y = s.coord(1, j);
      for (int i = 1; i <= s.grid_points; ++i) {
        out.values[s.node_index(i, j)] = f(s.coord(0, i), y);
      }
    }
  }
  return out;
}

void ScalarField::require_same_grid(const ScalarField& other, const char* what) const {
  if (spec == nullptr || other.spec == nullptr || !same_spatial_grid(*spec, *other.spec)) {
    throw dimension_error(std::string(what) + ": fields live on different grids");
  }
}

void ScalarField::require_grid(const DomainSpec& s, const char* what) const {
  if (spec == nullptr || !same_spatial_grid(*spec, s)) {
    throw dimension_error(std::string(what) + ": field does not match the requested grid");
  }
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  a.require_same_grid(b, "field addition");
  ScalarField out(*a.spec);
  out.values = a.values + b.values;
  return out;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  a.require_same_grid(b, "field subtraction");
  ScalarField out(*a.spec);
  out.values = a.values - b.values;
  return out;
}

ScalarField operator*(double c, const ScalarField& a) {
  ScalarField out(*a.spec);
  out.values = c * a.values;
  out.tag = a.tag;
  return out;
}

double inner_l2(const ScalarField& a, const ScalarField& b) {
  a.require_same_grid(b, "inner product");
  double cell = a.spec->h(0);
  if (a.spec->dim == 2) cell *= a.spec->h(1);
  return cell * a.values.dot(b.values);
}

}  // namespace invlab
