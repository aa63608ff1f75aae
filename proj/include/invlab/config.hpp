#pragma once

#include <map>
#include <string>
#include <vector>

#include "invlab/domain.hpp"
#include "invlab/schedule.hpp"
#include "invlab/stability.hpp"

namespace invlab {

/// Minimal structured-text value: number, boolean, string, or homogeneous
/// array of numbers/strings.
struct ConfigValue {
  enum class Kind { number, boolean, string, number_array, string_array };
  Kind kind = Kind::number;
  double num = 0.0;
  bool flag = false;
  std::string str;
  std::vector<double> nums;
  std::vector<std::string> strs;
};

/// One parsed table: `[section]` or `[section.sub]` headers with
/// `key = value` entries, `#` comments. Nested tables one level deep under
/// dotted headers.
struct ConfigTable {
  std::map<std::string, ConfigValue> values;
  std::map<std::string, ConfigTable> subtables;
};

ConfigTable parse_config_text(const std::string& text);

struct BackgroundSpec {
  std::string kind = "zero";  // zero | constant | random
  double value = 0.0;
  std::uint64_t seed = 1;
  int max_mode = 3;
  double bound = 1.0;
};

struct ScheduleSpec {
  double mu = 1.0;
  KappaReading reading = KappaReading::mu1_inverse;
};

struct FamilySpec {
  std::string kind = "bumps";  // bumps | modes
  std::array<double, 2> bump_center{0.5, 0.5};
  double bump_radius = 0.3;
  double bump_amplitude = 1.0;
  std::vector<double> mode_indices{1};
  std::vector<double> mode_coeffs{1.0};
  std::vector<double> alphas{0.1};
  std::vector<double> holdout_alphas;
  std::vector<double> noise_levels{0.0};
  std::vector<double> holdout_noise_levels;
};

struct ExperimentSpec {
  std::string name;
  ProblemKind problem = ProblemKind::wave_potential;
  double m = 1.0;
  int K = 8;
  std::string g_kind = "one";  // one | cos | sin | one_plus_t | exp
  double g_param = 1.0;
  FamilySpec family;
};

struct ExperimentConfig {
  DomainSpec domain;
  BackgroundSpec background;
  ScheduleSpec schedule;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int jobs = 0;
  bool write_traces = true;
  std::vector<ExperimentSpec> experiments;
};

/// Parses and validates a config file. Collects *all* violated constraints
/// and unknown keys (strict mode) into a single config_error.
ExperimentConfig load_config(const std::string& path, bool strict = true);
ExperimentConfig load_config_text(const std::string& text, bool strict = true);

/// The signal named by (g_kind, g_param) sampled on the run's time grid.
TimeSignal make_kernel_signal(const std::string& kind, double param, double dt, int steps);

}  // namespace invlab
