#include "invlab/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace invlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

ConfigValue parse_value(const std::string& raw, int line_no) {
  ConfigValue v;
  const std::string s = trim(raw);
  if (s.empty()) throw config_error("line " + std::to_string(line_no) + ": empty value");
  if (s == "true" || s == "false") {
    v.kind = ConfigValue::Kind::boolean;
    v.flag = s == "true";
    return v;
  }
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') {
      throw config_error("line " + std::to_string(line_no) + ": unterminated string");
    }
    v.kind = ConfigValue::Kind::string;
    v.str = s.substr(1, s.size() - 2);
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') {
      throw config_error("line " + std::to_string(line_no) + ": unterminated array");
    }
    std::string inner = s.substr(1, s.size() - 2);
    std::vector<std::string> items;
    std::string cur;
    bool in_str = false;
    for (char c : inner) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        items.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    const bool strings = !items.empty() && items.front().size() && items.front().front() == '"';
    if (strings) {
      v.kind = ConfigValue::Kind::string_array;
      for (const auto& it : items) {
        if (it.size() < 2 || it.front() != '"' || it.back() != '"') {
          throw config_error("line " + std::to_string(line_no) + ": bad string array element");
        }
        v.strs.push_back(it.substr(1, it.size() - 2));
      }
    } else {
      v.kind = ConfigValue::Kind::number_array;
      for (const auto& it : items) {
        try {
          std::size_t used = 0;
          v.nums.push_back(std::stod(it, &used));
          if (used != it.size()) throw std::invalid_argument(it);
        } catch (const std::exception&) {
          throw config_error("line " + std::to_string(line_no) + ": bad number '" + it + "'");
        }
      }
    }
    return v;
  }
  try {
    std::size_t used = 0;
    v.num = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    v.kind = ConfigValue::Kind::number;
    return v;
  } catch (const std::exception&) {
    throw config_error("line " + std::to_string(line_no) + ": cannot parse value '" + s + "'");
  }
}

}  // namespace

ConfigTable parse_config_text(const std::string& text) {
  ConfigTable root;
  ConfigTable* current = &root;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw config_error("line " + std::to_string(line_no) + ": unterminated section header");
      }
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw config_error("line " + std::to_string(line_no) + ": empty section");
      const auto dot = name.find('.');
      if (dot == std::string::npos) {
        current = &root.subtables[name];
      } else {
        const std::string a = trim(name.substr(0, dot));
        const std::string b = trim(name.substr(dot + 1));
        if (a.empty() || b.empty() || b.find('.') != std::string::npos) {
          throw config_error("line " + std::to_string(line_no) + ": bad section '" + name + "'");
        }
        current = &root.subtables[a].subtables[b];
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw config_error("line " + std::to_string(line_no) + ": empty key");
    if (current->values.count(key)) {
      throw config_error("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    current->values[key] = parse_value(line.substr(eq + 1), line_no);
  }
  return root;
}

namespace {

/// Tracks consumed keys so strict mode can report everything unknown.
class TableReader {
 public:
  TableReader(const ConfigTable& table, std::string path, std::vector<std::string>& errors)
      : table_(table), path_(std::move(path)), errors_(errors) {}

  double number(const std::string& key, double fallback) {
    const ConfigValue* v = get(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::number) {
      errors_.push_back(path_ + key + ": expected a number");
      return fallback;
    }
    return v->num;
  }

  bool boolean(const std::string& key, bool fallback) {
    const ConfigValue* v = get(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::boolean) {
      errors_.push_back(path_ + key + ": expected true/false");
      return fallback;
    }
    return v->flag;
  }

  std::string str(const std::string& key, const std::string& fallback) {
    const ConfigValue* v = get(key);
    if (!v) return fallback;
    if (v->kind != ConfigValue::Kind::string) {
      errors_.push_back(path_ + key + ": expected a string");
      return fallback;
    }
    return v->str;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    const ConfigValue* v = get(key);
    if (!v) return fallback;
    if (v->kind == ConfigValue::Kind::number) return {v->num};
    if (v->kind != ConfigValue::Kind::number_array) {
      errors_.push_back(path_ + key + ": expected a number array");
      return fallback;
    }
    return v->nums;
  }

  std::vector<std::string> strings(const std::string& key, std::vector<std::string> fallback) {
    const ConfigValue* v = get(key);
    if (!v) return fallback;
    if (v->kind == ConfigValue::Kind::string) return {v->str};
    if (v->kind != ConfigValue::Kind::string_array) {
      errors_.push_back(path_ + key + ": expected a string array");
      return fallback;
    }
    return v->strs;
  }

  void report_unknown() {
    for (const auto& [key, value] : table_.values) {
      if (!seen_.count(key)) errors_.push_back(path_ + key + ": unknown key");
    }
  }

 private:
  const ConfigValue* get(const std::string& key) {
    seen_.insert(key);
    auto it = table_.values.find(key);
    return it == table_.values.end() ? nullptr : &it->second;
  }

  const ConfigTable& table_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

EdgeWindow parse_window(const std::string& text, int dim, std::vector<std::string>& errors) {
  std::istringstream in(text);
  std::string edge;
  double from = 0, to = 0;
  in >> edge;
  EdgeWindow w;
  try {
    w.edge = edge_from_name(edge, dim);
  } catch (const config_error& e) {
    errors.push_back(std::string("domain.windows: ") + e.what());
    return w;
  }
  if (dim >= 2) {
    if (!(in >> from >> to)) {
      errors.push_back("domain.windows: expected 'edge from to' in '" + text + "'");
      return w;
    }
  }
  w.from = from;
  w.to = to;
  return w;
}

}  // namespace

TimeSignal make_kernel_signal(const std::string& kind, double param, double dt, int steps) {
  if (kind == "one") return TimeSignal::constant(1.0, dt, steps);
  if (kind == "cos") return TimeSignal::cosine(param, dt, steps);
  if (kind == "sin") return TimeSignal::sine(param, dt, steps);
  if (kind == "one_plus_t") return TimeSignal::one_plus_t(dt, steps);
  if (kind == "exp") return TimeSignal::exp_decay(param, dt, steps);
  throw config_error("unknown kernel signal '" + kind + "'");
}

ExperimentConfig load_config_text(const std::string& text, bool strict) {
  ConfigTable root = parse_config_text(text);
  std::vector<std::string> errors;
  ExperimentConfig cfg;

  for (const auto& [name, table] : root.subtables) {
    if (name != "domain" && name != "time" && name != "background" && name != "schedule" &&
        name != "run" && name != "experiment") {
      errors.push_back(name + ": unknown section");
    }
  }
  if (!root.values.empty()) {
    for (const auto& [key, value] : root.values) errors.push_back(key + ": key outside a section");
  }

  {
    static const ConfigTable empty;
    auto it = root.subtables.find("domain");
    TableReader r(it == root.subtables.end() ? empty : it->second, "domain.", errors);
    cfg.domain.dim = static_cast<int>(r.number("dimension", 2));
    auto lengths = r.numbers("lengths", {1.0, 1.0});
    if (lengths.size() == 1) lengths.push_back(lengths[0]);
    if (lengths.size() != 2) {
      errors.push_back("domain.lengths: expected one or two entries");
      lengths = {1.0, 1.0};
    }
    cfg.domain.length = {lengths[0], lengths[1]};
    cfg.domain.grid_points = static_cast<int>(r.number("grid_points", 31));
    auto windows = r.strings("windows", {"bottom 0.25 0.75"});
    cfg.domain.windows.clear();
    for (const auto& w : windows) {
      cfg.domain.windows.push_back(parse_window(w, cfg.domain.dim, errors));
    }
    if (strict) r.report_unknown();
  }
  {
    static const ConfigTable empty;
    auto it = root.subtables.find("time");
    TableReader r(it == root.subtables.end() ? empty : it->second, "time.", errors);
    cfg.domain.tau = r.number("tau", 2.0);
    cfg.domain.dt = r.number("dt", 1e-3);
    if (strict) r.report_unknown();
  }
  {
    static const ConfigTable empty;
    auto it = root.subtables.find("background");
    TableReader r(it == root.subtables.end() ? empty : it->second, "background.", errors);
    cfg.background.kind = r.str("kind", "zero");
    cfg.background.value = r.number("value", 0.0);
    cfg.background.seed = static_cast<std::uint64_t>(r.number("seed", 1));
    cfg.background.max_mode = static_cast<int>(r.number("max_mode", 3));
    cfg.background.bound = r.number("bound", 1.0);
    if (cfg.background.kind != "zero" && cfg.background.kind != "constant" &&
        cfg.background.kind != "random") {
      errors.push_back("background.kind: must be zero, constant or random");
    }
    if (cfg.background.kind == "random" && !(cfg.background.bound > 0)) {
      errors.push_back("background.bound: must be > 0 for a random background");
    }
    if (strict) r.report_unknown();
  }
  {
    static const ConfigTable empty;
    auto it = root.subtables.find("schedule");
    TableReader r(it == root.subtables.end() ? empty : it->second, "schedule.", errors);
    cfg.schedule.mu = r.number("mu", 1.0);
    const std::string reading = r.str("kappa_reading", "mu1");
    if (reading == "mu1") {
      cfg.schedule.reading = KappaReading::mu1_inverse;
    } else if (reading == "mu") {
      cfg.schedule.reading = KappaReading::mu_inverse;
    } else {
      errors.push_back("schedule.kappa_reading: must be 'mu1' or 'mu'");
    }
    if (!(cfg.schedule.mu > 0)) errors.push_back("schedule.mu: must be > 0");
    if (strict) r.report_unknown();
  }
  {
    static const ConfigTable empty;
    auto it = root.subtables.find("run");
    TableReader r(it == root.subtables.end() ? empty : it->second, "run.", errors);
    cfg.seed = static_cast<std::uint64_t>(r.number("seed", 1));
    cfg.out_dir = r.str("out_dir", "out");
    cfg.jobs = static_cast<int>(r.number("jobs", 0));
    cfg.write_traces = r.boolean("write_traces", true);
    if (strict) r.report_unknown();
  }

  auto exp_root = root.subtables.find("experiment");
  if (exp_root != root.subtables.end()) {
    for (const auto& [name, table] : exp_root->second.subtables) {
      TableReader r(table, "experiment." + name + ".", errors);
      ExperimentSpec e;
      e.name = name;
      const std::string prob = r.str("problem", "wave_potential");
      try {
        e.problem = problem_from_name(prob);
      } catch (const config_error&) {
        errors.push_back("experiment." + name + ".problem: unknown problem '" + prob + "'");
      }
      e.m = r.number("m", 1.0);
      e.K = static_cast<int>(r.number("K", 8));
      e.g_kind = r.str("g", "one");
      e.g_param = r.number("g_param", 1.0);
      e.family.kind = r.str("family", "bumps");
      auto center = r.numbers("bump_center", {0.5, 0.5});
      if (center.size() == 2) {
        e.family.bump_center = {center[0], center[1]};
      } else if (center.size() == 1) {
        e.family.bump_center = {center[0], center[0]};
      } else {
        errors.push_back("experiment." + name + ".bump_center: expected 1 or 2 numbers");
      }
      e.family.bump_radius = r.number("bump_radius", 0.3);
      e.family.bump_amplitude = r.number("bump_amplitude", 1.0);
      e.family.mode_indices = r.numbers("mode_indices", {1});
      e.family.mode_coeffs = r.numbers("mode_coeffs", {1.0});
      e.family.alphas = r.numbers("alphas", {0.1});
      e.family.holdout_alphas = r.numbers("holdout_alphas", {});
      e.family.noise_levels = r.numbers("noise_levels", {0.0});
      e.family.holdout_noise_levels = r.numbers("holdout_noise_levels", {});
      if (strict) r.report_unknown();

      const std::string prefix = "experiment." + name + ".";
      if (!(e.m > 0)) errors.push_back(prefix + "m: must be > 0");
      if (e.K < 1) errors.push_back(prefix + "K: must be >= 1");
      if (e.family.kind != "bumps" && e.family.kind != "modes") {
        errors.push_back(prefix + "family: must be 'bumps' or 'modes'");
      }
      if (e.family.kind == "bumps" && !(e.family.bump_radius > 0)) {
        errors.push_back(prefix + "bump_radius: must be > 0");
      }
      if (e.family.kind == "modes" &&
          e.family.mode_indices.size() != e.family.mode_coeffs.size()) {
        errors.push_back(prefix + "mode_coeffs: must match mode_indices in length");
      }
      if (e.family.alphas.empty()) errors.push_back(prefix + "alphas: family empty");
      for (double nl : e.family.noise_levels) {
        if (nl < 0) errors.push_back(prefix + "noise_levels: must be >= 0");
      }
      const bool is_source = e.problem == ProblemKind::wave_source ||
                             e.problem == ProblemKind::heat_source;
      const bool probes_need_kernel = is_source;
      if (probes_need_kernel) {
        try {
          TimeSignal g = make_kernel_signal(e.g_kind, e.g_param, 0.1, 4);
          if (std::abs(g.samples[0]) < 1e-12) {
            errors.push_back(prefix + "g: source experiment violates the hypothesis g(0) != 0");
          }
        } catch (const config_error& err) {
          errors.push_back(prefix + "g: " + err.what());
        }
      }
      cfg.experiments.push_back(std::move(e));
    }
  }

  // Domain checks run last so window parsing errors surface once.
  for (const auto& v : cfg.domain.violations()) errors.push_back("domain: " + v);
  for (const auto& e : cfg.experiments) {
    if (e.K > cfg.domain.interior_count()) {
      errors.push_back("experiment." + e.name + ".K: exceeds interior grid dimension");
    }
  }

  if (!errors.empty()) {
    std::string msg = "invalid configuration (" + std::to_string(errors.size()) + " problem(s)):";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw config_error(msg);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config_text(ss.str(), strict);
}

}  // namespace invlab
