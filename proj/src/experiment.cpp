#include "invlab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "invlab/eigensystem.hpp"
#include "invlab/random_fields.hpp"

#ifndef INVLAB_BUILD_ID
#define INVLAB_BUILD_ID "untracked"
#endif

namespace invlab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

ScalarField make_background(const ExperimentConfig& cfg, const DomainSpec& spec) {
  if (cfg.background.kind == "zero") return ScalarField(spec, FieldTag::potential);
  if (cfg.background.kind == "constant") {
    ScalarField q0(spec, FieldTag::potential);
    q0.values.setConstant(cfg.background.value);
    return q0;
  }
  return random_nonneg_potential(spec, cfg.background.bound, cfg.background.max_mode,
                                 cfg.background.seed);
}

ScalarField base_perturbation(const ExperimentSpec& e, const DomainSpec& spec,
                              const EigenSystem& es) {
  if (e.family.kind == "bumps") {
    return smooth_bump(spec, e.family.bump_center[0], e.family.bump_center[1],
                       e.family.bump_radius, e.family.bump_amplitude);
  }
  ScalarField f(spec);
  for (std::size_t i = 0; i < e.family.mode_indices.size(); ++i) {
    const int idx = static_cast<int>(e.family.mode_indices[i]);
    if (idx < 1 || idx > es.K) {
      throw config_error("experiment " + e.name + ": mode index " + std::to_string(idx) +
                         " outside the eigensystem (K = " + std::to_string(es.K) + ")");
    }
    f.values += e.family.mode_coeffs[i] * es.phi[static_cast<std::size_t>(idx - 1)].values;
  }
  return f;
}

std::vector<FamilyMember> make_family(const ExperimentSpec& e, const ScalarField& base) {
  std::vector<FamilyMember> family;
  auto add = [&](double alpha, double noise, bool holdout) {
    FamilyMember m;
    m.id = std::string(holdout ? "holdout" : "train") + "_a" + fmt_short(alpha) + "_n" +
           fmt_short(noise);
    m.field = alpha * base;
    m.noise_level = noise;
    m.holdout = holdout;
    family.push_back(std::move(m));
  };
  for (double a : e.family.alphas) {
    for (double n : e.family.noise_levels) add(a, n, false);
  }
  const auto& hnoise = e.family.holdout_noise_levels.empty() ? e.family.noise_levels
                                                             : e.family.holdout_noise_levels;
  for (double a : e.family.holdout_alphas) {
    for (double n : hnoise) add(a, n, true);
  }
  return family;
}

void write_report_csv(const fs::path& path, const StabilityReport& report) {
  std::ofstream os(path);
  os << "id,gamma,error,modulus,fitted_C,branch\n";
  for (const auto& rec : report.records) {
    os << rec.id << ',' << fmt17(rec.gamma) << ',' << fmt17(rec.error) << ','
       << fmt17(rec.modulus) << ',' << fmt17(rec.fitted_C) << ',' << rec.branch << "\n";
  }
}

/// Minimal self-describing log-log scatter plot with the fitted modulus
/// overlay curve.
void write_report_svg(const fs::path& path, const StabilityReport& report,
                      const StabilitySchedule& sched, const std::string& title) {
  std::vector<std::pair<double, double>> pts;  // (log10 gamma, log10 error)
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& rec : report.records) {
    if (!(rec.gamma > 0) || !(rec.error > 0)) continue;
    const double x = std::log10(rec.gamma);
    const double y = std::log10(rec.error);
    pts.emplace_back(x, y);
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (pts.empty()) {
    xmin = -1, xmax = 1, ymin = -1, ymax = 1;
  }
  // overlay: y = C * modulus(gamma)
  std::vector<std::pair<double, double>> curve;
  if (report.fitted_C > 0) {
    for (int i = 0; i <= 100; ++i) {
      const double lx = xmin - 0.5 + (xmax - xmin + 1.0) * i / 100.0;
      const double gamma = std::pow(10.0, lx);
      const double m = modulus_value(report.modulus, gamma, sched.n);
      if (!std::isfinite(m) || m <= 0) continue;
      const double ly = std::log10(report.fitted_C * m);
      curve.emplace_back(lx, ly);
      ymin = std::min(ymin, ly);
      ymax = std::max(ymax, ly);
    }
  }
  xmin -= 0.6;
  xmax += 0.6;
  ymin -= 0.4;
  ymax += 0.4;

  const double W = 640, H = 480, L = 70, B = 50;
  auto X = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - 20); };
  auto Y = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - B - 30); };

  std::ofstream os(path);
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
     << "</text>\n";
  os << "<line x1='" << L << "' y1='" << H - B << "' x2='" << W - 20 << "' y2='" << H - B
     << "' stroke='black'/>\n";
  os << "<line x1='" << L << "' y1='" << H - B << "' x2='" << L << "' y2='30' stroke='black'/>\n";
  os << "<text x='" << W / 2 << "' y='" << H - 12
     << "' text-anchor='middle' font-size='12'>log10 gamma (measurement gap)</text>\n";
  os << "<text x='18' y='" << H / 2
     << "' text-anchor='middle' font-size='12' transform='rotate(-90 18 " << H / 2
     << ")'>log10 error</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = xmin + (xmax - xmin) * i / 4.0;
    const double y = ymin + (ymax - ymin) * i / 4.0;
    os << "<text x='" << X(x) << "' y='" << H - B + 16
       << "' text-anchor='middle' font-size='10'>" << fmt_short(x) << "</text>\n";
    os << "<text x='" << L - 8 << "' y='" << Y(y) + 4
       << "' text-anchor='end' font-size='10'>" << fmt_short(y) << "</text>\n";
  }
  if (!curve.empty()) {
    os << "<polyline fill='none' stroke='#888' stroke-dasharray='4 3' points='";
    for (const auto& [x, y] : curve) os << X(x) << ',' << Y(y) << ' ';
    os << "'/>\n";
    os << "<text x='" << W - 24 << "' y='40' text-anchor='end' font-size='11' fill='#555'>"
       << "C * modulus(gamma), C = " << fmt_short(report.fitted_C) << "</text>\n";
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const bool holdout = report.records[i].holdout;
    os << "<circle cx='" << X(pts[i].first) << "' cy='" << Y(pts[i].second)
       << "' r='4' fill='" << (holdout ? "#d62728" : "#1f77b4") << "'/>\n";
  }
  os << "<circle cx='" << W - 150 << "' cy='56' r='4' fill='#1f77b4'/>"
     << "<text x='" << W - 140 << "' y='60' font-size='11'>train</text>\n";
  os << "<circle cx='" << W - 150 << "' cy='72' r='4' fill='#d62728'/>"
     << "<text x='" << W - 140 << "' y='76' font-size='11'>holdout</text>\n";
  os << "</svg>\n";
}

json schedule_json(const StabilitySchedule& s) {
  return json{{"n", s.n},
              {"m", s.m},
              {"tau", s.tau},
              {"mu1", s.mu1},
              {"weyl_c", s.weyl_c},
              {"mu", s.mu},
              {"kappa", s.kappa},
              {"rho", s.rho},
              {"theta", s.theta},
              {"gamma_star", s.gamma_star},
              {"eps_exponent", s.eps_exponent},
              {"kappa_reading", s.reading == KappaReading::mu1_inverse ? "mu1" : "mu"}};
}

json config_echo(const ExperimentConfig& cfg) {
  json domain{{"dimension", cfg.domain.dim},
              {"lengths", {cfg.domain.length[0], cfg.domain.length[1]}},
              {"grid_points", cfg.domain.grid_points},
              {"tau", cfg.domain.tau},
              {"dt", cfg.domain.dt}};
  json windows = json::array();
  for (const auto& w : cfg.domain.windows) {
    windows.push_back({{"edge", edge_name(w.edge)}, {"from", w.from}, {"to", w.to}});
  }
  domain["windows"] = windows;
  json exps = json::array();
  for (const auto& e : cfg.experiments) {
    exps.push_back({{"name", e.name},
                    {"problem", problem_name(e.problem)},
                    {"m", e.m},
                    {"K", e.K},
                    {"g", e.g_kind},
                    {"g_param", e.g_param},
                    {"family", e.family.kind},
                    {"alphas", e.family.alphas},
                    {"holdout_alphas", e.family.holdout_alphas},
                    {"noise_levels", e.family.noise_levels}});
  }
  return json{{"domain", domain},
              {"background",
               {{"kind", cfg.background.kind},
                {"value", cfg.background.value},
                {"seed", cfg.background.seed},
                {"bound", cfg.background.bound}}},
              {"schedule", {{"mu", cfg.schedule.mu}}},
              {"seed", cfg.seed},
              {"experiments", exps}};
}

}  // namespace

std::string build_id() { return INVLAB_BUILD_ID; }

RunOutcome run_experiments(const ExperimentConfig& cfg, const RunOverrides& overrides) {
  RunOutcome outcome;
  const auto t_start = std::chrono::steady_clock::now();

  ExperimentConfig run_cfg = cfg;
  if (overrides.seed) run_cfg.seed = *overrides.seed;
  if (overrides.out_dir) run_cfg.out_dir = *overrides.out_dir;
  if (overrides.jobs) run_cfg.jobs = *overrides.jobs;
  if (run_cfg.jobs > 0) set_default_jobs(run_cfg.jobs);

  if (run_cfg.experiments.empty()) {
    outcome.exit_code = kExitConfigError;
    outcome.messages.push_back("config declares no experiments");
    return outcome;
  }

  json manifest;
  manifest["build_id"] = build_id();
  manifest["config"] = config_echo(run_cfg);
  manifest["seed"] = run_cfg.seed;

  try {
    const fs::path out_dir(run_cfg.out_dir);
    fs::create_directories(out_dir);

    // One spec / background / eigensystem pair shared by all experiments;
    // kept at stable addresses (labs hold pointers into them).
    DomainSpec spec = run_cfg.domain;
    spec.validate();
    ScalarField q0 = make_background(run_cfg, spec);
    int K_max = 1;
    for (const auto& e : run_cfg.experiments) K_max = std::max(K_max, e.K);
    // the Weyl fit wants at least 10 modes
    const int K_eigen = std::max(K_max, std::min(10, spec.interior_count()));
    if (K_eigen < 10) {
      throw config_error("grid too small for the Weyl fit (needs 10 interior modes)");
    }
    EigenSystem es = eigensolve(DirichletOperator(spec, q0), K_eigen);
    weyl_fit(es);
    manifest["eigensystem"] = {{"K", es.K},
                               {"lambda_min", es.lambda[0]},
                               {"lambda_max", es.lambda[es.K - 1]},
                               {"weyl_c", es.weyl_c},
                               {"mu1", es.mu1},
                               {"gram_residual", es.gram_residual},
                               {"max_relative_residual", es.max_relative_residual}};

    // The observability rate in the schedule is non-constructive; report
    // the configured value next to an empirical fit over eigenfield probes.
    {
      std::vector<ScalarField> probe_fields;
      const int nfit = std::min(8, es.K);
      for (int k = 0; k < nfit; ++k) probe_fields.push_back(es.phi[static_cast<std::size_t>(k)]);
      probe_fields.push_back(random_mode_field(spec, 4, 1.0, mix_seed(run_cfg.seed, 77)));
      const std::vector<double> eps_grid = {1, 2, 4, 8, 16, 32, 64};
      const std::vector<double> rate_grid = {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
      RateFitResult fit =
          fit_wave_observability(spec, q0, probe_fields, eps_grid, rate_grid);
      manifest["observability_rate"] = {{"configured_mu", run_cfg.schedule.mu},
                                        {"fitted_mu", fit.rate_hat},
                                        {"fitted_C", fit.C_hat},
                                        {"rate_grid", fit.rate_grid},
                                        {"C_of_rate", fit.C_of_rate}};
    }

    std::map<std::pair<int, int>, PotentialLab> potential_labs;  // (family, K)
    auto get_potential_lab = [&](ProblemFamily fam, int K) -> const PotentialLab& {
      const auto key = std::make_pair(static_cast<int>(fam), K);
      auto it = potential_labs.find(key);
      if (it == potential_labs.end()) {
        it = potential_labs.emplace(key, PotentialLab::build(fam, spec, es, K, run_cfg.jobs))
                 .first;
      }
      return it->second;
    };

    json experiments_json = json::array();
    bool all_pass = true;

    for (const auto& e : run_cfg.experiments) {
      const auto t_exp = std::chrono::steady_clock::now();
      const fs::path exp_dir = out_dir / e.name;
      fs::create_directories(exp_dir);

      const ProblemFamily fam = family_for(e.problem);
      StabilitySchedule sched =
          fam == ProblemFamily::wave
              ? StabilitySchedule::wave(spec.dim, e.m, spec.effective_tau(), es.mu1, es.weyl_c,
                                        run_cfg.schedule.mu, run_cfg.schedule.reading)
              : StabilitySchedule::heat(spec.dim, e.m, spec.effective_tau(), es.mu1, es.weyl_c,
                                        run_cfg.schedule.mu, run_cfg.schedule.reading);

      ScalarField base = base_perturbation(e, spec, es);
      std::vector<FamilyMember> family = make_family(e, base);

      StabilityReport report;
      const bool potential_kind =
          e.problem == ProblemKind::wave_potential || e.problem == ProblemKind::heat_potential;
      std::optional<SourceLab> slab;
      if (potential_kind) {
        const PotentialLab& lab = get_potential_lab(fam, e.K);
        report = run_stability_experiment(e.problem, family, &lab, nullptr, sched,
                                          mix_seed(run_cfg.seed, fnv1a(e.name)),
                                          run_cfg.jobs);
      } else {
        TimeSignal g = make_kernel_signal(e.g_kind, e.g_param, spec.dt, spec.time_steps());
        slab.emplace(SourceLab::build(fam, spec, es, e.K, q0, std::move(g), run_cfg.jobs));
        report = run_stability_experiment(e.problem, family, nullptr, &*slab, sched,
                                          mix_seed(run_cfg.seed, fnv1a(e.name)),
                                          run_cfg.jobs);
      }
      all_pass &= report.pass;

      write_report_csv(exp_dir / "report.csv", report);
      write_report_svg(exp_dir / "report.svg", report, sched,
                       e.name + " (" + problem_name(e.problem) + ")");

      if (run_cfg.write_traces && !family.empty()) {
        fs::create_directories(exp_dir / "traces");
        const FamilyMember& first = family.front();
        const std::uint64_t member_seed = mix_seed(
            mix_seed(run_cfg.seed, fnv1a(e.name)), 1000 + 0);
        BoundaryTrace tr;
        if (potential_kind) {
          const PotentialLab& lab = get_potential_lab(fam, e.K);
          ScalarField q = es.q0 + first.field;
          auto probes = lab.measure(q, first.noise_level, member_seed, run_cfg.jobs);
          tr = probes.front().difference;
        } else {
          tr = slab->measure(first.field, first.noise_level, member_seed);
        }
        std::ofstream os(exp_dir / "traces" / (first.id + ".csv"));
        tr.write_csv(os);
      }

      json ej;
      ej["name"] = e.name;
      ej["problem"] = problem_name(e.problem);
      ej["modulus"] = report.modulus == Modulus::Psi   ? "Psi"
                      : report.modulus == Modulus::Phi ? "Phi"
                                                       : "Theta";
      ej["fitted_C"] = report.fitted_C;
      ej["holdout_C"] = report.holdout_C;
      ej["pass"] = report.pass;
      ej["schedule"] = schedule_json(sched);
      ej["wall_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_exp).count();
      json recs = json::array();
      for (const auto& rec : report.records) {
        recs.push_back({{"id", rec.id},
                        {"gamma", rec.gamma},
                        {"error", rec.error},
                        {"modulus", std::isfinite(rec.modulus) ? rec.modulus : -1.0},
                        {"branch", rec.branch},
                        {"holdout", rec.holdout},
                        {"recon_rel_error", rec.recon_rel_error}});
      }
      ej["records"] = recs;
      experiments_json.push_back(std::move(ej));

      outcome.messages.push_back("experiment " + e.name + ": fitted_C = " +
                                 fmt_short(report.fitted_C) + ", holdout_C = " +
                                 fmt_short(report.holdout_C) +
                                 (report.pass ? " [pass]" : " [FAIL]"));
    }

    manifest["experiments"] = experiments_json;
    manifest["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    manifest["status"] = all_pass ? "ok" : "fit-validation-failed";
    std::ofstream mf(out_dir / "manifest.json");
    mf << manifest.dump(2) << "\n";

    outcome.exit_code = all_pass ? kExitOk : kExitAcceptanceError;
  } catch (const config_error& err) {
    outcome.exit_code = kExitConfigError;
    outcome.messages.push_back(err.what());
  } catch (const std::exception& err) {
    outcome.exit_code = kExitNumericalError;
    outcome.messages.push_back(err.what());
    // flag the partial outputs
    try {
      manifest["status"] = std::string("failed: ") + err.what();
      std::ofstream mf(fs::path(run_cfg.out_dir) / "manifest.json");
      mf << manifest.dump(2) << "\n";
    } catch (...) {
    }
  }
  return outcome;
}

}  // namespace invlab
