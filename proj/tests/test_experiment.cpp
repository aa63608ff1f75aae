#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "invlab/experiment.hpp"
#include "invlab/stability.hpp"
#include "test_support.hpp"

using namespace invlab;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

std::string minimal_config(const std::string& extra = "") {
  return R"([domain]
dimension = 2
lengths = [1.0, 1.0]
grid_points = 15
windows = ["bottom 0.25 0.75"]

[time]
tau = 0.5
dt = 0.002

[run]
seed = 7
out_dir = "out-test"

[experiment.tiny]
problem = "wave_potential"
m = 2.0
K = 4
family = "modes"
mode_indices = [1]
mode_coeffs = [1.0]
alphas = [0.1, 0.05]
holdout_alphas = [0.075]
noise_levels = [0.001]
)" + extra;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal config loads and echoes defaults") {
  ExperimentConfig cfg = load_config_text(minimal_config());
  CHECK(cfg.domain.grid_points == 15);
  CHECK(cfg.experiments.size() == 1);
  CHECK(cfg.experiments[0].problem == ProblemKind::wave_potential);
  CHECK(cfg.experiments[0].family.alphas.size() == 2);
}

TEST_CASE("cfl violation is reported by name") {
  std::string text = minimal_config();
  text.replace(text.find("dt = 0.002"), 10, "dt = 0.100");
  try {
    load_config_text(text);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("cfl") != std::string::npos);
  }
}

TEST_CASE("source kernel with g(0) = 0 is rejected with the hypothesis named") {
  std::string text = minimal_config();
  text.replace(text.find("problem = \"wave_potential\""), 26, "problem = \"wave_source\"   ");
  text += "\n";
  // append a sin kernel to the tiny experiment table
  text.replace(text.find("family = \"modes\""), 16, "g = \"sin\"\nfamily = \"modes\"");
  try {
    load_config_text(text);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("g(0) != 0") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected in strict mode, tolerated in lenient") {
  std::string text = minimal_config("mystery_knob = 3\n");
  CHECK_THROWS_AS(load_config_text(text, true), config_error);
  ExperimentConfig cfg = load_config_text(text, false);
  CHECK(cfg.experiments.size() == 1);
}

TEST_CASE("all violations are collected, not first-failure") {
  std::string text = minimal_config();
  text.replace(text.find("grid_points = 15"), 16, "grid_points = 2 ");
  text.replace(text.find("m = 2.0"), 7, "m = 0.0");
  try {
    load_config_text(text);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("N_g") != std::string::npos);
    CHECK(msg.find("m: must be > 0") != std::string::npos);
  }
}

TEST_CASE("noise injection: level zero is the identity, fixed seed reproduces") {
  DomainSpec spec = square_spec(9, 0.2, 1e-3);
  TraceLayout layout = make_trace_layout(spec);
  BoundaryTrace tr(spec, layout, spec.dt, spec.time_steps());
  tr.values.setConstant(2.0);

  BoundaryTrace same = inject_noise(tr, 0.0, 4);
  CHECK((same.values - tr.values).cwiseAbs().maxCoeff() == 0.0);

  BoundaryTrace n1 = inject_noise(tr, 0.1, 1234);
  BoundaryTrace n2 = inject_noise(tr, 0.1, 1234);
  CHECK((n1.values - n2.values).cwiseAbs().maxCoeff() == 0.0);
  BoundaryTrace n3 = inject_noise(tr, 0.1, 1235);
  CHECK((n1.values - n3.values).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("noise rms lands within 5% of the target at 10^4 samples") {
  DomainSpec spec = square_spec(9, 2.0, 1e-3);  // ~5 nodes x 2001 steps ~ 1e4
  TraceLayout layout = make_trace_layout(spec);
  BoundaryTrace tr(spec, layout, spec.dt, spec.time_steps());
  tr.values.setConstant(1.0);
  const double level = 0.05;
  BoundaryTrace noisy = inject_noise(tr, level, 99);
  const double rms = std::sqrt((noisy.values - tr.values).squaredNorm() /
                               static_cast<double>(tr.values.size()));
  CHECK(rel_err(rms, level * 1.0) < 0.05);
}

TEST_CASE("runner writes reports, traces, plots and a manifest") {
  ExperimentConfig cfg = load_config_text(minimal_config());
  const fs::path out = fs::temp_directory_path() / "invlab_test_run";
  fs::remove_all(out);
  RunOverrides ov;
  ov.out_dir = out.string();
  RunOutcome outcome = run_experiments(cfg, ov);
  CHECK(outcome.exit_code == kExitOk);
  CHECK(fs::exists(out / "tiny" / "report.csv"));
  CHECK(fs::exists(out / "tiny" / "report.svg"));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "tiny" / "traces"));

  const std::string csv = slurp(out / "tiny" / "report.csv");
  CHECK(csv.rfind("id,gamma,error,modulus,fitted_C,branch", 0) == 0);
  const std::string manifest = slurp(out / "manifest.json");
  CHECK(manifest.find("\"build_id\"") != std::string::npos);
  CHECK(manifest.find("\"gamma_star\"") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("reruns with the same seed produce byte-identical CSVs") {
  ExperimentConfig cfg = load_config_text(minimal_config());
  const fs::path out1 = fs::temp_directory_path() / "invlab_det_1";
  const fs::path out2 = fs::temp_directory_path() / "invlab_det_2";
  fs::remove_all(out1);
  fs::remove_all(out2);
  RunOverrides ov1, ov2;
  ov1.out_dir = out1.string();
  ov2.out_dir = out2.string();
  CHECK(run_experiments(cfg, ov1).exit_code == kExitOk);
  CHECK(run_experiments(cfg, ov2).exit_code == kExitOk);
  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(out1)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const fs::path rel = fs::relative(entry.path(), out1);
    CHECK(slurp(entry.path()) == slurp(out2 / rel));
    ++compared;
  }
  CHECK(compared >= 2);
  fs::remove_all(out1);
  fs::remove_all(out2);

  // a different seed changes the noisy records
  RunOverrides ov3;
  ov3.out_dir = out1.string();
  ov3.seed = 987654321;
  CHECK(run_experiments(cfg, ov3).exit_code == kExitOk);
  // compare first CSV against seed-7 run
  CHECK(run_experiments(cfg, ov2).exit_code == kExitOk);
  const std::string a = slurp(out1 / "tiny" / "report.csv");
  const std::string b = slurp(out2 / "tiny" / "report.csv");
  CHECK(a != b);
  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST_CASE("empty experiment list exits with a config error") {
  std::string text = minimal_config();
  const auto pos = text.find("[experiment.tiny]");
  text = text.substr(0, pos);
  ExperimentConfig cfg = load_config_text(text);
  RunOutcome outcome = run_experiments(cfg, {});
  CHECK(outcome.exit_code == kExitConfigError);
  REQUIRE(!outcome.messages.empty());
  CHECK(outcome.messages[0].find("no experiments") != std::string::npos);
}

TEST_CASE("trace CSV layout: time column then one column per node") {
  DomainSpec spec = square_spec(9, 0.01, 1e-3);
  TraceLayout layout = make_trace_layout(spec);
  BoundaryTrace tr(spec, layout, spec.dt, spec.time_steps());
  tr.values.setConstant(1.5);
  std::ostringstream os;
  tr.write_csv(os);
  std::istringstream in(os.str());
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("time,node_1", 0) == 0);
  std::string row;
  std::getline(in, row);
  CHECK(row.rfind("0,1.5", 0) == 0);
}
