#include <doctest.h>

#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "sirs/config.hpp"
#include "sirs/errors.hpp"
#include "sirs/io.hpp"
#include "sirs/pipelines.hpp"

using namespace sirs;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sirs_test_pipelines" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A small population so that fits take a fraction of a second.
const char* kSmall = R"(
[run]
seed = 7

[model]
n_pop = 600
beta = 2.5e-4
gamma = 0.1
mu = 0.004
rho = 0.1
alpha = -6 2.5
phi_s = 300
phi_i = 5

[prior]
log_beta = log(2.5e-4) 1
log_gamma = log(0.1) 0.09
logit_rho = logit(0.1) 1
alpha_0 = -6 2
alpha_1 = 2.5 2

[forcing]
mode = sinusoid
start_day = 0
end_day = 500

[schedule]
burn_in = 20
secondary = 40
final = 40
thin = 2
particles = 30

[simulate]
obs_end = 420

[predict]
horizon_days = 28
draws = 20

[diagnose]
residual_simulations = 50
decomposition_samples = 50
)";

std::vector<fs::path> data_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

void check_same_outputs(const fs::path& a, const fs::path& b) {
  const auto fa = data_files(a), fb = data_files(b);
  REQUIRE(fa.size() == fb.size());
  for (std::size_t k = 0; k < fa.size(); ++k) {
    CHECK(fa[k].filename() == fb[k].filename());
    CHECK(io::read_text(fa[k]) == io::read_text(fb[k]));
  }
}

}  // namespace

TEST_CASE("simulate writes seasonal data on the observation grid") {
  const auto dir = fresh_dir("simulate");
  const auto report = execute(Pipeline::kSimulate, parse_config(kSmall), dir);
  CHECK(report.files.back().filename() == "manifest.ini");
  const auto obs = io::read_cases(dir / "cases.csv");
  REQUIRE(obs.size() == 31);
  for (std::size_t k = 0; k < obs.size(); ++k) CHECK(obs[k].t == 14.0 * static_cast<double>(k));
  CHECK(io::read_text(dir / "hidden.csv").find("day,S,I,R\n0,") == 0);
}

TEST_CASE("pipelines rerun from their manifest byte for byte") {
  const auto base = fresh_dir("rerun");
  RunConfig cfg = parse_config(kSmall);
  execute(Pipeline::kSimulate, cfg, base / "sim");
  cfg.inputs.data = base / "sim" / "cases.csv";
  cfg.inputs.cutoff_day = 364;
  execute(Pipeline::kFit, cfg, base / "fit");

  const RunConfig again = load_config(base / "fit" / "manifest.ini");
  CHECK(manifest_pipeline(base / "fit" / "manifest.ini") == "fit");
  const int saved = omp_get_max_threads();
  omp_set_num_threads(3);
  execute(Pipeline::kFit, again, base / "fit_again");
  omp_set_num_threads(saved);
  check_same_outputs(base / "fit", base / "fit_again");

  cfg.inputs.posterior = base / "fit" / "posterior.csv";
  execute(Pipeline::kPredict, cfg, base / "predict");
  execute(Pipeline::kPredict, load_config(base / "predict" / "manifest.ini"), base / "predict_again");
  check_same_outputs(base / "predict", base / "predict_again");

  cfg.inputs.cutoff_day.reset();
  execute(Pipeline::kDiagnose, cfg, base / "diagnose");
  execute(Pipeline::kDiagnose, load_config(base / "diagnose" / "manifest.ini"), base / "diagnose_again");
  check_same_outputs(base / "diagnose", base / "diagnose_again");
  const std::string ess = io::read_text(base / "diagnose" / "ess.csv");
  CHECK(ess.find("log_mu,20,constant") != std::string::npos);
  CHECK(ess.find("nan") == std::string::npos);

  execute(Pipeline::kBaseline, cfg, base / "baseline");
  execute(Pipeline::kBaseline, load_config(base / "baseline" / "manifest.ini"), base / "baseline_again");
  check_same_outputs(base / "baseline", base / "baseline_again");
}

TEST_CASE("a zero-iteration schedule is an error, not empty output") {
  const auto dir = fresh_dir("zero");
  RunConfig cfg = parse_config(kSmall);
  execute(Pipeline::kSimulate, cfg, dir / "sim");
  cfg.inputs.data = dir / "sim" / "cases.csv";
  cfg.schedule.final_iters = 0;
  CHECK_THROWS_AS(execute(Pipeline::kFit, cfg, dir / "fit"), ConfigError);
  CHECK_FALSE(fs::exists(dir / "fit" / "posterior.csv"));
}

TEST_CASE("staggered cutoffs give one prediction file per cutoff") {
  const auto dir = fresh_dir("staggered");
  RunConfig cfg = parse_config(kSmall);
  execute(Pipeline::kSimulate, cfg, dir / "sim");
  cfg.inputs.data = dir / "sim" / "cases.csv";
  cfg.predict.cutoffs = {336, 364, 392};
  execute(Pipeline::kPredict, cfg, dir / "refit");
  for (const char* c : {"336", "364", "392"}) {
    CHECK(fs::exists(dir / "refit" / (std::string("prediction_") + c + ".csv")));
    CHECK(fs::exists(dir / "refit" / (std::string("hidden_quantiles_") + c + ".csv")));
    CHECK(fs::exists(dir / "refit" / (std::string("posterior_") + c + ".csv")));
  }
  const std::string check = io::read_text(dir / "refit" / "prediction_check.csv");
  CHECK(check.find("cutoff,day,observed,q025,q50,q975,covered\n336,350,") == 0);

  // One posterior serving all cutoffs through re-filtering.
  cfg.inputs.cutoff_day = 336;
  execute(Pipeline::kFit, cfg, dir / "fit");
  cfg.inputs.cutoff_day.reset();
  cfg.inputs.posterior = dir / "fit" / "posterior.csv";
  CHECK_THROWS_AS(execute(Pipeline::kPredict, cfg, dir / "no_refilter"), ConfigError);
  cfg.predict.refilter = true;
  execute(Pipeline::kPredict, cfg, dir / "refilter");
  for (const char* c : {"336", "364", "392"}) {
    CHECK(fs::exists(dir / "refilter" / (std::string("prediction_") + c + ".csv")));
  }
}

TEST_CASE("covariate forcing: lag limit and coverage errors") {
  const auto dir = fresh_dir("covariates");
  std::vector<CovariateSample> samples;
  for (int d = -40; d <= 400; d += 5) {
    samples.push_back({static_cast<double>(d), d % 2 ? "pond" : "river", "depth", 2.0 + std::sin(d / 58.0)});
    samples.push_back({static_cast<double>(d), "pond", "temp", 28.0 + std::cos(d / 58.0)});
  }
  io::write_covariates(dir / "cov.csv", samples);
  std::string text = kSmall;
  text.replace(text.find("mode = sinusoid"), 15, "mode = covariates\nkappa = 21");
  text.replace(text.find("end_day = 500"), 13, "end_day = 421");
  text.replace(text.find("alpha = -6 2.5"), 14, "alpha = -6 1 0.5");
  text.replace(text.find("alpha_1 = 2.5 2"), 15, "alpha_1 = 0 2\nalpha_2 = 0 2");
  RunConfig cfg = parse_config(text);
  cfg.inputs.covariates = dir / "cov.csv";
  execute(Pipeline::kSimulate, cfg, dir / "sim");
  cfg.inputs.data = dir / "sim" / "cases.csv";
  execute(Pipeline::kBaseline, cfg, dir / "baseline");
  CHECK(io::read_text(dir / "baseline" / "baseline_coefficients.csv").find("intercept,") != std::string::npos);

  cfg.inputs.cutoff_day = 336;
  execute(Pipeline::kFit, cfg, dir / "fit");
  cfg.inputs.posterior = dir / "fit" / "posterior.csv";
  try {
    execute(Pipeline::kPredict, cfg, dir / "predict");  // 28 days ahead, lag 21
    FAIL("expected the lag limit to stop the forecast");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("lag of 21 days") != std::string::npos);
  }
  cfg.predict.horizon_days = 21;
  execute(Pipeline::kPredict, cfg, dir / "predict");

  // Covariates starting too late for the lag: the error names the first missing day.
  std::vector<CovariateSample> late;
  for (const auto& s : samples) {
    if (s.day >= 0) late.push_back(s);
  }
  io::write_covariates(dir / "late.csv", late);
  cfg.inputs.covariates = dir / "late.csv";
  CHECK_THROWS_AS(execute(Pipeline::kBaseline, cfg, dir / "late"), DataError);
}

TEST_CASE("command line exit codes") {
  const auto dir = fresh_dir("cli");
  const std::string cli = SIRS_CLI_PATH;
  auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  io::write_text(dir / "ok.ini", kSmall);
  io::write_text(dir / "bad.ini", "[run]\nseed = 1\n[forcing]\nstart_day = 5\nend_day = 1\n");
  const std::string out = " --out-dir " + (dir / "out").string();
  CHECK(run("simulate --config " + (dir / "ok.ini").string() + out) == 0);
  CHECK(run("simulate --config " + (dir / "bad.ini").string() + out) == 2);
  CHECK(run("fit --config " + (dir / "ok.ini").string() + out) == 2);  // no --data
  io::write_text(dir / "broken.csv", "day,count\n0,1\n14,oops\n");
  CHECK(run("fit --config " + (dir / "ok.ini").string() + " --data " + (dir / "broken.csv").string() + out) == 3);
  // Start where the likelihood estimate is -inf on every try.
  io::write_text(dir / "dead.ini", std::string(kSmall) + "[init]\nrho = 1e-9\n");
  io::write_text(dir / "many.csv", "day,count\n0,50\n14,60\n");
  CHECK(run("fit --config " + (dir / "dead.ini").string() + " --data " + (dir / "many.csv").string() + out) == 4);
  CHECK(run("rerun --config " + (dir / "out" / "manifest.ini").string() + " --out-dir " +
            (dir / "out2").string()) == 0);
  CHECK(io::read_text(dir / "out" / "cases.csv") == io::read_text(dir / "out2" / "cases.csv"));
  CHECK(run("frobnicate") == 2);
}
