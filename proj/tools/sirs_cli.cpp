#include <CLI11.hpp>
#include <fmt/core.h>
#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "sirs/config.hpp"
#include "sirs/errors.hpp"
#include "sirs/pipelines.hpp"
#include "sirs/version.hpp"

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kNumerical = 4 };

struct Flags {
  std::string config;
  std::string out_dir = "out";
  std::optional<std::string> data, covariates, posterior;
  std::optional<double> cutoff_day;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_flags(CLI::App* cmd, Flags& f, bool rerun) {
  cmd->add_option("--config", f.config, rerun ? "Manifest written by an earlier run" : "Run configuration (INI)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", f.out_dir, "Directory for output files")->capture_default_str();
  cmd->add_option("--threads", f.threads, "Worker threads (results do not depend on this)")
      ->check(CLI::PositiveNumber);
  if (rerun) return;
  cmd->add_option("--data", f.data, "Case counts CSV (day,count)");
  cmd->add_option("--covariates", f.covariates, "Covariate samples CSV (day,source_id,name,value)");
  cmd->add_option("--posterior", f.posterior, "Posterior CSV written by fit");
  cmd->add_option("--cutoff-day", f.cutoff_day, "Last training day");
  cmd->add_option("--seed", f.seed, "Overrides [run] seed");
}

int run(sirs::Pipeline pipeline, const Flags& f) {
  sirs::RunConfig cfg = sirs::load_config(f.config);
  if (f.data) cfg.inputs.data = *f.data;
  if (f.covariates) cfg.inputs.covariates = *f.covariates;
  if (f.posterior) cfg.inputs.posterior = *f.posterior;
  if (f.cutoff_day) cfg.inputs.cutoff_day = *f.cutoff_day;
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) omp_set_num_threads(*f.threads);
  const auto report = sirs::execute(pipeline, cfg, f.out_dir, [](const std::string& msg) {
    fmt::print(stderr, "{}\n", msg);
  });
  for (const auto& file : report.files) fmt::print("{}\n", file.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hidden SIRS epidemic model: simulation, particle MCMC fitting and forecasting"};
  app.set_version_flag("--version", std::string(sirs::kVersion));
  app.require_subcommand(1);

  Flags flags;
  std::optional<sirs::Pipeline> chosen;
  bool rerun = false;
  const std::pair<sirs::Pipeline, const char*> commands[] = {
      {sirs::Pipeline::kSimulate, "Simulate hidden states and case counts"},
      {sirs::Pipeline::kFit, "Fit the model to case counts with particle MCMC"},
      {sirs::Pipeline::kPredict, "Forecast counts and hidden fractions after a cutoff"},
      {sirs::Pipeline::kDiagnose, "Residuals, effective sample sizes and transmission decomposition"},
      {sirs::Pipeline::kBaseline, "Lagged quasi-Poisson regression baseline"},
  };
  for (const auto& [pipeline, help] : commands) {
    CLI::App* cmd = app.add_subcommand(std::string(sirs::to_string(pipeline)), help);
    add_flags(cmd, flags, false);
    cmd->callback([&chosen, p = pipeline] { chosen = p; });
  }
  CLI::App* again = app.add_subcommand("rerun", "Repeat a run exactly from its manifest");
  add_flags(again, flags, true);
  again->callback([&rerun] { rerun = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (rerun) chosen = sirs::parse_pipeline(sirs::manifest_pipeline(flags.config));
    return run(*chosen, flags);
  } catch (const sirs::ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return kConfig;
  } catch (const sirs::DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kData;
  } catch (const sirs::NumericalError& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kData;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kOther;
  }
}
