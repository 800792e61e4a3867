#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sirs/config.hpp"
#include "sirs/forcing.hpp"
#include "sirs/observation.hpp"
#include "sirs/pmmh.hpp"

namespace sirs {

enum class Pipeline { kSimulate, kFit, kPredict, kDiagnose, kBaseline };

std::string_view to_string(Pipeline p);
Pipeline parse_pipeline(std::string_view name);

using LogFn = std::function<void(const std::string&)>;

struct RunReport {
  std::vector<std::filesystem::path> files;  // written, manifest last
  std::vector<std::string> warnings;
};

// The forcing design for the configured window plus the names of its
// coefficients ("intercept" first).
struct ForcingSetup {
  ForcingDesign design;
  std::vector<std::string> terms;
  std::vector<std::string> warnings;
};

ForcingSetup make_forcing_setup(const RunConfig& config);

// Runs the chain on `obs` with the configured prior, schedule and filter.
PipelineResult fit_posterior(const RunConfig& config, const std::vector<Observation>& obs,
                             const ForcingDesign& design, const StreamKey& key);

// Runs one pipeline and writes its files plus `manifest.ini` into out_dir.
// Input paths are made absolute first so that the manifest can be rerun
// from any directory.
RunReport execute(Pipeline pipeline, RunConfig config, const std::filesystem::path& out_dir,
                  const LogFn& log = {});

}  // namespace sirs
