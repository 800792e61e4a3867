#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sirs/covariates.hpp"
#include "sirs/diagnostics.hpp"
#include "sirs/forcing.hpp"
#include "sirs/forecast.hpp"
#include "sirs/model.hpp"
#include "sirs/observation.hpp"
#include "sirs/pmmh.hpp"
#include "sirs/quasi_poisson.hpp"

namespace sirs::io {

// Marker written in place of undefined values.
inline constexpr std::string_view kMissing = "NA";

// Shortest representation that parses back to the same double.
std::string format_number(double x);
std::string format_optional(const std::optional<double>& x);

// A parsed comma-separated file whose header matched exactly.
struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row

  // DataError prefixed with "path:line:" for row r.
  [[noreturn]] void fail(std::size_t r, const std::string& message) const;
  double number(std::size_t r, std::size_t c) const;
  std::int64_t integer(std::size_t r, std::size_t c) const;
};

// Reads `path` and requires the header to equal `expected` (when given).
// Blank lines are skipped; every row must have as many fields as the header.
CsvTable read_csv(const std::filesystem::path& path, std::span<const std::string> expected = {});

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(std::span<const std::string> fields);
  void row(std::initializer_list<std::string> fields);
  const std::string& text() const { return text_; }
  // Creates parent directories as needed.
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t width_;
  std::string text_;
};

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

// `day,count`
std::vector<Observation> read_cases(const std::filesystem::path& path);
void write_cases(const std::filesystem::path& path, std::span<const Observation> obs);

// `day,source_id,name,value`
std::vector<CovariateSample> read_covariates(const std::filesystem::path& path);
void write_covariates(const std::filesystem::path& path, std::span<const CovariateSample> samples);

// `day,S,I,R`
struct StatePoint {
  double day = 0.0;
  HiddenState state;
};
void write_hidden_path(const std::filesystem::path& path, std::span<const StatePoint> points, std::int64_t n_pop);

// `day,alpha`
void write_forcing(const std::filesystem::path& path, const DailyForcing& forcing);

// Transformed columns, natural columns, then `log_lik_hat,S_T,I_T`.
std::vector<std::string> posterior_header(std::size_t n_alpha);
void write_posterior(const std::filesystem::path& path, std::span<const PosteriorDraw> draws);
// Natural parameters are rebuilt from the natural columns plus the alpha
// columns; n_pop comes from the caller.
std::vector<PosteriorDraw> read_posterior(const std::filesystem::path& path, std::int64_t n_pop);

// `day,count,probability` (long format) and the hidden-fraction quantiles.
void write_prediction(const std::filesystem::path& path, const PredictionRun& run);
void write_hidden_quantiles(const std::filesystem::path& path, const PredictionRun& run);
// `day,q025,q50,q975` per observation time, plus the per-draw-mean
// quantiles when present.
void write_prediction_intervals(const std::filesystem::path& path, const PredictionRun& run);

// `day,observed,expected,sd,residual`
void write_residuals(const std::filesystem::path& path, std::span<const Residual> residuals);

struct NamedEss {
  std::string parameter;
  std::optional<EssResult> result;  // unset when the series is too short
};
// `parameter,ess,flag`
void write_ess(const std::filesystem::path& path, std::span<const NamedEss> rows);

// `day,alpha_q025,alpha_q50,alpha_q975,beta_i_q025,beta_i_q50,beta_i_q975`
void write_decomposition(const std::filesystem::path& path, std::span<const DecompositionDay> days);

// `term,estimate,std_error` plus a trailing `dispersion` row.
void write_baseline_coefficients(const std::filesystem::path& path, const QuasiPoissonFit& fit,
                                 std::span<const std::string> terms);
// `day,mean,lower,upper`
void write_baseline_prediction(const std::filesystem::path& path, std::span<const double> days,
                               const QuasiPoissonPrediction& prediction);

// `phase,iterations,accepted,acceptance_rate`
void write_phase_stats(const std::filesystem::path& path, const PipelineResult& result);

}  // namespace sirs::io
