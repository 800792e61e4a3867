#include "sirs/io.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sirs/errors.hpp"

namespace sirs::io {

namespace {

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    std::string_view field = line.substr(begin, comma == std::string_view::npos ? std::string_view::npos : comma - begin);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    out.emplace_back(field);
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
  return out;
}

std::string join(std::span<const std::string> parts) {
  std::string out;
  for (std::size_t j = 0; j < parts.size(); ++j) {
    if (j) out += ',';
    out += parts[j];
  }
  return out;
}

std::vector<std::string> quantile_columns(std::string_view prefix) {
  return {fmt::format("{}_q025", prefix), fmt::format("{}_q50", prefix), fmt::format("{}_q975", prefix)};
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return std::string(kMissing);
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

std::string format_optional(const std::optional<double>& x) {
  return x ? format_number(*x) : std::string(kMissing);
}

void CsvTable::fail(std::size_t r, const std::string& message) const {
  throw DataError(fmt::format("{}:{}: {}", path, r < lines.size() ? lines[r] : 0, message));
}

double CsvTable::number(std::size_t r, std::size_t c) const {
  const std::string& f = rows[r][c];
  double value = 0.0;
  const char* first = f.data();
  const char* last = f.data() + f.size();
  if (!f.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (f.empty() || ec != std::errc() || ptr != last || std::isnan(value)) {
    fail(r, fmt::format("column '{}': '{}' is not a number", header[c], f));
  }
  return value;
}

std::int64_t CsvTable::integer(std::size_t r, std::size_t c) const {
  const std::string& f = rows[r][c];
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
    // Accept integral values written in floating-point form, e.g. "12.0".
    const double d = number(r, c);
    if (d != std::floor(d) || std::abs(d) > 9.0e15) {
      fail(r, fmt::format("column '{}': '{}' is not an integer", header[c], f));
    }
    return static_cast<std::int64_t>(d);
  }
  return value;
}

CsvTable read_csv(const std::filesystem::path& path, std::span<const std::string> expected) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("{}: cannot open file", path.string()));
  CsvTable table;
  table.path = path.string();
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = split_fields(line);
    if (!have_header) {
      if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        fields = split_fields(std::string_view(line).substr(3));
      }
      table.header = std::move(fields);
      have_header = true;
      if (!expected.empty() && !std::equal(table.header.begin(), table.header.end(), expected.begin(), expected.end())) {
        throw DataError(fmt::format("{}:{}: expected header '{}', found '{}'", table.path, line_no, join(expected),
                                    join(table.header)));
      }
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError(fmt::format("{}:{}: expected {} fields, found {}", table.path, line_no, table.header.size(),
                                  fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.lines.push_back(line_no);
  }
  if (!have_header) throw DataError(fmt::format("{}: empty file, no header", table.path));
  return table;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  text_ = join(header);
  text_ += '\n';
}

void CsvWriter::row(std::span<const std::string> fields) {
  if (fields.size() != width_) {
    throw std::logic_error(fmt::format("csv row has {} fields, header has {}", fields.size(), width_));
  }
  text_ += join(fields);
  text_ += '\n';
}

void CsvWriter::row(std::initializer_list<std::string> fields) {
  row(std::span<const std::string>(fields.begin(), fields.size()));
}

void CsvWriter::save(const std::filesystem::path& path) const { write_text(path, text_); }

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("{}: cannot open for writing", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError(fmt::format("{}: write failed", path.string()));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("{}: cannot open file", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Observation> read_cases(const std::filesystem::path& path) {
  static const std::vector<std::string> header{"day", "count"};
  const CsvTable t = read_csv(path, header);
  std::vector<Observation> obs;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const Observation o{t.number(r, 0), t.integer(r, 1)};
    if (!std::isfinite(o.t)) t.fail(r, "day must be finite");
    if (o.y < 0) t.fail(r, fmt::format("count must be nonnegative, got {}", o.y));
    if (!obs.empty() && !(o.t > obs.back().t)) {
      t.fail(r, fmt::format("days must be strictly increasing ({} after {})", format_number(o.t),
                            format_number(obs.back().t)));
    }
    obs.push_back(o);
  }
  if (obs.empty()) throw DataError(fmt::format("{}: no observations", t.path));
  return obs;
}

void write_cases(const std::filesystem::path& path, std::span<const Observation> obs) {
  CsvWriter w({"day", "count"});
  for (const auto& o : obs) w.row({format_number(o.t), fmt::format("{}", o.y)});
  w.save(path);
}

std::vector<CovariateSample> read_covariates(const std::filesystem::path& path) {
  static const std::vector<std::string> header{"day", "source_id", "name", "value"};
  const CsvTable t = read_csv(path, header);
  std::vector<CovariateSample> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    CovariateSample s{t.number(r, 0), t.rows[r][1], t.rows[r][2], t.number(r, 3)};
    if (!std::isfinite(s.day) || !std::isfinite(s.value)) t.fail(r, "day and value must be finite");
    if (s.name.empty()) t.fail(r, "covariate name is empty");
    out.push_back(std::move(s));
  }
  if (out.empty()) throw DataError(fmt::format("{}: no covariate samples", t.path));
  return out;
}

void write_covariates(const std::filesystem::path& path, std::span<const CovariateSample> samples) {
  CsvWriter w({"day", "source_id", "name", "value"});
  for (const auto& s : samples) w.row({format_number(s.day), s.source_id, s.name, format_number(s.value)});
  w.save(path);
}

void write_hidden_path(const std::filesystem::path& path, std::span<const StatePoint> points, std::int64_t n_pop) {
  CsvWriter w({"day", "S", "I", "R"});
  for (const auto& p : points) {
    w.row({format_number(p.day), fmt::format("{}", p.state.s), fmt::format("{}", p.state.i),
           fmt::format("{}", p.state.recovered(n_pop))});
  }
  w.save(path);
}

void write_forcing(const std::filesystem::path& path, const DailyForcing& forcing) {
  CsvWriter w({"day", "alpha"});
  for (std::int64_t d = forcing.start_day(); d < forcing.end_day(); ++d) {
    w.row({fmt::format("{}", d), format_number(forcing.at_day(d))});
  }
  w.save(path);
}

std::vector<std::string> posterior_header(std::size_t n_alpha) {
  std::vector<std::string> h = transformed_names(n_alpha);
  for (auto& n : natural_names()) h.push_back(n);
  h.insert(h.end(), {"log_lik_hat", "S_T", "I_T"});
  return h;
}

void write_posterior(const std::filesystem::path& path, std::span<const PosteriorDraw> draws) {
  const std::size_t n_alpha = draws.empty() ? 1 : draws.front().theta.n_alpha();
  CsvWriter w(posterior_header(n_alpha));
  std::vector<std::string> fields;
  for (const auto& d : draws) {
    if (d.theta.n_alpha() != n_alpha) throw std::logic_error("posterior draws disagree on the forcing dimension");
    if (!d.natural) throw std::logic_error("posterior draw without natural parameters");
    fields.clear();
    for (double v : d.theta.values()) fields.push_back(format_number(v));
    const ModelParams& p = *d.natural;
    for (double v : {p.beta, p.gamma, p.mu, p.rho, p.phi_s, p.phi_i}) fields.push_back(format_number(v));
    fields.push_back(format_number(d.log_lik_hat));
    fields.push_back(fmt::format("{}", d.final_state.s));
    fields.push_back(fmt::format("{}", d.final_state.i));
    w.row(fields);
  }
  w.save(path);
}

std::vector<PosteriorDraw> read_posterior(const std::filesystem::path& path, std::int64_t n_pop) {
  const CsvTable t = read_csv(path);
  std::size_t n_alpha = 0;
  while (std::find(t.header.begin(), t.header.end(), fmt::format("alpha_{}", n_alpha)) != t.header.end()) ++n_alpha;
  if (n_alpha == 0) throw DataError(fmt::format("{}:1: no alpha_0 column in posterior header", t.path));
  const std::vector<std::string> expected = posterior_header(n_alpha);
  if (t.header != expected) {
    throw DataError(fmt::format("{}:1: expected header '{}', found '{}'", t.path, join(expected), join(t.header)));
  }
  const std::size_t n_theta = n_alpha + 6;
  std::vector<PosteriorDraw> draws;
  draws.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::vector<double> theta(n_theta);
    for (std::size_t c = 0; c < n_theta; ++c) theta[c] = t.number(r, c);
    PosteriorDraw d;
    d.theta = TransformedParams(theta, n_alpha);
    ModelParams p;
    p.beta = t.number(r, n_theta + 0);
    p.gamma = t.number(r, n_theta + 1);
    p.mu = t.number(r, n_theta + 2);
    p.rho = t.number(r, n_theta + 3);
    p.phi_s = t.number(r, n_theta + 4);
    p.phi_i = t.number(r, n_theta + 5);
    p.alpha.assign(theta.begin() + TransformedParams::kAlpha0,
                   theta.begin() + static_cast<std::ptrdiff_t>(TransformedParams::kAlpha0 + n_alpha));
    p.n_pop = n_pop;
    try {
      p.validate();
    } catch (const ConfigError& e) {
      t.fail(r, fmt::format("invalid parameters: {}", e.what()));
    }
    d.natural = p;
    d.log_lik_hat = t.number(r, n_theta + 6);
    d.final_state = {t.integer(r, n_theta + 7), t.integer(r, n_theta + 8)};
    if (!d.final_state.valid(n_pop)) {
      t.fail(r, fmt::format("final state ({}, {}) is outside a population of {}", d.final_state.s, d.final_state.i,
                            n_pop));
    }
    draws.push_back(std::move(d));
  }
  if (draws.empty()) throw DataError(fmt::format("{}: no posterior draws", t.path));
  return draws;
}

void write_prediction(const std::filesystem::path& path, const PredictionRun& run) {
  CsvWriter w({"day", "count", "probability"});
  for (std::size_t k = 0; k < run.times.size(); ++k) {
    for (const auto& [y, p] : run.counts[k]) {
      w.row({format_number(run.times[k]), fmt::format("{}", y), format_number(p)});
    }
  }
  w.save(path);
}

void write_hidden_quantiles(const std::filesystem::path& path, const PredictionRun& run) {
  CsvWriter w({"day", "s_q025", "s_q50", "s_q975", "i_q025", "i_q50", "i_q975"});
  for (const auto& h : run.hidden) {
    w.row({fmt::format("{}", h.day), format_number(h.s_fraction[0]), format_number(h.s_fraction[1]),
           format_number(h.s_fraction[2]), format_number(h.i_fraction[0]), format_number(h.i_fraction[1]),
           format_number(h.i_fraction[2])});
  }
  w.save(path);
}

void write_prediction_intervals(const std::filesystem::path& path, const PredictionRun& run) {
  const bool means = !run.mean_count_quantiles.empty();
  std::vector<std::string> header{"day", "q025", "q50", "q975"};
  if (means) {
    for (auto& c : quantile_columns("mean")) header.push_back(c);
  }
  CsvWriter w(header);
  std::vector<std::string> fields;
  for (std::size_t k = 0; k < run.times.size(); ++k) {
    fields = {format_number(run.times[k])};
    for (double q : run.count_quantiles[k]) fields.push_back(format_number(q));
    if (means) {
      for (double q : run.mean_count_quantiles[k]) fields.push_back(format_number(q));
    }
    w.row(fields);
  }
  w.save(path);
}

void write_residuals(const std::filesystem::path& path, std::span<const Residual> residuals) {
  CsvWriter w({"day", "observed", "expected", "sd", "residual"});
  for (const auto& r : residuals) {
    w.row({format_number(r.t), fmt::format("{}", r.observed), format_number(r.expected), format_number(r.sd),
           format_optional(r.value)});
  }
  w.save(path);
}

void write_ess(const std::filesystem::path& path, std::span<const NamedEss> rows) {
  CsvWriter w({"parameter", "ess", "flag"});
  for (const auto& r : rows) {
    if (!r.result) {
      w.row({r.parameter, std::string(kMissing), "too_short"});
      continue;
    }
    std::string flag = "ok";
    if (r.result->flag == EssFlag::kConstant) flag = "constant";
    if (r.result->flag == EssFlag::kClamped) flag = "clamped";
    w.row({r.parameter, format_number(r.result->ess), flag});
  }
  w.save(path);
}

void write_decomposition(const std::filesystem::path& path, std::span<const DecompositionDay> days) {
  std::vector<std::string> header{"day"};
  for (auto& c : quantile_columns("alpha")) header.push_back(c);
  for (auto& c : quantile_columns("beta_i")) header.push_back(c);
  CsvWriter w(header);
  for (const auto& d : days) {
    w.row({fmt::format("{}", d.day), format_number(d.alpha[0]), format_number(d.alpha[1]), format_number(d.alpha[2]),
           format_number(d.beta_i[0]), format_number(d.beta_i[1]), format_number(d.beta_i[2])});
  }
  w.save(path);
}

void write_baseline_coefficients(const std::filesystem::path& path, const QuasiPoissonFit& fit,
                                 std::span<const std::string> terms) {
  const Eigen::MatrixXd cov = fit.covariance();
  if (terms.size() != static_cast<std::size_t>(fit.coefficients.size())) {
    throw std::logic_error("one term name per coefficient expected");
  }
  CsvWriter w({"term", "estimate", "std_error"});
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    w.row({terms[j], format_number(fit.coefficients(jj)), format_number(std::sqrt(cov(jj, jj)))});
  }
  w.row({"dispersion", format_number(fit.dispersion), std::string(kMissing)});
  w.save(path);
}

void write_baseline_prediction(const std::filesystem::path& path, std::span<const double> days,
                               const QuasiPoissonPrediction& prediction) {
  CsvWriter w({"day", "mean", "lower", "upper"});
  for (std::size_t k = 0; k < days.size(); ++k) {
    w.row({format_number(days[k]), format_number(prediction.mean[k]), format_number(prediction.lower[k]),
           format_number(prediction.upper[k])});
  }
  w.save(path);
}

void write_phase_stats(const std::filesystem::path& path, const PipelineResult& result) {
  CsvWriter w({"phase", "iterations", "accepted", "acceptance_rate"});
  const std::pair<const char*, const PhaseStats*> phases[] = {
      {"burn_in", &result.burn_in_stats}, {"secondary", &result.secondary_stats}, {"final", &result.final_stats}};
  for (const auto& [name, s] : phases) {
    w.row({name, fmt::format("{}", s->iterations), fmt::format("{}", s->accepted), format_number(s->acceptance_rate())});
  }
  w.save(path);
}

}  // namespace sirs::io
