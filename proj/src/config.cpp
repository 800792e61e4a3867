#include "sirs/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sirs/errors.hpp"
#include "sirs/io.hpp"
#include "sirs/version.hpp"

namespace sirs {

namespace pt = boost::property_tree;

std::string_view to_string(ForcingMode mode) {
  switch (mode) {
    case ForcingMode::kSinusoid:
      return "sinusoid";
    case ForcingMode::kConstant:
      return "constant";
    case ForcingMode::kCovariates:
      return "covariates";
  }
  return "unknown";
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"run", {"seed"}},
      {"model", {"n_pop", "beta", "gamma", "mu", "rho", "alpha", "phi_s", "phi_i"}},
      {"init", {"beta", "gamma", "mu", "rho", "alpha", "phi_s", "phi_i"}},
      {"prior", {}},  // checked against the parameter names
      {"forcing", {"mode", "period_days", "start_day", "end_day", "kappa", "knot_spacing", "covariates"}},
      {"schedule", {"burn_in", "secondary", "final", "thin", "particles", "step_sd", "final_scale"}},
      {"sim", {"method", "tau_days", "critical_size", "max_tau_halvings"}},
      {"filter", {"resampling"}},
      {"simulate", {"obs_start", "obs_end", "obs_interval"}},
      {"predict", {"cutoffs", "horizon_days", "draws", "replicates", "per_draw_means", "respect_lag", "refilter"}},
      {"diagnose", {"residual_simulations", "residual_method", "decomposition_samples"}},
      {"baseline", {"cutoff"}},
      {"inputs", {"data", "covariates", "posterior", "cutoff_day"}},
      {"manifest", {"pipeline", "version"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::string origin) : tree_(tree), origin_(std::move(origin)) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto s = tree_.get_child_optional(section);
    if (!s) return std::nullopt;
    const auto v = s->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    std::string out = *v;
    const auto b = out.find_first_not_of(" \t");
    const auto e = out.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : out.substr(b, e - b + 1);
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& message) const {
    throw ConfigError(fmt::format("{}: [{}] {}: {}", origin_, section, key, message));
  }

  double to_number(const std::string& section, const std::string& key, std::string token) const {
    auto wrapped = [&](std::string_view fn) -> std::optional<std::string> {
      if (token.size() > fn.size() + 2 && token.compare(0, fn.size(), fn) == 0 && token[fn.size()] == '(' &&
          token.back() == ')') {
        return token.substr(fn.size() + 1, token.size() - fn.size() - 2);
      }
      return std::nullopt;
    };
    if (auto inner = wrapped("logit")) return logit(to_number(section, key, *inner));
    if (auto inner = wrapped("log")) return std::log(to_number(section, key, *inner));
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (token.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
      fail(section, key, fmt::format("'{}' is not a finite number", token));
    }
    return value;
  }

  std::optional<double> number(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    return to_number(section, key, *v);
  }

  std::vector<double> numbers(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    const auto v = raw(section, key);
    if (!v) return out;
    std::istringstream in(*v);
    std::string tok;
    while (in >> tok) out.push_back(to_number(section, key, tok));
    return out;
  }

  std::vector<std::string> words(const std::string& section, const std::string& key) const {
    std::vector<std::string> out;
    const auto v = raw(section, key);
    if (!v) return out;
    std::istringstream in(*v);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  }

  std::optional<std::int64_t> integer(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), value);
    if (v->empty() || ec != std::errc() || ptr != v->data() + v->size()) {
      fail(section, key, fmt::format("'{}' is not an integer", *v));
    }
    return value;
  }

  std::optional<std::size_t> count(const std::string& section, const std::string& key) const {
    const auto v = integer(section, key);
    if (!v) return std::nullopt;
    if (*v < 0) fail(section, key, "must be nonnegative");
    return static_cast<std::size_t>(*v);
  }

  std::optional<bool> boolean(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    if (*v == "true" || *v == "yes" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "0") return false;
    fail(section, key, fmt::format("'{}' is not a boolean", *v));
  }

  const std::string& origin() const { return origin_; }

 private:
  const pt::ptree& tree_;
  std::string origin_;
};

template <class T>
void assign(T& target, const std::optional<T>& value) {
  if (value) target = *value;
}

void read_params(const Reader& r, const std::string& section, ModelParams& p) {
  assign(p.beta, r.number(section, "beta"));
  assign(p.gamma, r.number(section, "gamma"));
  assign(p.mu, r.number(section, "mu"));
  assign(p.rho, r.number(section, "rho"));
  assign(p.phi_s, r.number(section, "phi_s"));
  assign(p.phi_i, r.number(section, "phi_i"));
  if (r.raw(section, "alpha")) p.alpha = r.numbers(section, "alpha");
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (j) out += ' ';
    out += io::format_number(v[j]);
  }
  return out;
}

std::string join_words(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (j) out += ' ';
    out += v[j];
  }
  return out;
}

void params_ini(std::string& out, const ModelParams& p, bool with_n) {
  if (with_n) out += fmt::format("n_pop = {}\n", p.n_pop);
  out += fmt::format("beta = {}\ngamma = {}\nmu = {}\nrho = {}\nalpha = {}\nphi_s = {}\nphi_i = {}\n",
                     io::format_number(p.beta), io::format_number(p.gamma), io::format_number(p.mu),
                     io::format_number(p.rho), join_numbers(p.alpha), io::format_number(p.phi_s),
                     io::format_number(p.phi_i));
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", origin, e.line(), e.message()));
  }
  const Reader r(tree, origin);

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(fmt::format("{}: key '{}' outside any section", origin, section));
    }
    const auto known = known_keys().find(section);
    if (known == known_keys().end()) throw ConfigError(fmt::format("{}: unknown section [{}]", origin, section));
    if (section == "prior") continue;
    for (const auto& kv : body) {
      if (!known->second.count(kv.first)) r.fail(section, kv.first, "unknown key");
    }
  }

  RunConfig c;
  const auto seed = r.raw("run", "seed");
  if (!seed) throw ConfigError(fmt::format("{}: [run] seed is required", origin));
  {
    std::uint64_t s = 0;
    const auto [ptr, ec] = std::from_chars(seed->data(), seed->data() + seed->size(), s);
    if (seed->empty() || ec != std::errc() || ptr != seed->data() + seed->size()) {
      r.fail("run", "seed", fmt::format("'{}' is not an unsigned 64-bit integer", *seed));
    }
    c.seed = s;
  }

  // Defaults reproduce the seasonal simulation study.
  c.model.n_pop = 10000;
  c.model.beta = 1.25e-5;
  c.model.gamma = 0.1;
  c.model.mu = 0.0009;
  c.model.rho = 0.015;
  c.model.alpha = {-7.0, 3.5};
  c.model.phi_s = 2100.0;
  c.model.phi_i = 15.0;
  assign(c.model.n_pop, r.integer("model", "n_pop"));
  read_params(r, "model", c.model);
  if (tree.get_child_optional("init")) {
    ModelParams init = c.model;
    read_params(r, "init", init);
    c.init = init;
  }

  // Prior: one line per transformed component, "mean sd" or "fixed".
  const std::vector<std::string> names = transformed_names(c.model.alpha.size());
  if (const auto section = tree.get_child_optional("prior")) {
    for (const auto& kv : *section) {
      if (std::find(names.begin(), names.end(), kv.first) == names.end()) {
        r.fail("prior", kv.first, fmt::format("not a parameter (expected one of {})", join_words(names)));
      }
    }
  }
  c.prior.mean.assign(names.size(), 0.0);
  c.prior.sd.assign(names.size(), 1.0);
  c.prior.fixed.assign(names.size(), true);
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto words = r.words("prior", names[j]);
    if (words.empty() || (words.size() == 1 && words[0] == "fixed")) continue;
    if (words.size() != 2) r.fail("prior", names[j], "expected 'mean sd' or 'fixed'");
    c.prior.mean[j] = r.to_number("prior", names[j], words[0]);
    c.prior.sd[j] = r.to_number("prior", names[j], words[1]);
    c.prior.fixed[j] = false;
  }

  if (const auto mode = r.raw("forcing", "mode")) {
    if (*mode == "sinusoid") {
      c.forcing.mode = ForcingMode::kSinusoid;
    } else if (*mode == "constant") {
      c.forcing.mode = ForcingMode::kConstant;
    } else if (*mode == "covariates") {
      c.forcing.mode = ForcingMode::kCovariates;
    } else {
      r.fail("forcing", "mode", fmt::format("'{}' is not one of sinusoid, constant, covariates", *mode));
    }
  }
  assign(c.forcing.period_days, r.number("forcing", "period_days"));
  assign(c.forcing.start_day, r.integer("forcing", "start_day"));
  assign(c.forcing.end_day, r.integer("forcing", "end_day"));
  assign(c.forcing.kappa, r.integer("forcing", "kappa"));
  assign(c.forcing.knot_spacing, r.number("forcing", "knot_spacing"));
  c.forcing.covariates = r.words("forcing", "covariates");

  assign(c.schedule.burn_in_iters, r.count("schedule", "burn_in"));
  assign(c.schedule.secondary_iters, r.count("schedule", "secondary"));
  assign(c.schedule.final_iters, r.count("schedule", "final"));
  assign(c.schedule.thin, r.count("schedule", "thin"));
  assign(c.schedule.particles, r.count("schedule", "particles"));
  c.step_sds = r.numbers("schedule", "step_sd");
  c.final_scale = r.number("schedule", "final_scale");

  if (const auto m = r.raw("sim", "method")) {
    try {
      c.sim.method = parse_sim_method(*m);
    } catch (const ConfigError& e) {
      r.fail("sim", "method", e.what());
    }
  }
  assign(c.sim.tau_days, r.number("sim", "tau_days"));
  assign(c.sim.critical_size, r.integer("sim", "critical_size"));
  if (const auto h = r.integer("sim", "max_tau_halvings")) c.sim.max_tau_halvings = static_cast<int>(*h);

  if (const auto rs = r.raw("filter", "resampling")) {
    if (*rs == "multinomial") {
      c.resampling = Resampling::kMultinomial;
    } else if (*rs == "systematic") {
      c.resampling = Resampling::kSystematic;
    } else {
      r.fail("filter", "resampling", fmt::format("'{}' is not multinomial or systematic", *rs));
    }
  }

  c.simulate.obs_start = r.number("simulate", "obs_start");
  c.simulate.obs_end = r.number("simulate", "obs_end");
  assign(c.simulate.obs_interval, r.number("simulate", "obs_interval"));

  c.predict.cutoffs = r.numbers("predict", "cutoffs");
  assign(c.predict.horizon_days, r.number("predict", "horizon_days"));
  assign(c.predict.draws, r.count("predict", "draws"));
  assign(c.predict.replicates, r.count("predict", "replicates"));
  assign(c.predict.per_draw_means, r.boolean("predict", "per_draw_means"));
  assign(c.predict.respect_lag, r.boolean("predict", "respect_lag"));
  assign(c.predict.refilter, r.boolean("predict", "refilter"));

  assign(c.diagnose.residual_simulations, r.count("diagnose", "residual_simulations"));
  if (const auto m = r.raw("diagnose", "residual_method")) {
    try {
      c.diagnose.residual_method = parse_sim_method(*m);
    } catch (const ConfigError& e) {
      r.fail("diagnose", "residual_method", e.what());
    }
  }
  assign(c.diagnose.decomposition_samples, r.count("diagnose", "decomposition_samples"));

  c.baseline.cutoff = r.number("baseline", "cutoff");

  if (const auto v = r.raw("inputs", "data")) c.inputs.data = *v;
  if (const auto v = r.raw("inputs", "covariates")) c.inputs.covariates = *v;
  if (const auto v = r.raw("inputs", "posterior")) c.inputs.posterior = *v;
  c.inputs.cutoff_day = r.number("inputs", "cutoff_day");

  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void RunConfig::validate() const {
  try {
    model.validate();
    if (init) init->validate();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("[model]: {}", e.what()));
  }
  if (init && init->alpha.size() != model.alpha.size()) {
    throw ConfigError("[init] alpha must have as many coefficients as [model] alpha");
  }
  if (model.alpha.empty()) throw ConfigError("[model] alpha needs at least the intercept");
  prior.validate();
  sim.validate();
  if (forcing.end_day <= forcing.start_day) {
    throw ConfigError(fmt::format("[forcing] end_day ({}) must exceed start_day ({})", forcing.end_day,
                                  forcing.start_day));
  }
  if (forcing.kappa < 0) throw ConfigError(fmt::format("[forcing] kappa must be >= 0, got {}", forcing.kappa));
  if (!(forcing.period_days > 0.0)) throw ConfigError("[forcing] period_days must be positive");
  if (!(forcing.knot_spacing > 0.0)) throw ConfigError("[forcing] knot_spacing must be positive");
  const std::size_t expected_alpha = forcing.mode == ForcingMode::kSinusoid   ? 2
                                     : forcing.mode == ForcingMode::kConstant ? 1
                                                                              : 0;
  if (expected_alpha != 0 && model.alpha.size() != expected_alpha) {
    throw ConfigError(fmt::format("[model] alpha: {} forcing takes {} coefficients, got {}", to_string(forcing.mode),
                                  expected_alpha, model.alpha.size()));
  }
  if (forcing.mode == ForcingMode::kCovariates && !forcing.covariates.empty() &&
      model.alpha.size() != forcing.covariates.size() + 1) {
    throw ConfigError(fmt::format("[model] alpha: {} covariates take {} coefficients, got {}",
                                  forcing.covariates.size(), forcing.covariates.size() + 1, model.alpha.size()));
  }
  if (!(simulate.obs_interval > 0.0)) throw ConfigError("[simulate] obs_interval must be positive");
  if (!(predict.horizon_days >= 0.0)) throw ConfigError("[predict] horizon_days must be nonnegative");
  if (predict.draws == 0 || predict.replicates == 0) {
    throw ConfigError("[predict] draws and replicates must be at least 1");
  }
  for (std::size_t k = 1; k < predict.cutoffs.size(); ++k) {
    if (!(predict.cutoffs[k] > predict.cutoffs[k - 1])) {
      throw ConfigError("[predict] cutoffs must be strictly increasing");
    }
  }
  if (diagnose.residual_simulations < 2) throw ConfigError("[diagnose] residual_simulations must be at least 2");
  if (diagnose.decomposition_samples == 0) throw ConfigError("[diagnose] decomposition_samples must be at least 1");
  for (double s : step_sds) {
    if (!(s > 0.0)) throw ConfigError("[schedule] step_sd entries must be positive");
  }
  const std::size_t active = prior.active_dimension();
  if (!step_sds.empty() && step_sds.size() != 1 && step_sds.size() != active) {
    throw ConfigError(fmt::format("[schedule] step_sd needs 1 or {} values (one per free parameter), got {}", active,
                                  step_sds.size()));
  }
  if (final_scale && !(*final_scale > 0.0)) throw ConfigError("[schedule] final_scale must be positive");
}

std::string to_ini(const RunConfig& c) {
  std::string out;
  out += fmt::format("[run]\nseed = {}\n\n[model]\n", c.seed);
  params_ini(out, c.model, true);
  if (c.init) {
    out += "\n[init]\n";
    params_ini(out, *c.init, false);
  }
  out += "\n[prior]\n";
  const auto names = transformed_names(c.model.alpha.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (c.prior.is_fixed(j)) {
      out += fmt::format("{} = fixed\n", names[j]);
    } else {
      out += fmt::format("{} = {} {}\n", names[j], io::format_number(c.prior.mean[j]),
                         io::format_number(c.prior.sd[j]));
    }
  }
  out += fmt::format(
      "\n[forcing]\nmode = {}\nperiod_days = {}\nstart_day = {}\nend_day = {}\nkappa = {}\nknot_spacing = {}\n",
      to_string(c.forcing.mode), io::format_number(c.forcing.period_days), c.forcing.start_day, c.forcing.end_day,
      c.forcing.kappa, io::format_number(c.forcing.knot_spacing));
  if (!c.forcing.covariates.empty()) out += fmt::format("covariates = {}\n", join_words(c.forcing.covariates));
  out += fmt::format("\n[schedule]\nburn_in = {}\nsecondary = {}\nfinal = {}\nthin = {}\nparticles = {}\n",
                     c.schedule.burn_in_iters, c.schedule.secondary_iters, c.schedule.final_iters, c.schedule.thin,
                     c.schedule.particles);
  if (!c.step_sds.empty()) out += fmt::format("step_sd = {}\n", join_numbers(c.step_sds));
  if (c.final_scale) out += fmt::format("final_scale = {}\n", io::format_number(*c.final_scale));
  out += fmt::format("\n[sim]\nmethod = {}\ntau_days = {}\ncritical_size = {}\nmax_tau_halvings = {}\n",
                     to_string(c.sim.method), io::format_number(c.sim.tau_days), c.sim.critical_size,
                     c.sim.max_tau_halvings);
  out += fmt::format("\n[filter]\nresampling = {}\n",
                     c.resampling == Resampling::kSystematic ? "systematic" : "multinomial");
  out += "\n[simulate]\n";
  if (c.simulate.obs_start) out += fmt::format("obs_start = {}\n", io::format_number(*c.simulate.obs_start));
  if (c.simulate.obs_end) out += fmt::format("obs_end = {}\n", io::format_number(*c.simulate.obs_end));
  out += fmt::format("obs_interval = {}\n", io::format_number(c.simulate.obs_interval));
  out += "\n[predict]\n";
  if (!c.predict.cutoffs.empty()) out += fmt::format("cutoffs = {}\n", join_numbers(c.predict.cutoffs));
  out += fmt::format(
      "horizon_days = {}\ndraws = {}\nreplicates = {}\nper_draw_means = {}\nrespect_lag = {}\nrefilter = {}\n",
      io::format_number(c.predict.horizon_days), c.predict.draws, c.predict.replicates, c.predict.per_draw_means,
      c.predict.respect_lag, c.predict.refilter);
  out += fmt::format("\n[diagnose]\nresidual_simulations = {}\nresidual_method = {}\ndecomposition_samples = {}\n",
                     c.diagnose.residual_simulations, to_string(c.diagnose.residual_method),
                     c.diagnose.decomposition_samples);
  out += "\n[baseline]\n";
  if (c.baseline.cutoff) out += fmt::format("cutoff = {}\n", io::format_number(*c.baseline.cutoff));
  out += "\n[inputs]\n";
  if (c.inputs.data) out += fmt::format("data = {}\n", c.inputs.data->string());
  if (c.inputs.covariates) out += fmt::format("covariates = {}\n", c.inputs.covariates->string());
  if (c.inputs.posterior) out += fmt::format("posterior = {}\n", c.inputs.posterior->string());
  if (c.inputs.cutoff_day) out += fmt::format("cutoff_day = {}\n", io::format_number(*c.inputs.cutoff_day));
  return out;
}

std::string manifest_text(const RunConfig& config, const std::string& pipeline) {
  return fmt::format("[manifest]\npipeline = {}\nversion = {}\n\n{}", pipeline, kVersion, to_ini(config));
}

std::string manifest_pipeline(const std::filesystem::path& path) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", path.string(), e.line(), e.message()));
  }
  const auto p = tree.get_optional<std::string>("manifest.pipeline");
  if (!p) throw ConfigError(fmt::format("{}: not a manifest (no [manifest] pipeline)", path.string()));
  return *p;
}

}  // namespace sirs
