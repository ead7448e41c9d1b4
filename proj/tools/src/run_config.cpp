#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pdmp/error.hpp"

namespace pdmp::cli {

using nlohmann::json;

namespace {

json optional_state(const std::optional<State>& s) {
  if (!s) return nullptr;
  return std::vector<double>(s->begin(), s->end());
}

json optional_string(const std::optional<std::string>& s) {
  return s ? json(*s) : json(nullptr);
}

json to_json(const RunConfig& c) {
  const CrackParams& p = c.crack_params;
  const PipelineConfig& q = c.pipeline;
  json targets = json::array();
  for (const auto& t : c.bacteria_targets) targets.push_back({t[0], t[1]});
  return {
      {"model",
       {{"name", c.model},
        {"oracle",
         {{"dim", c.oracle.dim},
          {"beta_a", c.oracle.beta_a},
          {"beta_b", c.oracle.beta_b},
          {"rate", c.oracle.rate}}},
        {"crack",
         {{"delta_sigma", p.delta_sigma},
          {"omega", p.omega},
          {"stress_ratio", p.stress_ratio},
          {"a0", p.a0},
          {"a_final", p.a_final},
          {"logC_intercept", p.logC_intercept},
          {"logC_slope", p.logC_slope},
          {"logC_noise_sd", p.logC_noise_sd},
          {"m_mean", p.m_mean},
          {"m_sd", p.m_sd},
          {"m_lo", p.m_lo},
          {"m_hi", p.m_hi},
          {"Kc", p.Kc},
          {"rk4_step", p.rk4_step},
          {"length_step", p.length_step},
          {"rate_scale", c.crack_rate.scale},
          {"rate_reference_mm", c.crack_rate.reference_mm},
          {"rate_power", c.crack_rate.power}}}}},
      {"seed", c.seed},
      {"n", c.n},
      {"n_val", c.n_val},
      {"x0", optional_state(c.x0)},
      {"target_x", optional_state(c.target_x)},
      {"kernel", q.kernel},
      {"v0", q.v0},
      {"w0", q.w0},
      {"delta", q.delta},
      {"curve_step", q.curve_step},
      {"curve_cap", std::isfinite(q.curve_cap) ? json(q.curve_cap) : json(nullptr)},
      {"rho", q.rho},
      {"rho_f", q.rho_f},
      {"rho2", q.rho2},
      {"alpha_grid", q.alpha_grid},
      {"beta_grid", q.beta_grid},
      {"fixed_alpha_G", q.fixed_alpha_G ? json(*q.fixed_alpha_G) : json(nullptr)},
      {"fixed_F", q.fixed_F ? json{{"alpha", q.fixed_F->alpha}, {"beta", q.fixed_F->beta}}
                            : json(nullptr)},
      {"strict_feasibility", q.strict_feasibility},
      {"jobs", q.jobs},
      {"replicates", c.replicates},
      {"output_dir", c.output_dir},
      {"estimate",
       {{"alpha", c.estimate.alpha},
        {"beta", c.estimate.beta},
        {"query_times", c.estimate.query_times}}},
      {"inputs",
       {{"chain_csv", optional_string(c.chain_csv)},
        {"validation_csv", optional_string(c.validation_csv)},
        {"crack_histories_csv", optional_string(c.crack_histories_csv)}}},
      {"nu_grid_points", c.nu_grid_points},
      {"bacteria", {{"angles", c.bacteria_angles}, {"targets", targets}}},
      {"crack",
       {{"targets_mm", c.crack.targets_mm},
        {"m_step", c.crack.m_step},
        {"v0", c.crack.estimator.v0},
        {"w0", c.crack.estimator.w0},
        {"alpha_G", c.crack.estimator.alpha_G},
        {"alpha_F", c.crack.estimator.alpha_F},
        {"beta_F", c.crack.estimator.beta_F}}},
  };
}

// Rejects keys absent from the defaults; values under a null default are free.
void check_keys(const json& user, const json& defaults, const std::string& path) {
  if (!user.is_object() || !defaults.is_object()) return;
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!defaults.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    const json& d = defaults.at(it.key());
    if (d.is_object()) {
      if (!it.value().is_object()) throw ConfigError("config key '" + key + "' must be an object");
      check_keys(it.value(), d, key);
    }
  }
}

void merge(json& base, const json& patch) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
      merge(base[it.key()], it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

std::optional<State> read_state(const json& j, const char* key) {
  if (j.is_null()) return std::nullopt;
  const auto v = j.get<std::vector<double>>();
  if (v.empty() || v.size() > kMaxDim) {
    throw ConfigError(std::string("config key '") + key + "' has an unsupported dimension");
  }
  return State::from_span(v);
}

std::optional<std::string> read_string(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

RunConfig from_json(const json& j) {
  RunConfig c;
  const json& m = j.at("model");
  c.model = m.at("name").get<std::string>();
  const json& o = m.at("oracle");
  c.oracle = {o.at("dim").get<std::size_t>(), o.at("beta_a").get<double>(),
              o.at("beta_b").get<double>(), o.at("rate").get<double>()};
  const json& k = m.at("crack");
  CrackParams& p = c.crack_params;
  p.delta_sigma = k.at("delta_sigma");
  p.omega = k.at("omega");
  p.stress_ratio = k.at("stress_ratio");
  p.a0 = k.at("a0");
  p.a_final = k.at("a_final");
  p.logC_intercept = k.at("logC_intercept");
  p.logC_slope = k.at("logC_slope");
  p.logC_noise_sd = k.at("logC_noise_sd");
  p.m_mean = k.at("m_mean");
  p.m_sd = k.at("m_sd");
  p.m_lo = k.at("m_lo");
  p.m_hi = k.at("m_hi");
  p.Kc = k.at("Kc");
  p.rk4_step = k.at("rk4_step");
  p.length_step = k.at("length_step");
  c.crack_rate = {k.at("rate_scale"), k.at("rate_reference_mm"), k.at("rate_power")};

  c.seed = j.at("seed").get<std::uint64_t>();
  c.n = j.at("n").get<std::size_t>();
  c.n_val = j.at("n_val").get<std::size_t>();
  c.x0 = read_state(j.at("x0"), "x0");
  c.target_x = read_state(j.at("target_x"), "target_x");

  PipelineConfig& q = c.pipeline;
  q.kernel = j.at("kernel").get<std::string>();
  q.v0 = j.at("v0");
  q.w0 = j.at("w0");
  q.delta = j.at("delta");
  q.curve_step = j.at("curve_step");
  q.curve_cap = j.at("curve_cap").is_null() ? kInfinity : j.at("curve_cap").get<double>();
  q.rho = j.at("rho");
  q.rho_f = j.at("rho_f");
  q.rho2 = j.at("rho2");
  q.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
  q.beta_grid = j.at("beta_grid").get<std::vector<double>>();
  if (!j.at("fixed_alpha_G").is_null()) q.fixed_alpha_G = j.at("fixed_alpha_G").get<double>();
  if (!j.at("fixed_F").is_null()) {
    q.fixed_F = FixedExponents{j.at("fixed_F").at("alpha"), j.at("fixed_F").at("beta")};
  }
  q.strict_feasibility = j.at("strict_feasibility");
  q.jobs = j.at("jobs").get<unsigned>();
  c.replicates = j.at("replicates").get<std::size_t>();
  c.output_dir = j.at("output_dir").get<std::string>();

  const json& e = j.at("estimate");
  c.estimate = {e.at("alpha"), e.at("beta"), e.at("query_times").get<std::vector<double>>()};

  const json& in = j.at("inputs");
  c.chain_csv = read_string(in.at("chain_csv"));
  c.validation_csv = read_string(in.at("validation_csv"));
  c.crack_histories_csv = read_string(in.at("crack_histories_csv"));

  c.nu_grid_points = j.at("nu_grid_points").get<std::size_t>();
  c.bacteria_angles = j.at("bacteria").at("angles").get<std::size_t>();
  c.bacteria_targets = j.at("bacteria").at("targets").get<std::vector<std::array<double, 2>>>();
  const json& s = j.at("crack");
  c.crack.targets_mm = s.at("targets_mm").get<std::vector<double>>();
  c.crack.m_step = s.at("m_step");
  c.crack.estimator = {s.at("v0"), s.at("w0"), s.at("alpha_G"), s.at("alpha_F"), s.at("beta_F")};
  return c;
}

void check_model(const RunConfig& c) {
  if (c.model != "tcp" && c.model != "bacteria" && c.model != "oracle" && c.model != "crack") {
    throw ConfigError("unknown model '" + c.model + "' (expected tcp, bacteria, oracle or crack)");
  }
  if (c.model == "oracle" && (c.oracle.dim == 0 || c.oracle.dim > kMaxDim)) {
    throw ConfigError("oracle dimension must lie in 1.." + std::to_string(kMaxDim));
  }
  const std::size_t d = c.dim();
  if (c.x0 && c.x0->dim() != d) throw ConfigError("x0 does not match the model dimension");
  if (c.target_x && c.target_x->dim() != d) {
    throw ConfigError("target_x does not match the model dimension");
  }
  if (c.replicates == 0) throw ConfigError("replicates must be at least 1");
  if (c.pipeline.jobs == 0) throw ConfigError("jobs must be at least 1");
}

}  // namespace

std::size_t RunConfig::dim() const {
  if (model == "tcp") return 2;
  if (model == "bacteria") return 3;
  if (model == "oracle") return oracle.dim;
  return 1;
}

State RunConfig::start_state() const {
  if (x0) return *x0;
  if (model == "tcp") return State{0.5, 0.5};
  if (model == "bacteria") return State{0.0, 0.0, 0.0};
  if (model == "crack") return State{crack_params.a0};
  State s(oracle.dim);
  for (std::size_t k = 0; k < s.dim(); ++k) s[k] = 0.5;
  return s;
}

State RunConfig::target_state() const {
  if (target_x) return *target_x;
  if (model == "tcp") return State{0.75, 0.5};
  if (model == "bacteria") return State{0.0, 0.0, 0.0};
  if (model == "crack") return State{crack.targets_mm.empty() ? 30.0 : crack.targets_mm.front()};
  State s(oracle.dim);
  for (std::size_t k = 0; k < s.dim(); ++k) s[k] = 0.5;
  s[0] = 0.9;
  return s;
}

// Per-model defaults applied below the user's values. The bacteria state is
// three-dimensional with a 2*pi angle range, so the generic bandwidths leave
// the kernel support nearly empty; the TCP study selects on a 0.05 grid.
static void apply_model_defaults(json& merged, const json& user) {
  std::string name = merged.at("model").at("name");
  if (const auto m = user.find("model"); m != user.end() && m->is_object() && m->contains("name")) {
    if (!m->at("name").is_string()) return;
    name = m->at("name");
  }
  if (name == "tcp") {
    merged["v0"] = 1.0;
    merged["w0"] = 1.0;
    merged["curve_step"] = 0.05;
  } else if (name == "bacteria") {
    merged["n"] = 50000;
    merged["n_val"] = 5000;
    merged["v0"] = 0.4;
    merged["w0"] = 0.4;
    merged["alpha_grid"] = {0.05, 0.1};
    merged["beta_grid"] = {0.1, 0.2};
  }
}

std::string default_config_json() { return to_json(RunConfig{}).dump(2); }

RunConfig parse_config(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  json merged = to_json(RunConfig{});
  check_keys(user, merged, "");
  apply_model_defaults(merged, user);
  merge(merged, user);
  RunConfig c;
  try {
    c = from_json(merged);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  check_model(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& config) { return to_json(config).dump(2); }

void validate_for_estimation(const RunConfig& c) {
  check_model(c);
  if (c.n == 0) throw ConfigError("n must be at least 1");
  if (c.pipeline.alpha_grid.empty() || c.pipeline.beta_grid.empty()) {
    throw ConfigError("exponent grids must be nonempty");
  }
  for (double a : c.pipeline.alpha_grid) {
    if (!(a > 0.0)) throw ConfigError("alpha_grid values must be positive");
  }
  for (double b : c.pipeline.beta_grid) {
    if (!(b > 0.0)) throw ConfigError("beta_grid values must be positive");
  }
  if (!(c.pipeline.v0 > 0.0) || !(c.pipeline.w0 > 0.0)) {
    throw ConfigError("v0 and w0 must be positive");
  }
  if (!(c.pipeline.rho > 0.0) || !(c.pipeline.rho_f > 0.0) || !(c.pipeline.rho2 > 0.0)) {
    throw ConfigError("tube radii rho, rho_f and rho2 must be positive");
  }
  if (c.pipeline.kernel != "epanechnikov" && c.pipeline.kernel != "uniform") {
    throw ConfigError("kernel must be epanechnikov or uniform");
  }
  if (c.model == "crack") {
    try {
      c.crack_params.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (c.crack.targets_mm.empty()) throw ConfigError("crack.targets_mm must be nonempty");
    if (!(c.crack.m_step > 0.0)) throw ConfigError("crack.m_step must be positive");
  }
}

CrackRate build_crack_rate(const CrackRateSpec& spec) {
  return [spec](double a) { return spec.scale * std::pow(a / spec.reference_mm, spec.power); };
}

PdmpModel build_model(const RunConfig& c) {
  if (c.model == "tcp") return build_tcp();
  if (c.model == "bacteria") return build_bacteria();
  if (c.model == "oracle") return build_oracle(c.oracle);
  if (c.model == "crack") {
    return build_crack(c.crack_params, c.crack_params.m_mean, build_crack_rate(c.crack_rate));
  }
  throw ConfigError("unknown model '" + c.model + "'");
}

}  // namespace pdmp::cli
