#include "pdmp/models.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pdmp/error.hpp"

namespace pdmp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Post-jump positions are kept this far inside the unit circle.
constexpr double kDiscInset = 1e-12;
// Positions closer than this to the circle only take inward headings.
constexpr double kRimBand = 1e-9;

double sample_gamma(CounterRng& rng, double shape) {
  std::gamma_distribution<double> gamma(shape, 1.0);
  return gamma(rng);
}

}  // namespace

double beta_pdf(double a, double b, double u) {
  if (!(u > 0.0) || !(u < 1.0)) return 0.0;
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  return std::exp(log_norm + (a - 1.0) * std::log(u) + (b - 1.0) * std::log1p(-u));
}

double sample_beta(CounterRng& rng, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("Beta parameters must be positive");
  while (true) {
    const double x = sample_gamma(rng, a);
    const double y = sample_gamma(rng, b);
    const double u = x / (x + y);
    if (u > 0.0 && u < 1.0) return u;
  }
}

PdmpModel build_tcp() {
  ModelDefinition def;
  def.name = "tcp";
  def.dim = 2;
  def.flow = [](const State& x, double t) { return State{x[0] + t, x[1]}; };
  def.rate = [](const State& x) { return std::max(0.0, x[0] + x[1]); };
  def.in_domain = [](const State& x) {
    return x[0] > 0.0 && x[0] < 1.0 && x[1] > 0.0 && x[1] < 1.0;
  };
  def.exit_forward = [](const State& x) { return 1.0 - x[0]; };
  def.exit_backward = [](const State& x) { return x[0]; };
  def.ball_exit_inf = [](const State& x, double r) { return 1.0 - (x[0] + r); };
  def.rate_bound = [](const State& x, double horizon) {
    return std::max(0.0, x[0] + x[1] + horizon);
  };
  def.hazard_inverse = [](const State& x, double level) -> Interjump {
    const double a = std::max(0.0, x[0] + x[1]);
    const double t_plus = 1.0 - x[0];
    const double t = level / (0.5 * (a + std::sqrt(a * a + 2.0 * level)));
    if (t >= t_plus) return {t_plus, true};
    return {t, false};
  };
  def.kernel_sampler = [](const State& pre, CounterRng& rng) {
    const double x1 = std::min(std::max(pre[0], 1e-12), 1.0);
    const double u = sample_beta(rng, 2.0, 2.0 / x1);
    const double v = sample_beta(rng, 2.0, 2.0);
    return State{u, v};
  };
  def.kernel_density = [](const State& pre, const State& y) {
    const double x1 = std::min(std::max(pre[0], 1e-12), 1.0);
    return beta_pdf(2.0, 2.0 / x1, y[0]) * beta_pdf(2.0, 2.0, y[1]);
  };
  return PdmpModel(std::move(def));
}

PdmpModel build_bacteria() { return build_bacteria(nullptr, 0.0); }

PdmpModel build_bacteria(RateField field, double field_bound) {
  ModelDefinition def;
  def.name = "bacteria";
  def.dim = 3;
  def.flow = [](const State& x, double t) {
    return State{x[0] + t * std::cos(x[2]), x[1] + t * std::sin(x[2]), x[2]};
  };
  def.in_domain = [](const State& x) {
    return x[0] * x[0] + x[1] * x[1] < 1.0 && x[2] >= 0.0 && x[2] < kTwoPi;
  };
  auto chord = [](const State& x, double sign) {
    const double b = sign * (x[0] * std::cos(x[2]) + x[1] * std::sin(x[2]));
    const double c = x[0] * x[0] + x[1] * x[1] - 1.0;
    return -b + std::sqrt(std::max(0.0, b * b - c));
  };
  def.exit_forward = [chord](const State& x) { return chord(x, 1.0); };
  def.exit_backward = [chord](const State& x) { return chord(x, -1.0); };
  def.kernel_sampler = [](const State& pre, CounterRng& rng) {
    double p1 = pre[0];
    double p2 = pre[1];
    const double r = std::hypot(p1, p2);
    if (r > 1.0 - kDiscInset) {
      const double scale = (1.0 - kDiscInset) / r;
      p1 *= scale;
      p2 *= scale;
    }
    const bool on_rim = r > 1.0 - kRimBand;
    while (true) {
      const double heading = kTwoPi * rng.uniform();
      if (heading >= kTwoPi) continue;
      if (on_rim && p1 * std::cos(heading) + p2 * std::sin(heading) >= 0.0) continue;
      return State{p1, p2, heading};
    }
  };

  if (!field) {
    def.name = "bacteria";
    def.rate = [](const State&) { return 1.0; };
    def.rate_bound = [](const State&, double) { return 1.0; };
    auto exit_fwd = def.exit_forward;
    def.hazard_inverse = [exit_fwd](const State& x, double level) -> Interjump {
      const double t_plus = exit_fwd(x);
      if (level >= t_plus) return {t_plus, true};
      return {level, false};
    };
  } else {
    def.rate = [field](const State& x) { return field(x[0], x[1]); };
    if (field_bound > 0.0) {
      def.rate_bound = [field_bound](const State&, double) { return field_bound; };
    }
  }
  return PdmpModel(std::move(def));
}

std::vector<double> bacteria_angle_grid(std::size_t count) {
  if (count == 0) throw std::invalid_argument("angle grid must be nonempty");
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) {
    grid[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(count);
  }
  return grid;
}

double aggregate_bacteria_lambda(std::span<const double> per_angle) {
  if (per_angle.empty()) throw std::invalid_argument("no per-angle estimates to aggregate");
  return std::accumulate(per_angle.begin(), per_angle.end(), 0.0) /
         static_cast<double>(per_angle.size());
}

std::vector<std::array<double, 2>> bacteria_targets() {
  return {{0.0, 0.0},  {-0.5, 0.0}, {-0.5, 0.5}, {-0.5, -0.5}, {0.0, 0.5},
          {0.0, -0.5}, {0.5, 0.0},  {0.5, 0.5},  {0.5, -0.5}};
}

BacteriaEstimate estimate_bacteria_rate(const PdmpModel& model,
                                        std::shared_ptr<const EmbeddedChain> main,
                                        std::shared_ptr<const EmbeddedChain> val,
                                        std::array<double, 2> position,
                                        const PipelineConfig& config, std::size_t angle_count) {
  BacteriaEstimate out;
  out.position = position;
  out.angles = bacteria_angle_grid(angle_count);
  for (double angle : out.angles) {
    const State x{position[0], position[1], angle};
    PipelineResult run = run_pipeline(model, main, val, x, config);
    out.per_angle.push_back(run.selection.lambda_hat);
    out.xi_star.push_back(run.selection.xi_star);
    out.runs.push_back(std::move(run));
  }
  out.aggregated = aggregate_bacteria_lambda(out.per_angle);
  return out;
}

PdmpModel build_oracle(const OracleSpec& spec) {
  if (spec.dim == 0 || spec.dim > kMaxDim) throw std::invalid_argument("oracle dimension out of range");
  if (!(spec.rate > 0.0)) throw std::invalid_argument("oracle rate must be positive");
  if (!(spec.beta_a > 0.0) || !(spec.beta_b > 0.0)) {
    throw std::invalid_argument("oracle Beta parameters must be positive");
  }
  ModelDefinition def;
  def.name = "oracle";
  def.dim = spec.dim;
  def.flow = [](const State& x, double t) {
    State y = x;
    y[0] += t;
    return y;
  };
  const double rate = spec.rate;
  def.rate = [rate](const State&) { return rate; };
  def.rate_bound = [rate](const State&, double) { return rate; };
  def.in_domain = [](const State& x) { return x.all_finite(); };
  def.exit_forward = [](const State&) { return kInfinity; };
  def.exit_backward = [](const State&) { return kInfinity; };
  def.ball_exit_inf = [](const State&, double) { return kInfinity; };
  def.hazard_inverse = [rate](const State&, double level) {
    return Interjump{level / rate, false};
  };
  def.kernel_sampler = [spec](const State&, CounterRng& rng) {
    State y(spec.dim);
    for (std::size_t k = 0; k < spec.dim; ++k) y[k] = sample_beta(rng, spec.beta_a, spec.beta_b);
    return y;
  };
  def.kernel_density = [spec](const State&, const State& y) { return oracle_density(spec, y); };
  return PdmpModel(std::move(def));
}

double oracle_density(const OracleSpec& spec, const State& x) {
  double q = 1.0;
  for (double c : x) q *= beta_pdf(spec.beta_a, spec.beta_b, c);
  return q;
}

double oracle_survival(const OracleSpec& spec, double t) { return std::exp(-spec.rate * t); }

double oracle_joint_density(const OracleSpec& spec, const State& x, double t) {
  return oracle_density(spec, x) * spec.rate * oracle_survival(spec, t);
}

double oracle_kappa(const OracleSpec& spec, const State& xi, double tau) {
  return oracle_density(spec, xi) * oracle_survival(spec, tau);
}

}  // namespace pdmp
