#include "pdmp/crack.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string_view>

#include "pdmp/error.hpp"
#include "pdmp/selector.hpp"

namespace pdmp {

namespace {

template <class G>
double simpson_panel(const G& g, double a, double b) {
  return (b - a) / 6.0 * (g(a) + 4.0 * g(0.5 * (a + b)) + g(b));
}

struct SwitchPoint {
  double cycles = 0.0;
  double a = 0.0;
  bool boundary = false;
};

// Marches the length from a_start in fixed panels, accumulating cycles and
// switch hazard until the hazard reaches `level` or the length reaches a_final.
SwitchPoint march_to_switch(const CrackParams& p, double m, double C, const CrackRate& rate,
                            double a_start, double level) {
  auto inv_speed = [&](double u) { return 1.0 / paris_rate(p, u, m, C); };
  auto hazard = [&](double u) { return rate(u) * inv_speed(u); };
  double a = a_start;
  double hazard_acc = 0.0;
  double cycles = 0.0;
  while (a < p.a_final) {
    const double b = std::min(a + p.length_step, p.a_final);
    const double dh = simpson_panel(hazard, a, b);
    if (hazard_acc + dh >= level) {
      double lo = a;
      double hi = b;
      double acc_lo = hazard_acc;
      for (int i = 0; i < 80 && hi - lo > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double part = simpson_panel(hazard, lo, mid);
        if (acc_lo + part >= level) {
          hi = mid;
        } else {
          lo = mid;
          acc_lo += part;
        }
      }
      const double a_switch = 0.5 * (lo + hi);
      return {cycles + simpson_panel(inv_speed, a, a_switch), a_switch, false};
    }
    hazard_acc += dh;
    cycles += simpson_panel(inv_speed, a, b);
    a = b;
  }
  return {cycles, p.a_final, true};
}

template <class Rate>
double rk4(double a, double cycles, double step, const Rate& rate) {
  if (cycles == 0.0) return a;
  if (!(step > 0.0)) throw std::invalid_argument("RK4 step must be positive");
  const auto n = static_cast<std::size_t>(std::ceil(std::abs(cycles) / step));
  const double h = cycles / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k1 = rate(a);
    const double k2 = rate(a + 0.5 * h * k1);
    const double k3 = rate(a + 0.5 * h * k2);
    const double k4 = rate(a + h * k3);
    a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(a)) throw NumericalFlowError("crack length diverged");
  }
  return a;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_field(std::string_view field, std::size_t line_no, const char* column) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() ||
      !std::isfinite(value)) {
    throw DataError("line " + std::to_string(line_no) + ": invalid " + column + " value '" +
                    std::string(field) + "'");
  }
  return value;
}

}  // namespace

void CrackParams::validate() const {
  if (!(delta_sigma > 0.0) || !(omega > 0.0)) throw std::invalid_argument("loading must be positive");
  if (!(a0 > 0.0) || !(a_final > a0) || !(a_final < 0.5 * omega)) {
    throw std::invalid_argument("need 0 < a0 < a_final < omega/2");
  }
  if (!(m_lo < m_hi) || !(m_sd > 0.0)) throw std::invalid_argument("invalid exponent band");
  if (!(rk4_step > 0.0) || !(length_step > 0.0)) throw std::invalid_argument("steps must be positive");
  if (!(logC_noise_sd >= 0.0)) throw std::invalid_argument("noise level must be nonnegative");
}

double stress_intensity_range(const CrackParams& p, double a) {
  if (!(a < 0.5 * p.omega)) {
    throw DomainError("crack length " + std::to_string(a) +
                      " reached the specimen half-width (stress intensity singularity)");
  }
  if (a <= 0.0) return 0.0;
  return p.delta_sigma * std::sqrt(std::numbers::pi * a / std::cos(std::numbers::pi * a / p.omega));
}

double paris_C(const CrackParams& p, double m) {
  return std::exp(p.logC_intercept + p.logC_slope * m);
}

double paris_rate(const CrackParams& p, double a, double m, double C) {
  return C * std::pow(stress_intensity_range(p, a), m);
}

double forman_rate(const CrackParams& p, double a, double m, double C) {
  const double dk = stress_intensity_range(p, a);
  const double gap = (1.0 - p.stress_ratio) * p.Kc - dk;
  if (!(gap > 0.0)) throw DomainError("stress intensity reached the fracture toughness");
  return C * std::pow(dk, m) / gap;
}

double paris_flow_rk4(const CrackParams& p, double a0, double m, double C, double cycles,
                      double step) {
  if (!(a0 < 0.5 * p.omega)) throw DomainError("initial crack length beyond omega/2");
  return rk4(a0, cycles, step, [&](double a) { return paris_rate(p, a, m, C); });
}

double forman_flow_rk4(const CrackParams& p, double a0, double m, double C, double cycles,
                       double step) {
  return rk4(a0, cycles, step, [&](double a) { return forman_rate(p, a, m, C); });
}

double paris_time_to_length(const CrackParams& p, double m, double C, double a_from,
                            double a_to) {
  if (a_to <= a_from) return 0.0;
  if (!(a_from > 0.0)) throw std::invalid_argument("crack lengths must be positive");
  auto inv_speed = [&](double u) { return 1.0 / paris_rate(p, u, m, C); };
  double cycles = 0.0;
  double a = a_from;
  while (a < a_to) {
    const double b = std::min(a + p.length_step, a_to);
    cycles += simpson_panel(inv_speed, a, b);
    a = b;
  }
  return cycles;
}

CrackRate default_crack_rate() {
  return [](double a) { return 2e-5 * std::pow(a / 30.0, 4.0); };
}

PdmpModel build_crack(const CrackParams& p, double m, CrackRate rate) {
  p.validate();
  if (m < p.m_lo || m > p.m_hi) {
    throw std::invalid_argument("Paris exponent " + std::to_string(m) + " outside [" +
                                std::to_string(p.m_lo) + ", " + std::to_string(p.m_hi) + "]");
  }
  if (!rate) rate = default_crack_rate();
  const double C = paris_C(p, m);
  ModelDefinition def;
  def.name = "crack";
  def.dim = 1;
  def.flow = [p, m, C](const State& x, double t) {
    return State{paris_flow_rk4(p, x[0], m, C, t, p.rk4_step)};
  };
  def.rate = [rate](const State& x) { return rate(x[0]); };
  def.in_domain = [p](const State& x) { return x[0] > 0.0 && x[0] < p.a_final; };
  def.exit_forward = [p, m, C](const State& x) {
    return paris_time_to_length(p, m, C, x[0], p.a_final);
  };
  // The length decays towards 0 without reaching it in finite time.
  def.exit_backward = [](const State&) { return kInfinity; };
  def.ball_exit_inf = [p, m, C](const State& x, double r) {
    if (x[0] + r >= p.a_final) return 0.0;
    return paris_time_to_length(p, m, C, x[0] + r, p.a_final);
  };
  def.hazard_inverse = [p, m, C, rate](const State& x, double level) {
    const SwitchPoint sp = march_to_switch(p, m, C, rate, x[0], level);
    return Interjump{sp.cycles, sp.boundary};
  };
  def.kernel_sampler = [p](const State&, CounterRng&) { return State{p.a0}; };
  return PdmpModel(std::move(def));
}

CrackDataset ingest_crack_histories(std::istream& in, double a_final) {
  CrackDataset data;
  std::string line;
  std::size_t line_no = 0;
  std::string header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) {
      header = line;
      break;
    }
  }
  if (header.empty()) {
    data.warnings.push_back("crack history file is empty");
    return data;
  }
  const bool switch_mode = header == "history_id,m,a_switch_mm";
  const bool curve_mode = header == "history_id,cycle,a_mm";
  if (!switch_mode && !curve_mode) {
    throw DataError("line " + std::to_string(line_no) +
                    ": expected header history_id,m,a_switch_mm or history_id,cycle,a_mm");
  }
  std::map<std::string, std::size_t> curve_slot;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3) {
      throw DataError("line " + std::to_string(line_no) + ": expected 3 fields, found " +
                      std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw DataError("line " + std::to_string(line_no) + ": empty history_id");
    const std::string id(fields[0]);
    if (switch_mode) {
      CrackSwitch rec;
      rec.history_id = id;
      rec.m = parse_field(fields[1], line_no, "m");
      rec.a_switch = parse_field(fields[2], line_no, "a_switch_mm");
      if (!(rec.a_switch > 0.0)) {
        throw DataError("line " + std::to_string(line_no) + ": switch length must be positive");
      }
      rec.censored = rec.a_switch >= a_final - 1e-9;
      data.switches.push_back(rec);
    } else {
      const double cycle = parse_field(fields[1], line_no, "cycle");
      const double a = parse_field(fields[2], line_no, "a_mm");
      auto [it, inserted] = curve_slot.try_emplace(id, data.curves.size());
      if (inserted) data.curves.push_back(CrackCurve{id, {}, {}});
      CrackCurve& c = data.curves[it->second];
      if (!c.a.empty() && (!(a > c.a.back()) || !(cycle > c.cycles.back()))) {
        throw DataError("line " + std::to_string(line_no) + ": history '" + id +
                        "' is not monotone (crack length and cycle must increase)");
      }
      c.cycles.push_back(cycle);
      c.a.push_back(a);
    }
  }
  if (data.size() == 0) data.warnings.push_back("crack history file has no records");
  return data;
}

CrackDataset ingest_crack_histories(const std::string& path, double a_final) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open crack history file '" + path + "'");
  return ingest_crack_histories(in, a_final);
}

void write_crack_switches(std::ostream& out, std::span<const CrackSwitch> switches) {
  out << "history_id,m,a_switch_mm\n";
  for (const CrackSwitch& s : switches) {
    out << s.history_id << ',' << format_double(s.m) << ',' << format_double(s.a_switch) << '\n';
  }
}

std::vector<CrackSwitch> generate_crack_histories(const CrackParams& p, const CrackRate& rate,
                                                  std::size_t n, CounterRng rng) {
  p.validate();
  const CrackRate r = rate ? rate : default_crack_rate();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<CrackSwitch> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0;
    do {
      m = p.m_mean + p.m_sd * normal(rng);
    } while (m < p.m_lo || m > p.m_hi);
    const double noise = p.logC_noise_sd > 0.0 ? p.logC_noise_sd * normal(rng) : 0.0;
    const double C = paris_C(p, m) * std::exp(noise);
    const SwitchPoint sp = march_to_switch(p, m, C, r, p.a0, rng.exponential());
    out.push_back({"h" + std::to_string(i), m, sp.a, sp.boundary});
  }
  return out;
}

EmbeddedChain crack_switch_chain(const CrackParams& p, std::span<const CrackSwitch> switches) {
  EmbeddedChain chain;
  chain.dim = 1;
  chain.records.reserve(switches.size());
  for (const CrackSwitch& s : switches) {
    const double a_end = s.censored ? p.a_final : s.a_switch;
    chain.records.push_back(
        {State{s.m}, paris_time_to_length(p, s.m, paris_C(p, s.m), p.a0, a_end), s.censored});
  }
  return chain;
}

std::vector<double> crack_m_grid(const CrackParams& p, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("exponent grid step must be positive");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((p.m_hi - p.m_lo) / step + 1e-9));
  for (std::size_t j = 0; j <= count; ++j) grid.push_back(p.m_lo + step * static_cast<double>(j));
  return grid;
}

ReverseCurve crack_curve(const CrackParams& p, double a, std::span<const double> m_grid) {
  if (m_grid.empty()) throw std::invalid_argument("exponent grid is empty");
  if (!(a > p.a0) || !(a < p.a_final)) {
    throw std::invalid_argument("target length must lie in (a0, a_final)");
  }
  std::vector<CurveNode> nodes;
  nodes.reserve(m_grid.size());
  for (double m : m_grid) {
    nodes.push_back({State{m}, paris_time_to_length(p, m, paris_C(p, m), p.a0, a), 1.0});
  }
  std::sort(nodes.begin(), nodes.end(),
            [](const CurveNode& l, const CurveNode& r) { return l.tau < r.tau; });
  const double step = m_grid.size() > 1 ? std::abs(m_grid[1] - m_grid[0]) : 1.0;
  return ReverseCurve(State{a}, std::move(nodes), step, kInfinity);
}

CrackEstimate estimate_crack_rate(const CrackParams& p,
                                  std::shared_ptr<const EmbeddedChain> chain, double a,
                                  std::span<const double> m_grid,
                                  const CrackEstimatorConfig& config) {
  if (!chain || chain->empty()) throw std::invalid_argument("no crack histories");
  const ReverseCurve curve = crack_curve(p, a, m_grid);
  const KernelPair kernels = KernelPair::epanechnikov(1);
  const auto index = make_chain_index(chain, config.v0);
  const BatchEstimator g(index, {config.v0, config.w0, config.alpha_G, config.alpha_G, 1}, kernels);
  const BatchEstimator f(index, {config.v0, config.w0, config.alpha_F, config.beta_F, 1}, kernels);
  SelectionReport report = select_xi_star(curve, criterion_profile(g, curve));
  estimate_jump_rate(f, g, report);

  CrackEstimate est;
  est.a = a;
  for (const CurveNode& n : curve.nodes()) {
    est.m.push_back(n.xi[0]);
    est.tau.push_back(n.tau);
  }
  est.kappa = report.kappa;
  est.best = report.xi_star_index;
  est.m_star = report.xi_star[0];
  est.tau_star = report.tau_star;
  est.lambda_hat = report.lambda_hat;
  est.f_raw = report.f_raw;
  est.g_raw = report.g_raw;
  return est;
}

}  // namespace pdmp
