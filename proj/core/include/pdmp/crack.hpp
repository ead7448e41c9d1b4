#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pdmp/estimators.hpp"
#include "pdmp/flow_geometry.hpp"
#include "pdmp/model.hpp"
#include "pdmp/rng.hpp"
#include "pdmp/simulation.hpp"

namespace pdmp {

// Lengths in mm, stress in MPa, stress intensity in MPa sqrt(mm), time in cycles.
struct CrackParams {
  double delta_sigma = 48.28;
  double omega = 152.0;
  double stress_ratio = 0.2;
  double a0 = 9.0;
  double a_final = 49.8;
  // log C = intercept + slope m + noise (natural log).
  double logC_intercept = -9.25;
  double logC_slope = -5.89;
  double logC_noise_sd = 0.0;
  // Truncated Gaussian law of the Paris exponent.
  double m_mean = 3.0;
  double m_sd = 0.15;
  double m_lo = 2.6;
  double m_hi = 3.4;
  // Fracture toughness of the accelerated regime.
  double Kc = 1800.0;
  // RK4 step in cycles for flow evaluation.
  double rk4_step = 250.0;
  // Quadrature step in mm for length-parametrized integrals.
  double length_step = 0.05;

  void validate() const;
};

double stress_intensity_range(const CrackParams& p, double a);
double paris_C(const CrackParams& p, double m);
// da/dN in the stable regime.
double paris_rate(const CrackParams& p, double a, double m, double C);
// da/dN in the accelerated regime.
double forman_rate(const CrackParams& p, double a, double m, double C);

// Length after `cycles` (negative runs backwards) by classical RK4.
double paris_flow_rk4(const CrackParams& p, double a0, double m, double C, double cycles,
                      double step);
double forman_flow_rk4(const CrackParams& p, double a0, double m, double C, double cycles,
                       double step);

// Cycles needed to grow from a_from to a_to under the Paris law.
double paris_time_to_length(const CrackParams& p, double m, double C, double a_from,
                            double a_to);

// Switch hazard per cycle as a function of the crack length.
using CrackRate = std::function<double(double a)>;
CrackRate default_crack_rate();

// One-dimensional model in the crack length for a given exponent m (C from the
// affine law). The regime switch is the jump; reaching a_final forces it; the
// next specimen restarts at a0.
PdmpModel build_crack(const CrackParams& p, double m, CrackRate rate);

struct CrackSwitch {
  std::string history_id;
  double m = 0.0;
  double a_switch = 0.0;
  bool censored = false;  // reached a_final without switching
};

struct CrackCurve {
  std::string history_id;
  std::vector<double> cycles;
  std::vector<double> a;
};

struct CrackDataset {
  std::vector<CrackSwitch> switches;
  std::vector<CrackCurve> curves;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return switches.size() + curves.size(); }
};

CrackDataset ingest_crack_histories(std::istream& in, double a_final = 49.8);
CrackDataset ingest_crack_histories(const std::string& path, double a_final = 49.8);
void write_crack_switches(std::ostream& out, std::span<const CrackSwitch> switches);

std::vector<CrackSwitch> generate_crack_histories(const CrackParams& p, const CrackRate& rate,
                                                  std::size_t n, CounterRng rng);

// Records (m_i, tau_{m_i}(a_switch_i)); censored histories are boundary records.
EmbeddedChain crack_switch_chain(const CrackParams& p, std::span<const CrackSwitch> switches);

// Nodes (m_j, tau_{m_j}(a)) ordered by time.
ReverseCurve crack_curve(const CrackParams& p, double a, std::span<const double> m_grid);

std::vector<double> crack_m_grid(const CrackParams& p, double step = 0.01);

struct CrackEstimate {
  double a = 0.0;
  std::vector<double> m;      // node exponents, time order
  std::vector<double> tau;
  std::vector<double> kappa;
  std::size_t best = 0;
  double m_star = 0.0;
  double tau_star = 0.0;
  double lambda_hat = 0.0;
  RawEstimate f_raw;
  RawEstimate g_raw;
};

struct CrackEstimatorConfig {
  double v0 = 0.1;
  double w0 = 3000.0;
  double alpha_G = 0.1;
  double alpha_F = 0.1;
  double beta_F = 0.1;
};

CrackEstimate estimate_crack_rate(const CrackParams& p,
                                  std::shared_ptr<const EmbeddedChain> chain, double a,
                                  std::span<const double> m_grid,
                                  const CrackEstimatorConfig& config);

}  // namespace pdmp
