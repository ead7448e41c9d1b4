#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pdmp/model.hpp"
#include "pdmp/pipeline.hpp"
#include "pdmp/rng.hpp"
#include "pdmp/state.hpp"

namespace pdmp {

double beta_pdf(double a, double b, double u);
// Draw in the open interval (0, 1).
double sample_beta(CounterRng& rng, double a, double b);

// TCP-like window process on (0,1)^2: drift along the first axis, rate x1 + x2,
// post-jump law Beta(2, 2/x1) x Beta(2, 2) from the pre-jump state.
PdmpModel build_tcp();

// Run-and-tumble bacteria in the unit disc; the third coordinate is the heading.
using RateField = std::function<double(double, double)>;
PdmpModel build_bacteria();
// field_bound > 0 enables thinning with that global bound.
PdmpModel build_bacteria(RateField field, double field_bound = 0.0);

// Headings k 2π/count, k = 0..count-1.
std::vector<double> bacteria_angle_grid(std::size_t count = 16);
// Mean over a uniform heading grid.
double aggregate_bacteria_lambda(std::span<const double> per_angle);
// The nine positions of the reference study.
std::vector<std::array<double, 2>> bacteria_targets();

struct BacteriaEstimate {
  std::array<double, 2> position{};
  std::vector<double> angles;
  std::vector<double> per_angle;
  std::vector<State> xi_star;  // selected upstream point per heading
  std::vector<PipelineResult> runs;
  double aggregated = 0.0;
};

BacteriaEstimate estimate_bacteria_rate(const PdmpModel& model,
                                        std::shared_ptr<const EmbeddedChain> main,
                                        std::shared_ptr<const EmbeddedChain> val,
                                        std::array<double, 2> position,
                                        const PipelineConfig& config,
                                        std::size_t angle_count = 16);

// x-free post-jump law (product Beta) and constant rate on E = R^d with a unit
// drift along the first axis; the post-jump locations are i.i.d.
struct OracleSpec {
  std::size_t dim = 1;
  double beta_a = 2.0;
  double beta_b = 2.0;
  double rate = 1.0;
};

PdmpModel build_oracle(const OracleSpec& spec = {});

// Invariant density of the post-jump locations (the Beta product density).
double oracle_density(const OracleSpec& spec, const State& x);
double oracle_survival(const OracleSpec& spec, double t);
// Joint density of (Z, S): q(x) rate e^{-rate t}.
double oracle_joint_density(const OracleSpec& spec, const State& x, double t);
// Criterion q(xi) e^{-rate tau}.
double oracle_kappa(const OracleSpec& spec, const State& xi, double tau);

}  // namespace pdmp
