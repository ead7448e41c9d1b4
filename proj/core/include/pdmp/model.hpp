#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>

#include "pdmp/rng.hpp"
#include "pdmp/state.hpp"

namespace pdmp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Interjump {
  double time = 0.0;
  bool boundary = false;
};

using FlowFn = std::function<State(const State&, double)>;
using RateFn = std::function<double(const State&)>;
using KernelSamplerFn = std::function<State(const State&, CounterRng&)>;
using KernelDensityFn = std::function<double(const State& pre_jump, const State& y)>;
using DomainFn = std::function<bool(const State&)>;
using ExitTimeFn = std::function<double(const State&)>;
// sup of the rate along Φ(x, [0, horizon]).
using RateBoundFn = std::function<double(const State&, double horizon)>;
// Deterministic inversion: time at which the cumulative hazard from x reaches
// the given exponential level, truncated at t+(x).
using HazardInverseFn = std::function<Interjump(const State&, double level)>;
// Exact inf of t+ over the ball B(x, r).
using BallExitInfFn = std::function<double(const State&, double radius)>;

struct SolverOptions {
  double horizon = 1e6;
  // Relative tolerance on exit times.
  double exit_tolerance = 1e-10;
  // Relative tolerance on interarrival times found by hazard inversion.
  double hazard_tolerance = 1e-8;
  // Absolute tolerance of the adaptive Simpson hazard quadrature.
  double quadrature_tolerance = 1e-11;
  // Thinning window when t+ is infinite.
  double thinning_window = 1.0;
};

// Everything a model author supplies. Optional callbacks may be left empty.
struct ModelDefinition {
  std::string name;
  std::size_t dim = 0;
  FlowFn flow;
  RateFn rate;
  KernelSamplerFn kernel_sampler;
  DomainFn in_domain;

  KernelDensityFn kernel_density;
  ExitTimeFn exit_forward;
  ExitTimeFn exit_backward;
  RateBoundFn rate_bound;
  HazardInverseFn hazard_inverse;
  BallExitInfFn ball_exit_inf;
  SolverOptions solver;
};

// Local characteristics (flow, rate, kernel) of a PDMP on an open set E.
// Immutable once built; safe to share across threads if the callbacks are.
class PdmpModel {
 public:
  explicit PdmpModel(ModelDefinition def);

  const std::string& name() const noexcept { return def_.name; }
  std::size_t dim() const noexcept { return def_.dim; }
  const SolverOptions& solver() const noexcept { return def_.solver; }

  State flow(const State& x, double t) const { return def_.flow(x, t); }
  double rate(const State& x) const { return def_.rate(x); }
  bool in_domain(const State& x) const { return x.dim() == def_.dim && def_.in_domain(x); }
  State sample_kernel(const State& pre_jump, CounterRng& rng) const {
    return def_.kernel_sampler(pre_jump, rng);
  }

  bool has_kernel_density() const noexcept { return static_cast<bool>(def_.kernel_density); }
  double kernel_density(const State& pre_jump, const State& y) const;

  bool has_exit_forward() const noexcept { return static_cast<bool>(def_.exit_forward); }
  bool has_exit_backward() const noexcept { return static_cast<bool>(def_.exit_backward); }
  double analytic_exit_forward(const State& x) const { return def_.exit_forward(x); }
  double analytic_exit_backward(const State& x) const { return def_.exit_backward(x); }

  bool has_rate_bound() const noexcept { return static_cast<bool>(def_.rate_bound); }
  double rate_bound(const State& x, double horizon) const;

  bool has_hazard_inverse() const noexcept { return static_cast<bool>(def_.hazard_inverse); }
  Interjump hazard_inverse(const State& x, double level) const {
    return def_.hazard_inverse(x, level);
  }

  bool has_ball_exit_inf() const noexcept { return static_cast<bool>(def_.ball_exit_inf); }
  double ball_exit_inf(const State& x, double radius) const {
    return def_.ball_exit_inf(x, radius);
  }

  // Copy of the definition with a different solver configuration.
  PdmpModel with_solver(const SolverOptions& options) const;
  PdmpModel without_hazard_inverse() const;

 private:
  ModelDefinition def_;
};

}  // namespace pdmp
