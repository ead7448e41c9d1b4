#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdmp/bandwidth_cv.hpp"
#include "pdmp/estimators.hpp"
#include "pdmp/flow_geometry.hpp"
#include "pdmp/model.hpp"
#include "pdmp/selector.hpp"
#include "pdmp/simulation.hpp"

namespace pdmp {

struct FixedExponents {
  double alpha = 0.0;
  double beta = 0.0;
};

struct PipelineConfig {
  double v0 = 0.1;
  double w0 = 0.1;
  std::string kernel = "epanechnikov";
  // 0 picks a step giving at least 100 nodes.
  double curve_step = 0.0;
  double curve_cap = kInfinity;
  double rho = 0.01;     // tube radius for the survival criterion
  double rho_f = 0.1;    // tube radius for the joint-density criterion
  double rho2 = 0.1;     // time window for the joint-density criterion
  std::vector<double> alpha_grid = default_exponent_grid();
  std::vector<double> beta_grid = default_exponent_grid();
  // Skip cross-validation for G / F when set (beta unused for G).
  std::optional<double> fixed_alpha_G;
  std::optional<FixedExponents> fixed_F;
  bool strict_feasibility = false;
  // 0 uses the larger support radius of the two kernels.
  double delta = 0.0;
  unsigned jobs = 1;
  bool approximate_split = false;
};

struct PipelineResult {
  ReverseCurve curve;
  std::optional<CvReport> cv_G;
  std::optional<CvReport> cv_F;
  double alpha_G = 0.0;
  double alpha_F = 0.0;
  double beta_F = 0.0;
  SelectionReport selection;
  // Naive criterion nu-hat along the curve and its argmax.
  std::vector<double> nu_profile;
  std::size_t nu_argmax = 0;
  // F/G at every node with the tuned exponents.
  std::vector<double> lambda_profile;
  std::vector<std::string> warnings;
};

KernelPair pipeline_kernels(const PipelineConfig& config, std::size_t dim);
// Reverse curve at x with the configured step (or the default) and cap.
ReverseCurve pipeline_curve(const PdmpModel& model, const State& x, const PipelineConfig& config);

// Cross-validate the exponents, select the node and estimate the jump rate at x.
PipelineResult run_pipeline(const PdmpModel& model, std::shared_ptr<const EmbeddedChain> main,
                            std::shared_ptr<const EmbeddedChain> val, const State& x,
                            const PipelineConfig& config);

}  // namespace pdmp
