#include "pdmp/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

namespace pdmp {

namespace {

CvProblem make_problem(const PdmpModel& model, const std::shared_ptr<const ChainIndex>& index,
                       const std::shared_ptr<const EmbeddedChain>& val, const ReverseCurve& curve,
                       double radius, const KernelPair& kernels, const PipelineConfig& cfg,
                       std::vector<std::string>& warnings) {
  CvProblem problem = make_cv_problem(model, index, val, curve, radius, kernels, cfg.v0, cfg.w0);
  for (const std::string& w : problem.tube().warnings) warnings.push_back(w);
  return problem;
}

// The cross-validation integrals need a fine quadrature even when the
// selection grid is coarse.
ReverseCurve quadrature_curve(const PdmpModel& model, const ReverseCurve& curve,
                              const PipelineConfig& cfg) {
  const double fine = default_curve_step(model, curve.base(), cfg.curve_cap);
  if (curve.step() <= fine) return curve;
  return reverse_curve(model, curve.base(), fine, cfg.curve_cap);
}

}  // namespace

KernelPair pipeline_kernels(const PipelineConfig& cfg, std::size_t dim) {
  return {Kernel::by_name(cfg.kernel, dim), Kernel::by_name(cfg.kernel, 1)};
}

ReverseCurve pipeline_curve(const PdmpModel& model, const State& x, const PipelineConfig& cfg) {
  const double step =
      cfg.curve_step > 0.0 ? cfg.curve_step : default_curve_step(model, x, cfg.curve_cap);
  return reverse_curve(model, x, step, cfg.curve_cap);
}

PipelineResult run_pipeline(const PdmpModel& model, std::shared_ptr<const EmbeddedChain> main,
                            std::shared_ptr<const EmbeddedChain> val, const State& x,
                            const PipelineConfig& cfg) {
  if (!main || main->empty()) throw std::invalid_argument("pipeline needs a nonempty main chain");
  if (!(cfg.v0 > 0.0) || !(cfg.w0 > 0.0)) throw std::invalid_argument("v0 and w0 must be positive");
  const std::size_t d = model.dim();
  const KernelPair kernels = pipeline_kernels(cfg, d);
  const double delta = cfg.delta > 0.0 ? cfg.delta
                                       : std::max(kernels.spatial.support_radius(),
                                                  kernels.temporal.support_radius());

  std::vector<std::string> warnings;
  ReverseCurve curve = pipeline_curve(model, x, cfg);
  const ReverseCurve cv_curve = quadrature_curve(model, curve, cfg);
  const auto index = make_chain_index(main, cfg.v0);

  std::optional<CvReport> cv_G;
  double alpha_G = 0.0;
  if (cfg.fixed_alpha_G) {
    alpha_G = *cfg.fixed_alpha_G;
  } else {
    const CvProblem problem = make_problem(model, index, val, cv_curve, cfg.rho, kernels, cfg,
                                           warnings);
    cv_G = choose_alpha_G(problem, cfg.alpha_grid, cfg.jobs);
    cv_G->approximate_split = cfg.approximate_split;
    alpha_G = cv_G->chosen_alpha;
  }

  const BatchEstimator g(index, BandwidthSchedule{cfg.v0, cfg.w0, alpha_G, alpha_G, d}, kernels);
  std::vector<double> kappa(curve.size());
  std::vector<double> nu(curve.size());
  for (std::size_t j = 0; j < curve.size(); ++j) {
    const RawEstimate r = g.eval_raw(QueryPoint{curve.node(j).xi, curve.node(j).tau});
    kappa[j] = r.G;
    nu[j] = r.nu;
  }
  const std::size_t nu_argmax =
      static_cast<std::size_t>(std::max_element(nu.begin(), nu.end()) - nu.begin());
  SelectionReport selection =
      select_xi_star(curve, kappa, node_feasibility(model, curve, cfg.v0, cfg.w0, delta),
                     SelectionOptions{cfg.strict_feasibility});

  std::optional<CvReport> cv_F;
  FixedExponents f_exp;
  if (cfg.fixed_F) {
    f_exp = *cfg.fixed_F;
  } else {
    const CvProblem problem = make_problem(model, index, val, cv_curve, cfg.rho_f, kernels, cfg,
                                           warnings);
    cv_F = choose_alpha_beta_F(problem, cfg.alpha_grid, cfg.beta_grid, cfg.rho2, cfg.jobs);
    cv_F->approximate_split = cfg.approximate_split;
    f_exp = {cv_F->chosen_alpha, cv_F->chosen_beta};
  }

  const BatchEstimator f(index, BandwidthSchedule{cfg.v0, cfg.w0, f_exp.alpha, f_exp.beta, d},
                         kernels);
  estimate_jump_rate(f, g, selection);
  attach_plugin_variance(selection, kernels, d, f_exp.alpha, f_exp.beta, main->size());
  if (!admissible(f_exp.alpha, f_exp.beta, d)) {
    selection.flags.push_back("joint-density exponents lie outside the admissible set");
  }
  if (cfg.approximate_split) selection.flags.push_back("validation split from the main chain");

  std::vector<double> lambda_profile(curve.size());
  for (std::size_t j = 0; j < curve.size(); ++j) {
    const QueryPoint q{curve.node(j).xi, curve.node(j).tau};
    lambda_profile[j] = safe_ratio(f.eval_raw(q).F, kappa[j]);
  }

  return PipelineResult{std::move(curve), std::move(cv_G), std::move(cv_F), alpha_G,
                        f_exp.alpha, f_exp.beta, std::move(selection), std::move(nu), nu_argmax,
                        std::move(lambda_profile), std::move(warnings)};
}

}  // namespace pdmp
