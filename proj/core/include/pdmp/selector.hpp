#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pdmp/estimators.hpp"
#include "pdmp/flow_geometry.hpp"
#include "pdmp/model.hpp"

namespace pdmp {

struct SelectionOptions {
  // Exclude nodes failing the initial-bandwidth feasibility check.
  bool strict_feasibility = false;
};

struct SelectionReport {
  State x;
  std::vector<CurveNode> nodes;
  std::vector<double> kappa;
  std::vector<bool> feasible;
  std::size_t xi_star_index = 0;
  State xi_star;
  double tau_star = 0.0;
  double kappa_star = 0.0;
  std::size_t local_maxima = 0;

  // Filled by estimate_jump_rate.
  RawEstimate f_raw;  // from the estimator tuned for F
  RawEstimate g_raw;  // from the estimator tuned for G
  double lambda_hat = 0.0;
  bool infinite_estimate = false;

  // Filled by attach_plugin_variance.
  double plugin_variance = 0.0;
  double clt_scale = 0.0;
  double standard_error = 0.0;

  std::vector<std::string> flags;
};

// Raw G-sum at (xi_j, tau_j).
template <RawEstimator E>
double estimated_criterion(const E& g, const ReverseCurve& curve, std::size_t node) {
  const CurveNode& n = curve.node(node);
  return g.eval_raw(QueryPoint{n.xi, n.tau}).G;
}

template <RawEstimator E>
std::vector<double> criterion_profile(const E& g, const ReverseCurve& curve) {
  std::vector<double> kappa(curve.size());
  for (std::size_t j = 0; j < kappa.size(); ++j) kappa[j] = estimated_criterion(g, curve, j);
  return kappa;
}

// Initial-bandwidth feasibility at every (xi_j, tau_j).
std::vector<bool> node_feasibility(const PdmpModel& model, const ReverseCurve& curve, double v0,
                                   double w0, double delta);

// Strict local maxima (endpoints included) of a profile.
std::size_t count_local_maxima(std::span<const double> values);

// Argmax of kappa over eligible nodes; ties go to the smallest tau. Throws
// SelectionImpossible when every eligible value is zero.
SelectionReport select_xi_star(const ReverseCurve& curve, std::vector<double> kappa,
                               std::vector<bool> feasible = {}, SelectionOptions options = {});

// F(xi*, tau*) / G(xi*, tau*) with 0/0 = 0; an infinite ratio is flagged.
template <RawEstimator EF, RawEstimator EG>
double estimate_jump_rate(const EF& f, const EG& g, SelectionReport& report) {
  const QueryPoint q{report.xi_star, report.tau_star};
  report.f_raw = f.eval_raw(q);
  report.g_raw = g.eval_raw(q);
  report.lambda_hat = safe_ratio(report.f_raw.F, report.g_raw.G);
  report.infinite_estimate = report.g_raw.G == 0.0 && report.f_raw.F > 0.0;
  if (report.infinite_estimate) report.flags.push_back("infinite-estimate");
  return report.lambda_hat;
}

// tau_1^2 tau_d^2 lambda / ((1 + alpha d + beta) kappa).
double plugin_variance(const KernelPair& kernels, std::size_t d, double alpha, double beta,
                       double lambda_hat, double kappa_hat);
double plugin_variance(double temporal_l2sq, double spatial_l2sq, std::size_t d, double alpha,
                       double beta, double lambda_hat, double kappa_hat);

// n^{-(1 - alpha d - beta)/2}.
double clt_scale(std::size_t n, std::size_t d, double alpha, double beta);

void attach_plugin_variance(SelectionReport& report, const KernelPair& kernels, std::size_t d,
                            double alpha, double beta, std::size_t n);

}  // namespace pdmp
