#include "pdmp/selector.hpp"

#include <cmath>
#include <stdexcept>

#include "pdmp/error.hpp"

namespace pdmp {

std::vector<bool> node_feasibility(const PdmpModel& model, const ReverseCurve& curve, double v0,
                                   double w0, double delta) {
  std::vector<bool> ok(curve.size());
  for (std::size_t j = 0; j < curve.size(); ++j) {
    const CurveNode& n = curve.node(j);
    ok[j] = check_initial_bandwidths(model, n.xi, n.tau, v0, w0, delta);
  }
  return ok;
}

std::size_t count_local_maxima(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n == 0) return 0;
  if (n == 1) return 1;
  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const bool above_left = j == 0 || v[j] > v[j - 1];
    const bool above_right = j + 1 == n || v[j] > v[j + 1];
    if (above_left && above_right) ++count;
  }
  return count;
}

SelectionReport select_xi_star(const ReverseCurve& curve, std::vector<double> kappa,
                               std::vector<bool> feasible, SelectionOptions options) {
  if (kappa.size() != curve.size()) {
    throw std::invalid_argument("criterion profile must have one value per curve node");
  }
  if (feasible.empty()) feasible.assign(curve.size(), true);
  if (feasible.size() != curve.size()) {
    throw std::invalid_argument("feasibility flags must have one value per curve node");
  }

  SelectionReport report;
  report.x = curve.base();
  report.nodes = curve.nodes();

  std::size_t best = curve.size();
  for (std::size_t j = 0; j < kappa.size(); ++j) {
    if (options.strict_feasibility && !feasible[j]) continue;
    if (best == curve.size() || kappa[j] > kappa[best]) best = j;
  }
  if (best == curve.size() || !(kappa[best] > 0.0)) {
    throw SelectionImpossible("the estimated criterion vanishes on every eligible curve node: "
                              "no data near the reverse curve of " + to_string(curve.base()));
  }

  report.xi_star_index = best;
  report.xi_star = curve.node(best).xi;
  report.tau_star = curve.node(best).tau;
  report.kappa_star = kappa[best];
  report.local_maxima = count_local_maxima(kappa);

  std::size_t infeasible = 0;
  for (bool ok : feasible) infeasible += ok ? 0 : 1;
  if (infeasible > 0) {
    report.flags.push_back(std::to_string(infeasible) + " of " + std::to_string(curve.size()) +
                           " nodes fail the initial-bandwidth check");
  }
  if (!feasible[best]) report.flags.push_back("selected node fails the initial-bandwidth check");
  if (report.local_maxima > 1) {
    report.flags.push_back("criterion has " + std::to_string(report.local_maxima) +
                           " local maxima");
  }
  report.kappa = std::move(kappa);
  report.feasible = std::move(feasible);
  return report;
}

double plugin_variance(double temporal_l2sq, double spatial_l2sq, std::size_t d, double alpha,
                       double beta, double lambda_hat, double kappa_hat) {
  if (!(kappa_hat > 0.0)) throw std::invalid_argument("plug-in variance needs a positive criterion");
  const double denom = (1.0 + alpha * static_cast<double>(d) + beta) * kappa_hat;
  return temporal_l2sq * spatial_l2sq * lambda_hat / denom;
}

double plugin_variance(const KernelPair& kernels, std::size_t d, double alpha, double beta,
                       double lambda_hat, double kappa_hat) {
  return plugin_variance(kernels.temporal.l2norm_sq(), kernels.spatial.l2norm_sq(), d, alpha,
                         beta, lambda_hat, kappa_hat);
}

double clt_scale(std::size_t n, std::size_t d, double alpha, double beta) {
  if (n == 0) throw std::invalid_argument("CLT scale needs n >= 1");
  const double rate = 1.0 - alpha * static_cast<double>(d) - beta;
  return std::pow(static_cast<double>(n), -0.5 * rate);
}

void attach_plugin_variance(SelectionReport& report, const KernelPair& kernels, std::size_t d,
                            double alpha, double beta, std::size_t n) {
  if (!(report.kappa_star > 0.0) || !std::isfinite(report.lambda_hat)) return;
  report.plugin_variance = plugin_variance(kernels, d, alpha, beta, report.lambda_hat,
                                           report.kappa_star);
  report.clt_scale = clt_scale(n, d, alpha, beta);
  report.standard_error = std::sqrt(report.plugin_variance) * report.clt_scale;
}

}  // namespace pdmp
