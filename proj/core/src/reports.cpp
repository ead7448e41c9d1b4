#include "pdmp/reports.hpp"

#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "pdmp/simulation.hpp"

namespace pdmp {

namespace {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json coords(const State& x) {
  json a = json::array();
  for (double v : x) a.push_back(number(v));
  return a;
}

json numbers(std::span<const double> values) {
  json a = json::array();
  for (double v : values) a.push_back(number(v));
  return a;
}

json raw(const RawEstimate& r) { return {{"F", number(r.F)}, {"G", number(r.G)}, {"nu", number(r.nu)}}; }

json selection(const SelectionReport& r) {
  json nodes = json::array();
  for (std::size_t j = 0; j < r.nodes.size(); ++j) {
    nodes.push_back({{"j", j},
                     {"tau", number(r.nodes[j].tau)},
                     {"xi", coords(r.nodes[j].xi)},
                     {"speed", number(r.nodes[j].speed)},
                     {"kappa", number(r.kappa[j])},
                     {"feasible", static_cast<bool>(r.feasible[j])}});
  }
  return {{"x", coords(r.x)},
          {"xi_star_index", r.xi_star_index},
          {"xi_star", coords(r.xi_star)},
          {"tau_star", number(r.tau_star)},
          {"kappa_star", number(r.kappa_star)},
          {"local_maxima", r.local_maxima},
          {"lambda_hat", number(r.lambda_hat)},
          {"infinite_estimate", r.infinite_estimate},
          {"f_raw", raw(r.f_raw)},
          {"g_raw", raw(r.g_raw)},
          {"plugin_variance", number(r.plugin_variance)},
          {"clt_scale", number(r.clt_scale)},
          {"standard_error", number(r.standard_error)},
          {"flags", r.flags},
          {"nodes", nodes}};
}

json cv(const CvReport& r) {
  return {{"criterion", r.criterion},
          {"alpha_grid", numbers(r.alpha_grid)},
          {"beta_grid", numbers(r.beta_grid)},
          {"errors", numbers(r.errors)},
          {"integrals", numbers(r.integrals)},
          {"corrections", numbers(r.corrections)},
          {"chosen_index", r.chosen_index},
          {"chosen_alpha", number(r.chosen_alpha)},
          {"chosen_beta", number(r.chosen_beta)},
          {"rho", number(r.rho)},
          {"rho2", number(r.rho2)},
          {"n_main", r.n_main},
          {"n_val", r.n_val},
          {"hit_count", r.hit_count},
          {"window_hit_count", r.window_hit_count},
          {"approximate_split", r.approximate_split},
          {"flags", r.flags}};
}

}  // namespace

std::string estimator_snapshot_json(const StreamingEstimator& e) {
  json queries = json::array();
  for (std::size_t i = 0; i < e.queries().size(); ++i) {
    const QueryPoint& q = e.queries()[i];
    json entry = {{"x", coords(q.x)}, {"t", number(q.t)}, {"raw", raw(e.eval_raw(i))}};
    queries.push_back(entry);
  }
  const BandwidthSchedule& s = e.schedule();
  json doc = {{"schedule",
               {{"v0", s.v0}, {"w0", s.w0}, {"alpha", s.alpha}, {"beta", s.beta}, {"dim", s.dim}}},
              {"kernel", {{"spatial", e.kernels().spatial.name()},
                          {"temporal", e.kernels().temporal.name()}}},
              {"count", e.count()},
              {"queries", queries}};
  return doc.dump(2);
}

std::string selection_report_json(const SelectionReport& report) {
  return selection(report).dump(2);
}

std::string cv_report_json(const CvReport& report) { return cv(report).dump(2); }

std::string pipeline_report_json(const PipelineResult& result, const std::string& model_name,
                                 std::size_t n_main, std::size_t n_val) {
  json doc = {{"model", model_name},
              {"n_main", n_main},
              {"n_val", n_val},
              {"x", coords(result.curve.base())},
              {"curve_step", number(result.curve.step())},
              {"alpha_G", number(result.alpha_G)},
              {"alpha_F", number(result.alpha_F)},
              {"beta_F", number(result.beta_F)},
              {"lambda_hat", number(result.selection.lambda_hat)},
              {"xi_star", coords(result.selection.xi_star)},
              {"tau_star", number(result.selection.tau_star)},
              {"standard_error", number(result.selection.standard_error)},
              {"nu_argmax_xi", coords(result.curve.node(result.nu_argmax).xi)},
              {"selection", selection(result.selection)},
              {"cv_G", result.cv_G ? cv(*result.cv_G) : json(nullptr)},
              {"cv_F", result.cv_F ? cv(*result.cv_F) : json(nullptr)},
              {"warnings", result.warnings}};
  return doc.dump(2);
}

void write_kappa_csv(std::ostream& out, const SelectionReport& report,
                     std::span<const double> nu_profile, std::span<const double> lambda_profile) {
  const std::size_t d = report.x.dim();
  out << "j,tau";
  for (std::size_t k = 1; k <= d; ++k) out << ",xi_" << k;
  out << ",kappa,feasible";
  if (!nu_profile.empty()) out << ",nu";
  if (!lambda_profile.empty()) out << ",lambda";
  out << '\n';
  for (std::size_t j = 0; j < report.nodes.size(); ++j) {
    out << j << ',' << format_double(report.nodes[j].tau);
    for (double v : report.nodes[j].xi) out << ',' << format_double(v);
    out << ',' << format_double(report.kappa[j]) << ',' << (report.feasible[j] ? 1 : 0);
    if (!nu_profile.empty()) out << ',' << format_double(nu_profile[j]);
    if (!lambda_profile.empty()) out << ',' << format_double(lambda_profile[j]);
    out << '\n';
  }
}

}  // namespace pdmp
