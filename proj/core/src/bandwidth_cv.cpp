#include "pdmp/bandwidth_cv.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "pdmp/error.hpp"
#include "pdmp/parallel.hpp"

namespace pdmp {

TubeHits locate_tube_hits(const PdmpModel& model, const Tube& tube, const EmbeddedChain& val,
                          double max_time) {
  TubeHits hits;
  hits.n_val = val.size();
  for (std::size_t k = 0; k < val.size(); ++k) {
    if (auto theta = tube_hit(model, tube, val[k].z, max_time)) {
      hits.records.push_back(k);
      hits.theta.push_back(*theta);
    }
  }
  return hits;
}

double cv_normalizer(std::size_t d, double rho, std::size_t n_val) {
  if (n_val == 0) return 0.0;
  return 2.0 / (static_cast<double>(n_val) * disc_measure(d, rho));
}

CvProblem::CvProblem(std::shared_ptr<const ChainIndex> main,
                     std::shared_ptr<const EmbeddedChain> val, ReverseCurve curve, Tube tube,
                     TubeHits hits, KernelPair kernels, double v0, double w0)
    : main_(std::move(main)), val_(std::move(val)), curve_(std::move(curve)),
      tube_(std::move(tube)), hits_(std::move(hits)), kernels_(std::move(kernels)), v0_(v0),
      w0_(w0) {
  if (!main_ || !val_) throw std::invalid_argument("cross-validation needs both chains");
  if (main_->chain().empty()) throw std::invalid_argument("main chain is empty");
  if (hits_.n_val != val_->size()) {
    throw std::invalid_argument("tube hits were computed on a different validation chain");
  }
}

BatchEstimator CvProblem::estimator(double alpha, double beta) const {
  BandwidthSchedule s{v0_, w0_, alpha, beta, dim()};
  return BatchEstimator(main_, s, kernels_);
}

CvTerms CvProblem::error_G(double alpha) const {
  // The survival sum does not involve the temporal bandwidth.
  const BatchEstimator g = estimator(alpha, alpha);
  std::vector<double> sq(curve_.size());
  for (std::size_t j = 0; j < sq.size(); ++j) {
    const double k = g.eval_raw(QueryPoint{curve_.node(j).xi, curve_.node(j).tau}).G;
    sq[j] = k * k;
  }
  CvTerms terms;
  terms.integral = line_integral(curve_, sq);
  double sum = 0.0;
  for (std::size_t h = 0; h < hits_.size(); ++h) {
    const ChainRecord& r = (*val_)[hits_.records[h]];
    const double theta = hits_.theta[h];
    if (r.s > theta) {
      sum += g.eval_raw(QueryPoint{r.z, theta}).G;
      ++terms.window_hits;
    }
  }
  terms.correction = cv_normalizer(dim(), tube_.radius, val_->size()) * sum;
  return terms;
}

CvTerms CvProblem::error_F(double alpha, double beta, double rho2) const {
  if (!(rho2 > 0.0)) throw std::invalid_argument("time window rho2 must be positive");
  const BatchEstimator f = estimator(alpha, beta);
  std::vector<double> sq(curve_.size());
  for (std::size_t j = 0; j < sq.size(); ++j) {
    const double v = f.eval_raw(QueryPoint{curve_.node(j).xi, curve_.node(j).tau}).F;
    sq[j] = v * v;
  }
  CvTerms terms;
  terms.integral = line_integral(curve_, sq);
  double sum = 0.0;
  for (std::size_t h = 0; h < hits_.size(); ++h) {
    const ChainRecord& r = (*val_)[hits_.records[h]];
    const double theta = hits_.theta[h];
    if (std::abs(r.s - theta) < 0.5 * rho2) {
      sum += f.eval_raw(QueryPoint{r.z, theta}).F;
      ++terms.window_hits;
    }
  }
  terms.correction = cv_normalizer(dim(), tube_.radius, val_->size()) / rho2 * sum;
  return terms;
}

CvProblem make_cv_problem(const PdmpModel& model, std::shared_ptr<const ChainIndex> main,
                          std::shared_ptr<const EmbeddedChain> val, const ReverseCurve& curve,
                          double radius, const KernelPair& kernels, double v0, double w0) {
  if (!val) throw std::invalid_argument("cross-validation needs a validation chain");
  Tube tube = make_tube(model, curve.base(), radius, 0.5 * curve.step());
  TubeHits hits = locate_tube_hits(model, tube, *val, 2.0 * curve.horizon());
  return CvProblem(std::move(main), std::move(val), curve, std::move(tube), std::move(hits),
                   kernels, v0, w0);
}

namespace {

void require_grid(std::span<const double> grid, const char* what) {
  if (grid.empty()) throw std::invalid_argument(std::string(what) + " grid is empty");
  for (double g : grid) {
    if (!(g > 0.0)) throw std::invalid_argument(std::string(what) + " grid values must be positive");
  }
}

void fill_common(CvReport& report, const CvProblem& problem) {
  report.rho = problem.tube().radius;
  report.n_main = problem.n_main();
  report.n_val = problem.n_val();
  report.hit_count = problem.hits().size();
  if (report.hit_count == 0) report.flags.push_back("no validation record hits the tube");
}

void require_finite(const CvReport& report) {
  for (double e : report.errors) {
    if (!std::isfinite(e)) throw Error("cross-validation produced a non-finite error");
  }
}

}  // namespace

CvReport choose_alpha_G(const CvProblem& problem, std::span<const double> alpha_grid,
                        unsigned jobs) {
  require_grid(alpha_grid, "alpha");
  CvReport report;
  report.criterion = "G";
  report.alpha_grid.assign(alpha_grid.begin(), alpha_grid.end());
  const std::size_t n = alpha_grid.size();
  std::vector<CvTerms> terms(n);
  parallel_for(n, jobs, [&](std::size_t i) { terms[i] = problem.error_G(alpha_grid[i]); });
  for (const CvTerms& t : terms) {
    report.errors.push_back(t.value());
    report.integrals.push_back(t.integral);
    report.corrections.push_back(t.correction);
  }
  require_finite(report);

  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double e = report.errors[i];
    const double b = report.errors[best];
    if (e < b || (e == b && alpha_grid[i] < alpha_grid[best])) best = i;
  }
  report.chosen_index = best;
  report.chosen_alpha = alpha_grid[best];
  report.window_hit_count = terms[best].window_hits;
  fill_common(report, problem);
  return report;
}

CvReport choose_alpha_beta_F(const CvProblem& problem, std::span<const double> alpha_grid,
                             std::span<const double> beta_grid, double rho2, unsigned jobs) {
  require_grid(alpha_grid, "alpha");
  require_grid(beta_grid, "beta");
  CvReport report;
  report.criterion = "F";
  report.alpha_grid.assign(alpha_grid.begin(), alpha_grid.end());
  report.beta_grid.assign(beta_grid.begin(), beta_grid.end());
  report.rho2 = rho2;
  const std::size_t na = alpha_grid.size();
  const std::size_t nb = beta_grid.size();
  std::vector<CvTerms> terms(na * nb);
  parallel_for(terms.size(), jobs, [&](std::size_t i) {
    terms[i] = problem.error_F(alpha_grid[i / nb], beta_grid[i % nb], rho2);
  });
  for (const CvTerms& t : terms) {
    report.errors.push_back(t.value());
    report.integrals.push_back(t.integral);
    report.corrections.push_back(t.correction);
  }
  require_finite(report);

  std::size_t best = 0;
  for (std::size_t i = 1; i < terms.size(); ++i) {
    const double e = report.errors[i];
    const double b = report.errors[best];
    const double ai = alpha_grid[i / nb];
    const double ab = alpha_grid[best / nb];
    const bool smaller_pair =
        ai < ab || (ai == ab && beta_grid[i % nb] < beta_grid[best % nb]);
    if (e < b || (e == b && smaller_pair)) best = i;
  }
  report.chosen_index = best;
  report.chosen_alpha = alpha_grid[best / nb];
  report.chosen_beta = beta_grid[best % nb];
  report.window_hit_count = terms[best].window_hits;
  fill_common(report, problem);
  return report;
}

ChainSplit split_for_validation(const EmbeddedChain& chain) {
  const std::size_t n = chain.size();
  const std::size_t n_val = (n + 10) / 11;
  return {chain_slice(chain, n_val, n - n_val), chain_slice(chain, 0, n_val)};
}

std::vector<double> default_exponent_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(i / 20.0);
  return grid;
}

void write_cv_csv(std::ostream& out, const CvReport& report) {
  const bool two_d = !report.beta_grid.empty();
  out << (two_d ? "alpha,beta,error,integral,correction,chosen\n"
                : "alpha,error,integral,correction,chosen\n");
  const std::size_t nb = std::max<std::size_t>(report.beta_grid.size(), 1);
  for (std::size_t i = 0; i < report.errors.size(); ++i) {
    out << format_double(report.alpha_grid[i / nb]) << ',';
    if (two_d) out << format_double(report.beta_grid[i % nb]) << ',';
    out << format_double(report.errors[i]) << ',' << format_double(report.integrals[i]) << ','
        << format_double(report.corrections[i]) << ',' << (i == report.chosen_index ? 1 : 0)
        << '\n';
  }
}

}  // namespace pdmp
