#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pdmp/estimators.hpp"
#include "pdmp/flow_geometry.hpp"
#include "pdmp/model.hpp"
#include "pdmp/simulation.hpp"

namespace pdmp {

// Validation records whose forward flow crosses the tube disc, with crossing times.
struct TubeHits {
  std::vector<std::size_t> records;
  std::vector<double> theta;
  std::size_t n_val = 0;

  std::size_t size() const noexcept { return records.size(); }
};

TubeHits locate_tube_hits(const PdmpModel& model, const Tube& tube, const EmbeddedChain& val,
                          double max_time);

// 2 Γ((d-1)/2 + 1) / (n_val π^{(d-1)/2} ρ^{d-1}) = 2 / (n_val |D(x, ρ)|).
double cv_normalizer(std::size_t d, double rho, std::size_t n_val);

// Error estimate split into the main-chain integral and the validation correction.
struct CvTerms {
  double integral = 0.0;
  double correction = 0.0;
  std::size_t window_hits = 0;

  double value() const noexcept { return integral - correction; }
};

// Everything the two cross-validation criteria share for one tube radius.
class CvProblem {
 public:
  CvProblem(std::shared_ptr<const ChainIndex> main, std::shared_ptr<const EmbeddedChain> val,
            ReverseCurve curve, Tube tube, TubeHits hits, KernelPair kernels, double v0,
            double w0);

  CvTerms error_G(double alpha) const;
  CvTerms error_F(double alpha, double beta, double rho2) const;

  const ReverseCurve& curve() const noexcept { return curve_; }
  const Tube& tube() const noexcept { return tube_; }
  const TubeHits& hits() const noexcept { return hits_; }
  std::size_t n_main() const noexcept { return main_->chain().size(); }
  std::size_t n_val() const noexcept { return val_->size(); }
  std::size_t dim() const noexcept { return curve_.base().dim(); }

 private:
  BatchEstimator estimator(double alpha, double beta) const;

  std::shared_ptr<const ChainIndex> main_;
  std::shared_ptr<const EmbeddedChain> val_;
  ReverseCurve curve_;
  Tube tube_;
  TubeHits hits_;
  KernelPair kernels_;
  double v0_;
  double w0_;
};

struct CvReport {
  std::string criterion;  // "G" or "F"
  std::vector<double> alpha_grid;
  std::vector<double> beta_grid;  // empty for the G criterion
  // Row-major over (alpha, beta).
  std::vector<double> errors;
  std::vector<double> integrals;
  std::vector<double> corrections;
  std::size_t chosen_index = 0;
  double chosen_alpha = 0.0;
  double chosen_beta = 0.0;
  double rho = 0.0;
  double rho2 = 0.0;
  std::size_t n_main = 0;
  std::size_t n_val = 0;
  std::size_t hit_count = 0;
  std::size_t window_hit_count = 0;  // F: hits inside the time window at the chosen pair
  bool approximate_split = false;
  std::vector<std::string> flags;

  double error_at(std::size_t ia, std::size_t ib = 0) const {
    return errors.at(ia * std::max<std::size_t>(beta_grid.size(), 1) + ib);
  }
};

// Tube of the given radius at the curve base (scan step h/2), hits of the
// validation chain within twice the curve horizon, and the problem built on them.
CvProblem make_cv_problem(const PdmpModel& model, std::shared_ptr<const ChainIndex> main,
                          std::shared_ptr<const EmbeddedChain> val, const ReverseCurve& curve,
                          double radius, const KernelPair& kernels, double v0, double w0);

CvReport choose_alpha_G(const CvProblem& problem, std::span<const double> alpha_grid,
                        unsigned jobs = 1);
CvReport choose_alpha_beta_F(const CvProblem& problem, std::span<const double> alpha_grid,
                             std::span<const double> beta_grid, double rho2, unsigned jobs = 1);

struct ChainSplit {
  EmbeddedChain main;
  EmbeddedChain validation;
};

// First ceil(n/11) records validate, the rest estimate.
ChainSplit split_for_validation(const EmbeddedChain& chain);

// {0.05, 0.10, ..., 0.50}
std::vector<double> default_exponent_grid();

void write_cv_csv(std::ostream& out, const CvReport& report);

}  // namespace pdmp
