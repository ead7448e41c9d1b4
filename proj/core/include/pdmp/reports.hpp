#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "pdmp/bandwidth_cv.hpp"
#include "pdmp/estimators.hpp"
#include "pdmp/pipeline.hpp"
#include "pdmp/selector.hpp"

namespace pdmp {

// Pretty-printed JSON documents. Non-finite numbers are written as null.
std::string estimator_snapshot_json(const StreamingEstimator& estimator);
std::string selection_report_json(const SelectionReport& report);
std::string cv_report_json(const CvReport& report);
std::string pipeline_report_json(const PipelineResult& result, const std::string& model_name,
                                 std::size_t n_main, std::size_t n_val);

// j,tau,xi_1..xi_d,kappa,feasible[,nu][,lambda]
void write_kappa_csv(std::ostream& out, const SelectionReport& report,
                     std::span<const double> nu_profile = {},
                     std::span<const double> lambda_profile = {});

}  // namespace pdmp
