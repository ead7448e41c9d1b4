#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdmp/crack.hpp"
#include "pdmp/models.hpp"
#include "pdmp/pipeline.hpp"

namespace pdmp::cli {

struct CrackRateSpec {
  // lambda(a) = scale (a / reference)^power per cycle.
  double scale = 2e-5;
  double reference_mm = 30.0;
  double power = 4.0;
};

struct CrackStudy {
  std::vector<double> targets_mm{25.0, 30.0, 35.0, 40.0, 45.0};
  double m_step = 0.01;
  CrackEstimatorConfig estimator;
};

struct EstimateSpec {
  double alpha = 0.2;
  double beta = 0.3;
  std::vector<double> query_times{0.2};
};

struct RunConfig {
  std::string model = "tcp";
  OracleSpec oracle;
  CrackParams crack_params;
  CrackRateSpec crack_rate;

  std::uint64_t seed = 1;
  std::size_t n = 10000;
  std::size_t n_val = 1000;
  std::optional<State> x0;
  std::optional<State> target_x;

  PipelineConfig pipeline;
  EstimateSpec estimate;
  std::size_t replicates = 1;
  std::string output_dir = "pdmp_out";

  std::optional<std::string> chain_csv;
  std::optional<std::string> validation_csv;
  std::optional<std::string> crack_histories_csv;

  std::size_t nu_grid_points = 41;
  std::size_t bacteria_angles = 16;
  std::vector<std::array<double, 2>> bacteria_targets = pdmp::bacteria_targets();
  CrackStudy crack;

  // Model dimension implied by the model name.
  std::size_t dim() const;
  State start_state() const;
  State target_state() const;
};

// Defaults as a JSON document (what print-config shows without --config).
std::string default_config_json();

// Parses a JSON document layered over the defaults. Unknown keys and invalid
// values raise ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// The effective configuration as JSON.
std::string config_to_json(const RunConfig& config);

// Checks the invariants needed by estimation commands (n >= 1, grids nonempty,
// positive bandwidths, dimensions).
void validate_for_estimation(const RunConfig& config);

PdmpModel build_model(const RunConfig& config);
CrackRate build_crack_rate(const CrackRateSpec& spec);

}  // namespace pdmp::cli
