#include "pdmp/model.hpp"

#include <cmath>

#include "pdmp/error.hpp"

namespace pdmp {

PdmpModel::PdmpModel(ModelDefinition def) : def_(std::move(def)) {
  if (def_.dim == 0 || def_.dim > kMaxDim) {
    throw ModelContractError("model '" + def_.name + "': dimension must be in [1, " +
                             std::to_string(kMaxDim) + "]");
  }
  if (!def_.flow || !def_.rate || !def_.kernel_sampler || !def_.in_domain) {
    throw ModelContractError("model '" + def_.name +
                             "': flow, rate, kernel sampler and domain are required");
  }
  if (!(def_.solver.horizon > 0.0)) {
    throw ModelContractError("model '" + def_.name + "': solver horizon must be positive");
  }
}

double PdmpModel::kernel_density(const State& pre_jump, const State& y) const {
  if (!def_.kernel_density) {
    throw ModelContractError("model '" + def_.name + "' has no kernel density");
  }
  return def_.kernel_density(pre_jump, y);
}

double PdmpModel::rate_bound(const State& x, double horizon) const {
  if (!def_.rate_bound) {
    throw ModelContractError("model '" + def_.name +
                             "' has no rate bound; thinning is unavailable");
  }
  return def_.rate_bound(x, horizon);
}

PdmpModel PdmpModel::with_solver(const SolverOptions& options) const {
  ModelDefinition copy = def_;
  copy.solver = options;
  return PdmpModel(std::move(copy));
}

PdmpModel PdmpModel::without_hazard_inverse() const {
  ModelDefinition copy = def_;
  copy.hazard_inverse = nullptr;
  return PdmpModel(std::move(copy));
}

}  // namespace pdmp
