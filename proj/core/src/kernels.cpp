#include "pdmp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pdmp/error.hpp"
#include "pdmp/simulation.hpp"

namespace pdmp {

namespace {

constexpr double kMeshShrink = 0.95;

template <class F>
double simpson_on_unit_interval(const F& f, int intervals) {
  const double h = 2.0 / intervals;
  double acc = f(-1.0) + f(1.0);
  for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(-1.0 + i * h);
  return acc * h / 3.0;
}

}  // namespace

Kernel::Kernel(KernelFamily family, std::size_t dim)
    : family_(family), dim_(dim), support_radius_(std::sqrt(static_cast<double>(dim))) {
  if (dim == 0 || dim > kMaxDim) {
    throw std::invalid_argument("kernel dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  name_ = family == KernelFamily::epanechnikov ? "epanechnikov" : "uniform";
  if (dim > 1) name_ = "product-" + name_;
  const double m1 = simpson_on_unit_interval([this](double u) { return profile(u); }, 2000);
  const double l1 = simpson_on_unit_interval(
      [this](double u) { return profile(u) * profile(u); }, 2000);
  mass_ = std::pow(m1, static_cast<double>(dim));
  l2norm_sq_ = std::pow(l1, static_cast<double>(dim));
}

Kernel Kernel::epanechnikov(std::size_t dim) { return Kernel(KernelFamily::epanechnikov, dim); }
Kernel Kernel::uniform(std::size_t dim) { return Kernel(KernelFamily::uniform, dim); }

Kernel Kernel::by_name(std::string_view name, std::size_t dim) {
  if (name == "epanechnikov" || name == "product-epanechnikov") return epanechnikov(dim);
  if (name == "uniform" || name == "product-uniform") return uniform(dim);
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

double Kernel::operator()(std::span<const double> u) const {
  if (u.size() != dim_) {
    throw DimensionError("kernel of dimension " + std::to_string(dim_) +
                         " evaluated at a point of dimension " + std::to_string(u.size()));
  }
  double value = 1.0;
  for (double c : u) {
    value *= profile(c);
    if (value == 0.0) return 0.0;
  }
  return value;
}

double kernel_eval(const Kernel& k, std::span<const double> u) { return k(u); }
double kernel_l2norm_sq(const Kernel& k) { return k.l2norm_sq(); }

void BandwidthSchedule::validate() const {
  if (!(v0 > 0.0) || !(w0 > 0.0)) throw std::invalid_argument("v0 and w0 must be positive");
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("bandwidth exponents must be positive");
  }
  if (dim == 0 || dim > kMaxDim) throw std::invalid_argument("schedule dimension out of range");
}

Bandwidths bandwidth_at(const BandwidthSchedule& s, std::size_t k) {
  const double base = static_cast<double>(k) + 1.0;
  return {s.v0 * std::pow(base, -s.alpha), s.w0 * std::pow(base, -s.beta)};
}

bool admissible(double alpha, double beta, std::size_t d) {
  if (!(alpha > 0.0) || !(beta > 0.0)) return false;
  const double ad = alpha * static_cast<double>(d);
  return ad + beta < 1.0 && ad + beta + 2.0 * std::min(alpha, beta) > 1.0;
}

double ball_exit_infimum(const PdmpModel& model, const State& x, double radius) {
  if (model.has_ball_exit_inf()) return model.ball_exit_inf(x, radius);

  const std::size_t d = model.dim();
  std::vector<State> mesh{x};
  for (double r : {radius, 0.5 * radius}) {
    for (std::size_t k = 0; k < d; ++k) {
      for (double sign : {-1.0, 1.0}) {
        State p = x;
        p[k] += sign * r;
        mesh.push_back(p);
      }
    }
    const double c = r / std::sqrt(static_cast<double>(d));
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
      State p = x;
      for (std::size_t k = 0; k < d; ++k) p[k] += (mask >> k & 1U) ? c : -c;
      mesh.push_back(p);
    }
  }
  double inf = kInfinity;
  for (const State& p : mesh) {
    if (!model.in_domain(p)) return 0.0;
    inf = std::min(inf, exit_time_forward(model, p));
  }
  return std::isfinite(inf) ? kMeshShrink * inf : inf;
}

bool check_initial_bandwidths(const PdmpModel& model, const State& x, double t, double v0,
                              double w0, double delta) {
  const double inf = ball_exit_infimum(model, x, v0 * delta);
  if (std::isinf(inf)) return true;
  return t + w0 * delta < inf;
}

}  // namespace pdmp
