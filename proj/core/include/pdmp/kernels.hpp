#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "pdmp/model.hpp"
#include "pdmp/state.hpp"

namespace pdmp {

enum class KernelFamily { epanechnikov, uniform };

// Product kernel K_p(u) = prod_j k(u_j) with k supported on [-1, 1]; the
// support lies in the Euclidean ball of radius sqrt(p).
class Kernel {
 public:
  static Kernel epanechnikov(std::size_t dim = 1);
  static Kernel uniform(std::size_t dim = 1);
  static Kernel by_name(std::string_view name, std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  KernelFamily family() const noexcept { return family_; }
  const std::string& name() const noexcept { return name_; }

  // Radius δ of a ball containing the support.
  double support_radius() const noexcept { return support_radius_; }
  // Half-width of the support along each axis.
  static constexpr double box_half_width() noexcept { return 1.0; }

  // One-dimensional factor k(u).
  double profile(double u) const noexcept {
    if (u < -1.0 || u > 1.0) return 0.0;
    return family_ == KernelFamily::epanechnikov ? 0.75 * (1.0 - u * u) : 0.5;
  }

  double operator()(std::span<const double> u) const;

  // ∫ K^2, computed once by quadrature.
  double l2norm_sq() const noexcept { return l2norm_sq_; }
  // ∫ K, by the same quadrature (should be 1).
  double mass() const noexcept { return mass_; }

 private:
  Kernel(KernelFamily family, std::size_t dim);

  KernelFamily family_;
  std::size_t dim_;
  std::string name_;
  double support_radius_;
  double l2norm_sq_;
  double mass_;
};

double kernel_eval(const Kernel& k, std::span<const double> u);
double kernel_l2norm_sq(const Kernel& k);

struct Bandwidths {
  double v = 0.0;
  double w = 0.0;
};

// v_k = v0 (k+1)^-alpha, w_k = w0 (k+1)^-beta.
struct BandwidthSchedule {
  double v0 = 0.1;
  double w0 = 0.1;
  double alpha = 0.1;
  double beta = 0.1;
  std::size_t dim = 1;

  // Throws std::invalid_argument on nonpositive parameters.
  void validate() const;
};

Bandwidths bandwidth_at(const BandwidthSchedule& s, std::size_t k);

// alpha, beta > 0, alpha d + beta < 1, alpha d + beta + 2 min(alpha, beta) > 1.
bool admissible(double alpha, double beta, std::size_t d);

// Infimum of t+ over B(x, radius): exact when the model provides it, otherwise
// over a centre/axis/corner mesh at radii r and r/2, shrunk by 5%.
double ball_exit_infimum(const PdmpModel& model, const State& x, double radius);

// t + w0 δ < inf_{B(x, v0 δ)} t+.
bool check_initial_bandwidths(const PdmpModel& model, const State& x, double t, double v0,
                              double w0, double delta);

}  // namespace pdmp
