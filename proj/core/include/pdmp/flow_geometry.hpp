#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdmp/model.hpp"
#include "pdmp/state.hpp"

namespace pdmp {

struct CurveNode {
  State xi;
  double tau = 0.0;    // Φ(xi, tau) = base
  double speed = 0.0;  // |∂_t Φ(xi, ·)|
};

// Points upstream of a base point x along the reverse flow, uniform in time.
class ReverseCurve {
 public:
  ReverseCurve(State base, std::vector<CurveNode> nodes, double step, double horizon);

  const State& base() const noexcept { return base_; }
  const std::vector<CurveNode>& nodes() const noexcept { return nodes_; }
  const CurveNode& node(std::size_t j) const { return nodes_.at(j); }
  std::size_t size() const noexcept { return nodes_.size(); }
  double step() const noexcept { return step_; }
  // min(t-(x), cap) at construction.
  double horizon() const noexcept { return horizon_; }

 private:
  State base_;
  std::vector<CurveNode> nodes_;
  double step_;
  double horizon_;
};

// Step giving at least `min_nodes` nodes before min(t-(x), cap).
double default_curve_step(const PdmpModel& model, const State& x, double cap,
                          std::size_t min_nodes = 100);

// Nodes at tau_j = j h for tau_j <= min(t-(x) - h, cap).
ReverseCurve reverse_curve(const PdmpModel& model, const State& x, double step, double cap);

// Stored time of a node; throws std::invalid_argument when xi is not a node.
double tau(const ReverseCurve& curve, const State& xi, double tolerance = 1e-9);

// Trapezoid rule of g_j speed_j over tau. Fewer than two nodes integrate to 0.
double line_integral(const ReverseCurve& curve, std::span<const double> g);
double line_integral(const ReverseCurve& curve, const std::function<double(std::size_t)>& g);

// Lebesgue measure of a (d-1)-dimensional disc of radius rho.
double disc_measure(std::size_t d, double rho);

// Flat disc D(x, rho) in the hyperplane through x orthogonal to the flow.
struct Tube {
  State base;
  double radius = 0.0;
  State direction;                // unit flow direction at base
  std::vector<State> normal_frame;  // orthonormal basis of the hyperplane
  std::vector<State> disc_mesh;
  double scan_step = 0.0;         // forward-flow sampling step for crossings
  std::vector<std::string> warnings;
};

Tube make_tube(const PdmpModel& model, const State& x, double radius, double scan_step,
               std::size_t mesh_per_axis = 5);

// Time at which the forward flow from xi crosses the disc, if it does within
// max_time (and before leaving E).
std::optional<double> tube_hit(const PdmpModel& model, const Tube& tube, const State& xi,
                               double max_time);

// j,tau,xi_1..xi_d,speed
void write_curve_csv(std::ostream& out, const ReverseCurve& curve);

}  // namespace pdmp
