#include "pdmp/flow_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "pdmp/error.hpp"
#include "pdmp/simulation.hpp"

namespace pdmp {

namespace {

constexpr int kBisectionSteps = 80;

double speed_eps(double step) { return std::max(1e-9, 1e-3 * step); }

}  // namespace

ReverseCurve::ReverseCurve(State base, std::vector<CurveNode> nodes, double step,
                           double horizon)
    : base_(std::move(base)), nodes_(std::move(nodes)), step_(step), horizon_(horizon) {
  if (nodes_.empty()) throw std::invalid_argument("a reverse curve needs at least one node");
  for (std::size_t j = 1; j < nodes_.size(); ++j) {
    if (!(nodes_[j].tau > nodes_[j - 1].tau)) {
      throw std::invalid_argument("curve node times must increase");
    }
  }
}

double default_curve_step(const PdmpModel& model, const State& x, double cap,
                          std::size_t min_nodes) {
  const double span = std::min(exit_time_backward(model, x), cap);
  if (!std::isfinite(span) || !(span > 0.0)) {
    throw std::invalid_argument("reverse curve needs a finite positive cap when t- is infinite");
  }
  return span / static_cast<double>(std::max<std::size_t>(min_nodes, 1));
}

ReverseCurve reverse_curve(const PdmpModel& model, const State& x, double step, double cap) {
  if (!(step > 0.0)) throw std::invalid_argument("curve step must be positive");
  const double t_minus = exit_time_backward(model, x);
  const double horizon = std::min(t_minus, cap);
  if (!std::isfinite(horizon)) {
    throw std::invalid_argument("reverse curve needs a finite cap when t- is infinite");
  }
  const double limit = std::min(t_minus - step, cap);
  const std::size_t extra =
      limit > 0.0 ? static_cast<std::size_t>(std::floor(limit / step * (1.0 + 1e-12))) : 0;

  const double eps = speed_eps(step);
  std::vector<CurveNode> nodes;
  nodes.reserve(extra + 1);
  for (std::size_t j = 0; j <= extra; ++j) {
    const double t = static_cast<double>(j) * step;
    const State xi = flow_at(model, x, -t);
    if (!model.in_domain(xi)) break;
    nodes.push_back({xi, t, flow_speed(model, xi, eps)});
  }
  return ReverseCurve(x, std::move(nodes), step, horizon);
}

double tau(const ReverseCurve& curve, const State& xi, double tolerance) {
  for (const CurveNode& n : curve.nodes()) {
    if (distance(n.xi, xi) <= tolerance * (1.0 + norm(xi))) return n.tau;
  }
  throw std::invalid_argument("state " + to_string(xi) + " is not a node of the curve");
}

double line_integral(const ReverseCurve& curve, std::span<const double> g) {
  if (g.size() != curve.size()) {
    throw std::invalid_argument("line integral needs one value per curve node");
  }
  const auto& nodes = curve.nodes();
  double acc = 0.0;
  for (std::size_t j = 1; j < nodes.size(); ++j) {
    const double left = g[j - 1] * nodes[j - 1].speed;
    const double right = g[j] * nodes[j].speed;
    acc += 0.5 * (left + right) * (nodes[j].tau - nodes[j - 1].tau);
  }
  return acc;
}

double line_integral(const ReverseCurve& curve, const std::function<double(std::size_t)>& g) {
  std::vector<double> values(curve.size());
  for (std::size_t j = 0; j < values.size(); ++j) values[j] = g(j);
  return line_integral(curve, values);
}

double disc_measure(std::size_t d, double rho) {
  if (d == 0) throw std::invalid_argument("disc measure needs d >= 1");
  const double k = 0.5 * static_cast<double>(d - 1);
  return std::pow(std::numbers::pi, k) * std::pow(rho, static_cast<double>(d - 1)) /
         std::tgamma(k + 1.0);
}

Tube make_tube(const PdmpModel& model, const State& x, double radius, double scan_step,
               std::size_t mesh_per_axis) {
  if (!(radius > 0.0)) throw std::invalid_argument("tube radius must be positive");
  if (!(scan_step > 0.0)) throw std::invalid_argument("tube scan step must be positive");
  if (!model.in_domain(x)) throw DomainError("tube base " + to_string(x) + " is outside E");

  Tube tube;
  tube.base = x;
  tube.radius = radius;
  tube.scan_step = scan_step;
  const State v = flow_velocity(model, x, speed_eps(scan_step));
  const double speed = norm(v);
  if (!(speed > 0.0)) throw std::invalid_argument("flow is stationary at the tube base");
  tube.direction = (1.0 / speed) * v;

  const std::size_t d = x.dim();
  for (std::size_t k = 0; k < d && tube.normal_frame.size() + 1 < d; ++k) {
    State e(d);
    e[k] = 1.0;
    e -= dot(e, tube.direction) * tube.direction;
    for (const State& b : tube.normal_frame) e -= dot(e, b) * b;
    const double len = norm(e);
    if (len > 1e-8) tube.normal_frame.push_back((1.0 / len) * e);
  }

  // Mesh of the disc: grid in frame coordinates, clipped to the radius.
  const std::size_t m = std::max<std::size_t>(mesh_per_axis, 2);
  const std::size_t axes = tube.normal_frame.size();
  std::size_t total = 1;
  for (std::size_t a = 0; a < axes; ++a) total *= m;
  for (std::size_t idx = 0; idx < total; ++idx) {
    State p = x;
    std::size_t rem = idx;
    double r2 = 0.0;
    for (std::size_t a = 0; a < axes; ++a) {
      const double c = -radius + 2.0 * radius * static_cast<double>(rem % m) /
                                     static_cast<double>(m - 1);
      rem /= m;
      r2 += c * c;
      p += c * tube.normal_frame[a];
    }
    if (r2 <= radius * radius * (1.0 + 1e-12)) tube.disc_mesh.push_back(p);
  }
  std::size_t outside = 0;
  for (const State& p : tube.disc_mesh) outside += model.in_domain(p) ? 0 : 1;
  if (outside > 0) {
    tube.warnings.push_back(std::to_string(outside) +
                            " disc mesh points lie outside E; the tube radius may be too large");
  }
  return tube;
}

std::optional<double> tube_hit(const PdmpModel& model, const Tube& tube, const State& xi,
                               double max_time) {
  if (!model.in_domain(xi)) return std::nullopt;
  const double horizon = std::min(max_time, exit_time_forward(model, xi));
  if (!std::isfinite(horizon)) throw std::invalid_argument("tube_hit needs a finite max_time");
  auto signed_distance = [&](double t) {
    return dot(flow_at(model, xi, t) - tube.base, tube.direction);
  };
  auto accept = [&](double t) -> std::optional<double> {
    if (distance(flow_at(model, xi, t), tube.base) <= tube.radius) return t;
    return std::nullopt;
  };

  double t_prev = 0.0;
  double s_prev = signed_distance(0.0);
  if (s_prev == 0.0) return accept(0.0);
  const double h = tube.scan_step;
  for (std::size_t k = 1;; ++k) {
    const double t = std::min(static_cast<double>(k) * h, horizon);
    if (!(t > t_prev)) break;
    const double s = signed_distance(t);
    if (s == 0.0) return accept(t);
    if ((s > 0.0) != (s_prev > 0.0)) {
      double lo = t_prev;
      double hi = t;
      double s_lo = s_prev;
      for (int i = 0; i < kBisectionSteps && hi - lo > 1e-14 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        const double s_mid = signed_distance(mid);
        if (s_mid == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((s_mid > 0.0) == (s_lo > 0.0)) {
          lo = mid;
          s_lo = s_mid;
        } else {
          hi = mid;
        }
      }
      return accept(0.5 * (lo + hi));
    }
    t_prev = t;
    s_prev = s;
    if (t >= horizon) break;
  }
  return std::nullopt;
}

void write_curve_csv(std::ostream& out, const ReverseCurve& curve) {
  out << "j,tau";
  for (std::size_t k = 1; k <= curve.base().dim(); ++k) out << ",xi_" << k;
  out << ",speed\n";
  for (std::size_t j = 0; j < curve.size(); ++j) {
    const CurveNode& n = curve.node(j);
    out << j << ',' << format_double(n.tau);
    for (double v : n.xi) out << ',' << format_double(v);
    out << ',' << format_double(n.speed) << '\n';
  }
}

}  // namespace pdmp
