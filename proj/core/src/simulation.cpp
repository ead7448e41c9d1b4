#include "pdmp/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "pdmp/error.hpp"

namespace pdmp {

namespace {

constexpr double kInitialBracket = 1e-6;
constexpr int kMaxSimpsonDepth = 48;

void require_in_domain(const PdmpModel& model, const State& x, const char* what) {
  if (!model.in_domain(x)) {
    throw DomainError(std::string(what) + ": state " + to_string(x) + " is outside E of model '" +
                      model.name() + "'");
  }
}

double hazard_at(const PdmpModel& model, const State& x, double s) {
  const double r = model.rate(flow_at(model, x, s));
  if (!std::isfinite(r) || r < 0.0) {
    throw SimulationError("rate along the flow is " + std::to_string(r) + " at time " +
                          std::to_string(s) + " from " + to_string(x));
  }
  return r;
}

template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double exit_time_by_bisection(const PdmpModel& model, const State& x, double direction) {
  const SolverOptions& opt = model.solver();
  auto inside = [&](double t) { return model.in_domain(flow_at(model, x, direction * t)); };

  double lo = 0.0;
  double hi = std::min(kInitialBracket, opt.horizon);
  while (inside(hi)) {
    if (hi >= opt.horizon) return kInfinity;
    lo = hi;
    hi = std::min(2.0 * hi, opt.horizon);
  }
  while (hi - lo > opt.exit_tolerance * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (inside(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Interjump sample_by_thinning(const PdmpModel& model, const State& x, CounterRng& rng) {
  const SolverOptions& opt = model.solver();
  const double t_plus = exit_time_forward(model, x);
  const double cap = std::min(t_plus, opt.horizon);
  double t = 0.0;
  while (t < cap) {
    const double window = std::isfinite(t_plus) ? cap - t : std::min(opt.thinning_window, cap - t);
    const double bound = model.rate_bound(flow_at(model, x, t), window);
    if (!std::isfinite(bound) || bound < 0.0) {
      throw ModelContractError("rate bound must be finite and nonnegative");
    }
    if (bound == 0.0) {
      t += window;
      continue;
    }
    const double gap = rng.exponential() / bound;
    if (gap > window) {
      t += window;
      continue;
    }
    t += gap;
    if (t >= cap) break;
    const double r = hazard_at(model, x, t);
    if (r > bound * (1.0 + 1e-12)) {
      throw ModelContractError("rate " + std::to_string(r) + " exceeds its declared bound " +
                               std::to_string(bound));
    }
    if (rng.uniform() * bound <= r) return {t, false};
  }
  if (std::isfinite(t_plus) && t_plus <= opt.horizon) return {t_plus, true};
  throw SimulationError("no jump before the solver horizon from " + to_string(x));
}

}  // namespace

State flow_at(const PdmpModel& model, const State& x, double t) {
  if (t == 0.0) return x;
  State y = model.flow(x, t);
  if (y.dim() != model.dim() || !y.all_finite()) {
    throw NumericalFlowError("flow of model '" + model.name() + "' is not finite at " +
                             to_string(x) + ", t=" + std::to_string(t));
  }
  return y;
}

State flow_velocity(const PdmpModel& model, const State& x, double eps) {
  State v = flow_at(model, x, eps) - flow_at(model, x, -eps);
  v *= 0.5 / eps;
  return v;
}

double flow_speed(const PdmpModel& model, const State& x, double eps) {
  return norm(flow_velocity(model, x, eps));
}

double exit_time_forward(const PdmpModel& model, const State& x) {
  require_in_domain(model, x, "exit_time_forward");
  if (model.has_exit_forward()) return model.analytic_exit_forward(x);
  return exit_time_by_bisection(model, x, 1.0);
}

double exit_time_backward(const PdmpModel& model, const State& x) {
  require_in_domain(model, x, "exit_time_backward");
  if (model.has_exit_backward()) return model.analytic_exit_backward(x);
  return exit_time_by_bisection(model, x, -1.0);
}

double cumulative_hazard(const PdmpModel& model, const State& x, double a, double b) {
  if (b <= a) return 0.0;
  auto f = [&](double s) { return hazard_at(model, x, s); };
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double value = simpson_recurse(f, a, b, fa, fm, fb, whole,
                                       model.solver().quadrature_tolerance, kMaxSimpsonDepth);
  if (!std::isfinite(value)) {
    throw SimulationError("cumulative hazard is not finite from " + to_string(x));
  }
  return value;
}

Interjump invert_hazard(const PdmpModel& model, const State& x, double level) {
  if (model.has_hazard_inverse()) return model.hazard_inverse(x, level);

  const SolverOptions& opt = model.solver();
  const double t_plus = exit_time_forward(model, x);
  const double cap = std::min(t_plus, opt.horizon);
  const double r0 = hazard_at(model, x, 0.0);
  double step = r0 > 0.0 ? level / r0 : (std::isfinite(cap) ? cap : 1.0);

  double t0 = 0.0;
  double acc = 0.0;
  while (t0 < cap) {
    const double t1 = std::min(t0 + step, cap);
    const double piece = cumulative_hazard(model, x, t0, t1);
    if (acc + piece >= level) {
      double lo = t0;
      double hi = t1;
      double acc_lo = acc;
      while (hi - lo > opt.hazard_tolerance * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double part = cumulative_hazard(model, x, lo, mid);
        if (acc_lo + part >= level) {
          hi = mid;
        } else {
          lo = mid;
          acc_lo += part;
        }
      }
      return {0.5 * (lo + hi), false};
    }
    acc += piece;
    t0 = t1;
    step *= 2.0;
  }
  if (std::isfinite(t_plus) && t_plus <= opt.horizon) return {t_plus, true};
  throw SimulationError("cumulative hazard never reaches the exponential level before the "
                        "solver horizon from " + to_string(x));
}

Interjump sample_interjump(const PdmpModel& model, const State& x, CounterRng& rng,
                           InterjumpMethod method) {
  require_in_domain(model, x, "sample_interjump");
  if (method == InterjumpMethod::thinning) return sample_by_thinning(model, x, rng);
  return invert_hazard(model, x, rng.exponential());
}

State sample_post_jump(const PdmpModel& model, const State& pre_jump, CounterRng& rng) {
  State y = model.sample_kernel(pre_jump, rng);
  if (!model.in_domain(y)) {
    throw ModelContractError("kernel of model '" + model.name() + "' drew " + to_string(y) +
                             " outside E from pre-jump state " + to_string(pre_jump));
  }
  return y;
}

EmbeddedChain simulate_chain(const PdmpModel& model, const State& x0, std::size_t n,
                             CounterRng rng, InterjumpMethod method) {
  EmbeddedChain chain;
  chain.dim = model.dim();
  chain.seed = rng.key();
  if (n == 0) return chain;
  require_in_domain(model, x0, "simulate_chain");
  chain.records.reserve(n);
  State z = x0;
  for (std::size_t i = 0; i < n; ++i) {
    try {
      const Interjump jump = sample_interjump(model, z, rng, method);
      const State pre = flow_at(model, z, jump.time);
      State next = sample_post_jump(model, pre, rng);
      chain.records.push_back({z, jump.time, jump.boundary});
      z = next;
    } catch (const SimulationError& e) {
      throw SimulationError("record " + std::to_string(i) + ": " + e.what(), i);
    } catch (const Error& e) {
      throw SimulationError("record " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  return chain;
}

EmbeddedChain simulate_chain(const PdmpModel& model, const State& x0, std::size_t n,
                             std::uint64_t seed, InterjumpMethod method) {
  return simulate_chain(model, x0, n, CounterRng(seed), method);
}

EmbeddedChain chain_slice(const EmbeddedChain& chain, std::size_t first, std::size_t count) {
  EmbeddedChain out;
  out.dim = chain.dim;
  out.seed = chain.seed;
  if (first >= chain.size()) return out;
  const std::size_t last = std::min(chain.size(), first + count);
  out.records.assign(chain.records.begin() + static_cast<std::ptrdiff_t>(first),
                     chain.records.begin() + static_cast<std::ptrdiff_t>(last));
  return out;
}

}  // namespace pdmp
