#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdmp/model.hpp"
#include "pdmp/rng.hpp"
#include "pdmp/state.hpp"

namespace pdmp {

// Φ(x, t); negative t follows the flow backwards.
State flow_at(const PdmpModel& model, const State& x, double t);

// |d/dt Φ(x, t)| at t = 0 by central difference.
double flow_speed(const PdmpModel& model, const State& x, double eps = 1e-6);
// d/dt Φ(x, t) at t = 0 by central difference.
State flow_velocity(const PdmpModel& model, const State& x, double eps = 1e-6);

// t+(x): first time the forward flow reaches the boundary of E; +inf past the horizon.
double exit_time_forward(const PdmpModel& model, const State& x);
// t-(x): same along the reverse flow.
double exit_time_backward(const PdmpModel& model, const State& x);

// ∫_a^b λ(Φ(x, s)) ds by adaptive Simpson quadrature.
double cumulative_hazard(const PdmpModel& model, const State& x, double a, double b);

// Time at which the cumulative hazard from x reaches `level`, or (t+, true).
Interjump invert_hazard(const PdmpModel& model, const State& x, double level);

enum class InterjumpMethod { inversion, thinning };

Interjump sample_interjump(const PdmpModel& model, const State& x, CounterRng& rng,
                           InterjumpMethod method = InterjumpMethod::inversion);

State sample_post_jump(const PdmpModel& model, const State& pre_jump, CounterRng& rng);

// One step of the embedded chain: post-jump location z and the sojourn s that
// follows it. boundary marks a forced jump (s = t+(z)).
struct ChainRecord {
  State z;
  double s = 0.0;
  bool boundary = false;
};

struct EmbeddedChain {
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<ChainRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  const ChainRecord& operator[](std::size_t i) const noexcept { return records[i]; }
};

EmbeddedChain simulate_chain(const PdmpModel& model, const State& x0, std::size_t n,
                             CounterRng rng,
                             InterjumpMethod method = InterjumpMethod::inversion);

EmbeddedChain simulate_chain(const PdmpModel& model, const State& x0, std::size_t n,
                             std::uint64_t seed,
                             InterjumpMethod method = InterjumpMethod::inversion);

// Prefix [0, count) and suffix [count, n) of a chain.
EmbeddedChain chain_slice(const EmbeddedChain& chain, std::size_t first, std::size_t count);

// idx,z_1..z_d,s,boundary with round-trip precision.
void write_chain_csv(std::ostream& out, const EmbeddedChain& chain);
void write_chain_csv(const std::string& path, const EmbeddedChain& chain);
EmbeddedChain read_chain_csv(std::istream& in);
EmbeddedChain read_chain_csv(const std::string& path);

std::string format_double(double value);

}  // namespace pdmp
