#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "pdmp/kernels.hpp"
#include "pdmp/simulation.hpp"
#include "pdmp/state.hpp"

namespace pdmp {

struct QueryPoint {
  State x;
  double t = 0.0;
};

// The three kernel sums divided by n: joint density F, survival-weighted
// density G and invariant density nu.
struct RawEstimate {
  double F = 0.0;
  double G = 0.0;
  double nu = 0.0;
};

struct KernelPair {
  Kernel spatial;
  Kernel temporal;

  static KernelPair epanechnikov(std::size_t dim) {
    return {Kernel::epanechnikov(dim), Kernel::epanechnikov(1)};
  }
};

// num/den with 0/0 = 0 and x/0 = +inf for x > 0.
double safe_ratio(double num, double den) noexcept;

inline double estimate_f(const RawEstimate& r) noexcept { return safe_ratio(r.F, r.nu); }
inline double estimate_G(const RawEstimate& r) noexcept { return safe_ratio(r.G, r.nu); }
inline double estimate_lambda_phi(const RawEstimate& r) noexcept { return safe_ratio(r.F, r.G); }

// Conditional survival ratios above this are reported as clipped.
inline constexpr double kSurvivalReportCeiling = 1.05;

template <class E>
concept RawEstimator = requires(const E& e, const QueryPoint& q) {
  { e.eval_raw(q) } -> std::same_as<RawEstimate>;
  { e.count() } -> std::convertible_to<std::size_t>;
};

template <RawEstimator E>
double estimate_f(const E& e, const QueryPoint& q) {
  return estimate_f(e.eval_raw(q));
}
template <RawEstimator E>
double estimate_G(const E& e, const QueryPoint& q) {
  return estimate_G(e.eval_raw(q));
}
template <RawEstimator E>
double estimate_lambda_phi(const E& e, const QueryPoint& q) {
  return estimate_lambda_phi(e.eval_raw(q));
}

namespace detail {

struct StepFactors {
  double inv_v = 0.0;
  double inv_vd = 0.0;  // v^-d
  double inv_w = 0.0;
};

StepFactors step_factors(const BandwidthSchedule& s, std::size_t k);

// Contribution of record (z, s) with factors f to the sums at (x, t). Both
// evaluation modes go through this function so they agree bit for bit.
inline RawEstimate record_term(const KernelPair& k, const StepFactors& f, const State& z,
                               double s, const State& x, double t) noexcept {
  double kd = 1.0;
  for (std::size_t j = 0; j < z.dim(); ++j) {
    kd *= k.spatial.profile((z[j] - x[j]) * f.inv_v);
    if (kd == 0.0) return {};
  }
  const double nu = f.inv_vd * kd;
  return {nu * f.inv_w * k.temporal.profile((s - t) * f.inv_w), s > t ? nu : 0.0, nu};
}

}  // namespace detail

// Recursive estimator over a fixed set of queries; O(#queries) memory.
class StreamingEstimator {
 public:
  StreamingEstimator(BandwidthSchedule schedule, KernelPair kernels,
                     std::vector<QueryPoint> queries);

  void accumulate(const State& z, double s);
  void accumulate(const EmbeddedChain& chain);

  std::size_t count() const noexcept { return count_; }
  const BandwidthSchedule& schedule() const noexcept { return schedule_; }
  const KernelPair& kernels() const noexcept { return kernels_; }
  const std::vector<QueryPoint>& queries() const noexcept { return queries_; }

  RawEstimate eval_raw(std::size_t query_index) const;
  // Throws std::out_of_range when q was not registered.
  RawEstimate eval_raw(const QueryPoint& q) const;

 private:
  BandwidthSchedule schedule_;
  KernelPair kernels_;
  std::vector<QueryPoint> queries_;
  std::vector<RawEstimate> sums_;
  std::size_t count_ = 0;
};

// Uniform grid over the post-jump locations of a stored chain.
class ChainIndex {
 public:
  ChainIndex(std::shared_ptr<const EmbeddedChain> chain, double cell_width);

  const EmbeddedChain& chain() const noexcept { return *chain_; }
  std::shared_ptr<const EmbeddedChain> shared_chain() const noexcept { return chain_; }
  double cell_width() const noexcept { return cell_; }

  // Ascending indices of records whose z may lie in the box x ± half_width.
  void candidates(const State& x, double half_width, std::vector<std::uint32_t>& out) const;

 private:
  using Key = std::array<std::int64_t, kMaxDim>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  Key key_of(const State& z) const noexcept;

  std::shared_ptr<const EmbeddedChain> chain_;
  double cell_;
  std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> cells_;
};

// Evaluates the sums over a stored chain at arbitrary queries.
class BatchEstimator {
 public:
  BatchEstimator(std::shared_ptr<const ChainIndex> index, BandwidthSchedule schedule,
                 KernelPair kernels);
  BatchEstimator(std::shared_ptr<const EmbeddedChain> chain, BandwidthSchedule schedule,
                 KernelPair kernels);

  std::size_t count() const noexcept { return index_->chain().size(); }
  const BandwidthSchedule& schedule() const noexcept { return schedule_; }
  const KernelPair& kernels() const noexcept { return kernels_; }
  const ChainIndex& index() const noexcept { return *index_; }

  RawEstimate eval_raw(const QueryPoint& q) const;
  std::vector<RawEstimate> eval_raw(const std::vector<QueryPoint>& queries) const;

 private:
  std::shared_ptr<const ChainIndex> index_;
  BandwidthSchedule schedule_;
  KernelPair kernels_;
  std::vector<detail::StepFactors> factors_;
};

// Index with cells matched to the largest spatial bandwidth v0.
std::shared_ptr<const ChainIndex> make_chain_index(std::shared_ptr<const EmbeddedChain> chain,
                                                   double v0);

}  // namespace pdmp
