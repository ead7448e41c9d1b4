#include "pdmp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pdmp/error.hpp"

namespace pdmp {

double safe_ratio(double num, double den) noexcept {
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

namespace detail {

StepFactors step_factors(const BandwidthSchedule& s, std::size_t k) {
  const Bandwidths b = bandwidth_at(s, k);
  return {1.0 / b.v, 1.0 / std::pow(b.v, static_cast<double>(s.dim)), 1.0 / b.w};
}

}  // namespace detail

namespace {

void require_query_dims(const std::vector<QueryPoint>& queries, std::size_t dim) {
  for (const QueryPoint& q : queries) {
    if (q.x.dim() != dim) {
      throw DimensionError("query " + to_string(q.x) + " does not match estimator dimension " +
                           std::to_string(dim));
    }
  }
}

void require_kernel_dims(const KernelPair& k, std::size_t dim) {
  if (k.spatial.dim() != dim || k.temporal.dim() != 1) {
    throw DimensionError("kernel dimensions do not match the schedule");
  }
}

}  // namespace

StreamingEstimator::StreamingEstimator(BandwidthSchedule schedule, KernelPair kernels,
                                       std::vector<QueryPoint> queries)
    : schedule_(schedule), kernels_(std::move(kernels)), queries_(std::move(queries)),
      sums_(queries_.size()) {
  schedule_.validate();
  require_kernel_dims(kernels_, schedule_.dim);
  require_query_dims(queries_, schedule_.dim);
}

void StreamingEstimator::accumulate(const State& z, double s) {
  if (z.dim() != schedule_.dim) throw DimensionError("record dimension mismatch");
  const detail::StepFactors f = detail::step_factors(schedule_, count_);
  for (std::size_t q = 0; q < queries_.size(); ++q) {
    const RawEstimate term = detail::record_term(kernels_, f, z, s, queries_[q].x, queries_[q].t);
    sums_[q].F += term.F;
    sums_[q].G += term.G;
    sums_[q].nu += term.nu;
  }
  ++count_;
}

void StreamingEstimator::accumulate(const EmbeddedChain& chain) {
  for (const ChainRecord& r : chain.records) accumulate(r.z, r.s);
}

RawEstimate StreamingEstimator::eval_raw(std::size_t query_index) const {
  if (query_index >= sums_.size()) throw std::out_of_range("query index out of range");
  if (count_ == 0) return {};
  const double n = static_cast<double>(count_);
  const RawEstimate& s = sums_[query_index];
  return {s.F / n, s.G / n, s.nu / n};
}

RawEstimate StreamingEstimator::eval_raw(const QueryPoint& q) const {
  for (std::size_t i = 0; i < queries_.size(); ++i) {
    if (queries_[i].x == q.x && queries_[i].t == q.t) return eval_raw(i);
  }
  throw std::out_of_range("query " + to_string(q.x) + ", t=" + std::to_string(q.t) +
                          " is not registered with the streaming estimator");
}

std::size_t ChainIndex::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = 0x84222325CBF29CE4ULL;
  for (std::int64_t c : k) h = mix64(h ^ static_cast<std::uint64_t>(c));
  return static_cast<std::size_t>(h);
}

ChainIndex::Key ChainIndex::key_of(const State& z) const noexcept {
  Key key{};
  for (std::size_t j = 0; j < z.dim(); ++j) {
    key[j] = static_cast<std::int64_t>(std::floor(z[j] / cell_));
  }
  return key;
}

ChainIndex::ChainIndex(std::shared_ptr<const EmbeddedChain> chain, double cell_width)
    : chain_(std::move(chain)), cell_(cell_width) {
  if (!chain_) throw std::invalid_argument("chain index needs a chain");
  if (!(cell_ > 0.0) || !std::isfinite(cell_)) {
    throw std::invalid_argument("cell width must be positive and finite");
  }
  if (chain_->size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("chain too long for the index");
  }
  for (std::size_t i = 0; i < chain_->size(); ++i) {
    cells_[key_of((*chain_)[i].z)].push_back(static_cast<std::uint32_t>(i));
  }
}

void ChainIndex::candidates(const State& x, double half_width,
                            std::vector<std::uint32_t>& out) const {
  out.clear();
  const std::size_t d = x.dim();
  Key lo{};
  Key hi{};
  std::size_t combos = 1;
  for (std::size_t j = 0; j < d; ++j) {
    lo[j] = static_cast<std::int64_t>(std::floor((x[j] - half_width) / cell_));
    hi[j] = static_cast<std::int64_t>(std::floor((x[j] + half_width) / cell_));
    combos *= static_cast<std::size_t>(hi[j] - lo[j] + 1);
  }
  if (combos > cells_.size()) {
    // Query box wider than the occupied grid: scan occupied cells instead.
    for (const auto& [key, members] : cells_) {
      bool inside = true;
      for (std::size_t j = 0; j < d && inside; ++j) inside = key[j] >= lo[j] && key[j] <= hi[j];
      if (inside) out.insert(out.end(), members.begin(), members.end());
    }
  } else {
    Key key = lo;
    while (true) {
      if (auto it = cells_.find(key); it != cells_.end()) {
        out.insert(out.end(), it->second.begin(), it->second.end());
      }
      std::size_t j = 0;
      for (; j < d; ++j) {
        if (key[j] < hi[j]) {
          ++key[j];
          break;
        }
        key[j] = lo[j];
      }
      if (j == d) break;
    }
  }
  std::sort(out.begin(), out.end());
}

std::shared_ptr<const ChainIndex> make_chain_index(std::shared_ptr<const EmbeddedChain> chain,
                                                   double v0) {
  return std::make_shared<const ChainIndex>(std::move(chain), v0 * Kernel::box_half_width());
}

BatchEstimator::BatchEstimator(std::shared_ptr<const ChainIndex> index,
                               BandwidthSchedule schedule, KernelPair kernels)
    : index_(std::move(index)), schedule_(schedule), kernels_(std::move(kernels)) {
  if (!index_) throw std::invalid_argument("batch estimator needs a chain index");
  schedule_.validate();
  require_kernel_dims(kernels_, schedule_.dim);
  const EmbeddedChain& chain = index_->chain();
  if (!chain.empty() && chain.dim != schedule_.dim) {
    throw DimensionError("chain dimension does not match the schedule");
  }
  factors_.reserve(chain.size());
  for (std::size_t k = 0; k < chain.size(); ++k) {
    factors_.push_back(detail::step_factors(schedule_, k));
  }
}

BatchEstimator::BatchEstimator(std::shared_ptr<const EmbeddedChain> chain,
                               BandwidthSchedule schedule, KernelPair kernels)
    : BatchEstimator(make_chain_index(std::move(chain), schedule.v0), schedule,
                     std::move(kernels)) {}

RawEstimate BatchEstimator::eval_raw(const QueryPoint& q) const {
  const EmbeddedChain& chain = index_->chain();
  if (chain.empty()) return {};
  if (q.x.dim() != schedule_.dim) throw DimensionError("query dimension mismatch");
  thread_local std::vector<std::uint32_t> scratch;
  index_->candidates(q.x, schedule_.v0 * Kernel::box_half_width(), scratch);
  RawEstimate sum;
  for (std::uint32_t i : scratch) {
    const ChainRecord& r = chain.records[i];
    const RawEstimate term = detail::record_term(kernels_, factors_[i], r.z, r.s, q.x, q.t);
    sum.F += term.F;
    sum.G += term.G;
    sum.nu += term.nu;
  }
  const double n = static_cast<double>(chain.size());
  return {sum.F / n, sum.G / n, sum.nu / n};
}

std::vector<RawEstimate> BatchEstimator::eval_raw(const std::vector<QueryPoint>& queries) const {
  std::vector<RawEstimate> out;
  out.reserve(queries.size());
  for (const QueryPoint& q : queries) out.push_back(eval_raw(q));
  return out;
}

}  // namespace pdmp
