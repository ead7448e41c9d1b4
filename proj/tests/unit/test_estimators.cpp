#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "pdmp/pdmp.hpp"

using namespace pdmp;

namespace {

double epan(double u) { return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0; }

// Direct evaluation of the three sums, written independently of the library.
RawEstimate brute_force(const EmbeddedChain& c, const BandwidthSchedule& s, const State& x,
                        double t) {
  RawEstimate r;
  const double n = static_cast<double>(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double v = s.v0 * std::pow(static_cast<double>(i + 1), -s.alpha);
    const double w = s.w0 * std::pow(static_cast<double>(i + 1), -s.beta);
    double kd = 1.0;
    for (std::size_t j = 0; j < x.dim(); ++j) kd *= epan((c[i].z[j] - x[j]) / v);
    const double vd = std::pow(v, static_cast<double>(x.dim()));
    r.nu += kd / vd / n;
    r.G += (c[i].s > t ? kd / vd : 0.0) / n;
    r.F += kd / vd * epan((c[i].s - t) / w) / w / n;
  }
  return r;
}

EmbeddedChain hand_chain() {
  EmbeddedChain c;
  c.dim = 1;
  c.records = {{State{0.50}, 0.30, false}, {State{0.55}, 0.10, false}, {State{0.45}, 0.60, false}};
  return c;
}

}  // namespace

TEST(SafeRatio, ZeroConventions) {
  EXPECT_EQ(safe_ratio(0.0, 0.0), 0.0);
  EXPECT_TRUE(std::isinf(safe_ratio(1.0, 0.0)));
  EXPECT_DOUBLE_EQ(safe_ratio(1.0, 4.0), 0.25);
}

TEST(Estimators, HandComputedChain) {
  const EmbeddedChain c = hand_chain();
  const BandwidthSchedule s{0.2, 0.5, 0.25, 0.25, 1};
  const auto batch = BatchEstimator(std::make_shared<const EmbeddedChain>(c), s,
                                    KernelPair::epanechnikov(1));
  const RawEstimate got = batch.eval_raw(QueryPoint{State{0.5}, 0.2});
  // Record 0: kd = 0.75 / 0.2, s > t, temporal u = 0.2.
  const double r0 = 0.75 / 0.2;
  const double v1 = 0.2 * std::pow(2.0, -0.25);
  const double w1 = 0.5 * std::pow(2.0, -0.25);
  const double r1 = epan(0.05 / v1) / v1;
  const double v2 = 0.2 * std::pow(3.0, -0.25);
  const double w2 = 0.5 * std::pow(3.0, -0.25);
  const double r2 = epan(0.05 / v2) / v2;
  EXPECT_NEAR(got.nu, (r0 + r1 + r2) / 3.0, 1e-13);
  EXPECT_NEAR(got.G, (r0 + r2) / 3.0, 1e-13);
  const double f = r0 * epan(0.1 / 0.5) / 0.5 + r1 * epan(0.1 / w1) / w1 + r2 * epan(0.4 / w2) / w2;
  EXPECT_NEAR(got.F, f / 3.0, 1e-13);
}

TEST(Estimators, EmptyChainGivesZeros) {
  StreamingEstimator e({0.1, 0.1, 0.2, 0.2, 1}, KernelPair::epanechnikov(1),
                       {QueryPoint{State{0.5}, 0.1}});
  const RawEstimate r = e.eval_raw(0);
  EXPECT_EQ(r.F, 0.0);
  EXPECT_EQ(r.G, 0.0);
  EXPECT_EQ(r.nu, 0.0);
  EXPECT_EQ(estimate_G(r), 0.0);
  EXPECT_THROW(e.eval_raw(QueryPoint{State{0.4}, 0.1}), std::out_of_range);
  EXPECT_THROW(e.eval_raw(std::size_t{3}), std::out_of_range);
}

TEST(Estimators, StreamingMatchesBatchAndBruteForce) {
  const auto chain = std::make_shared<const EmbeddedChain>(
      simulate_chain(build_tcp(), State{0.5, 0.5}, 2000, std::uint64_t{5}));
  const BandwidthSchedule s{0.1, 0.1, 0.2, 0.3, 2};
  std::vector<QueryPoint> queries;
  for (double x1 : {0.2, 0.4, 0.6})
    for (double x2 : {0.3, 0.7})
      for (double t : {0.05, 0.2}) queries.push_back({State{x1, x2}, t});
  StreamingEstimator stream(s, KernelPair::epanechnikov(2), queries);
  stream.accumulate(*chain);
  const BatchEstimator batch(chain, s, KernelPair::epanechnikov(2));
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const RawEstimate a = stream.eval_raw(q);
    const RawEstimate b = batch.eval_raw(queries[q]);
    EXPECT_EQ(a.F, b.F);
    EXPECT_EQ(a.G, b.G);
    EXPECT_EQ(a.nu, b.nu);
    const RawEstimate c = brute_force(*chain, s, queries[q].x, queries[q].t);
    EXPECT_NEAR(a.nu, c.nu, 1e-12 * std::max(1.0, c.nu));
    EXPECT_NEAR(a.G, c.G, 1e-12 * std::max(1.0, c.G));
    EXPECT_NEAR(a.F, c.F, 1e-12 * std::max(1.0, c.F));
  }
}

TEST(Estimators, SurvivalSumIsNonincreasingInTime) {
  const auto chain = std::make_shared<const EmbeddedChain>(
      simulate_chain(build_oracle(), State{0.5}, 3000, std::uint64_t{8}));
  const BatchEstimator b(chain, {0.2, 0.2, 0.2, 0.2, 1}, KernelPair::epanechnikov(1));
  double prev = b.eval_raw(QueryPoint{State{0.4}, 0.0}).G;
  const double nu = b.eval_raw(QueryPoint{State{0.4}, 0.0}).nu;
  EXPECT_LE(prev, nu);
  for (int k = 1; k <= 40; ++k) {
    const double g = b.eval_raw(QueryPoint{State{0.4}, 0.1 * k}).G;
    EXPECT_LE(g, prev);
    prev = g;
  }
}

TEST(Estimators, RecordOrderMatters) {
  EmbeddedChain c = hand_chain();
  const BandwidthSchedule s{0.2, 0.5, 0.3, 0.3, 1};
  const QueryPoint q{State{0.5}, 0.2};
  const double before = BatchEstimator(std::make_shared<const EmbeddedChain>(c), s,
                                       KernelPair::epanechnikov(1)).eval_raw(q).nu;
  std::reverse(c.records.begin(), c.records.end());
  const double after = BatchEstimator(std::make_shared<const EmbeddedChain>(c), s,
                                      KernelPair::epanechnikov(1)).eval_raw(q).nu;
  EXPECT_NE(before, after);
}

TEST(Estimators, InvariantDensityHasUnitMass) {
  const auto chain = std::make_shared<const EmbeddedChain>(
      simulate_chain(build_oracle(), State{0.5}, 2000, std::uint64_t{12}));
  const BatchEstimator b(chain, {0.1, 0.1, 0.2, 0.2, 1}, KernelPair::epanechnikov(1));
  double mass = 0.0;
  const double h = 0.001;
  for (double x = -0.2; x <= 1.2; x += h) mass += b.eval_raw(QueryPoint{State{x}, 0.0}).nu * h;
  // One record (x0 itself) may sit anywhere; the kernel integrates to one per record.
  EXPECT_NEAR(mass, 1.0, 2e-3);
}

TEST(Estimators, OracleMonteCarloBands) {
  const OracleSpec spec;
  const auto chain = std::make_shared<const EmbeddedChain>(
      simulate_chain(build_oracle(spec), State{0.5}, 40000, std::uint64_t{21}));
  const BatchEstimator b(chain, {0.25, 0.25, 0.1, 0.1, 1}, KernelPair::epanechnikov(1));
  for (double x : {0.3, 0.5, 0.7}) {
    const RawEstimate r = b.eval_raw(QueryPoint{State{x}, 0.5});
    EXPECT_NEAR(r.nu, oracle_density(spec, State{x}), 0.1);
    EXPECT_NEAR(estimate_G(r), oracle_survival(spec, 0.5), 0.05);
    EXPECT_NEAR(estimate_f(r), std::exp(-0.5), 0.1);
    EXPECT_NEAR(estimate_lambda_phi(r), 1.0, 0.2);
  }
}

TEST(Estimators, TcpJointDensityAndRate) {
  // At x = (0.5, 0.5) the interarrival density from x is λ(Φ(x,t)) e^{-Λ(t)}
  // with λ(Φ(x,t)) = 1 + t and Λ(t) = t + t^2/2.
  const auto chain = std::make_shared<const EmbeddedChain>(
      simulate_chain(build_tcp(), State{0.5, 0.5}, 200000, std::uint64_t{33}));
  const BatchEstimator b(chain, {0.1, 0.08, 0.1, 0.1, 2}, KernelPair::epanechnikov(2));
  const double t = 0.1;
  const RawEstimate r = b.eval_raw(QueryPoint{State{0.5, 0.5}, t});
  const double surv = std::exp(-(t + 0.5 * t * t));
  EXPECT_NEAR(estimate_G(r), surv, 0.06);
  EXPECT_NEAR(estimate_f(r), (1.0 + t) * surv, 0.15);
  EXPECT_NEAR(estimate_lambda_phi(r), 1.0 + t, 0.2);
}

TEST(ChainIndex, CandidatesCoverTheBox) {
  const auto chain = std::make_shared<const EmbeddedChain>(
      simulate_chain(build_bacteria(), State{0.0, 0.0, 1.0}, 3000, std::uint64_t{4}));
  const auto index = make_chain_index(chain, 0.2);
  std::vector<std::uint32_t> out;
  for (const State x : {State{0.0, 0.0, 3.0}, State{0.7, -0.2, 0.1}, State{-0.9, 0.0, 6.0}}) {
    index->candidates(x, 0.2, out);
    EXPECT_TRUE(std::is_sorted(out.begin(), out.end()));
    for (std::size_t i = 0; i < chain->size(); ++i) {
      bool inside = true;
      for (std::size_t j = 0; j < 3; ++j) inside &= std::abs((*chain)[i].z[j] - x[j]) <= 0.2;
      if (inside) EXPECT_TRUE(std::binary_search(out.begin(), out.end(), i)) << i;
    }
  }
}

TEST(Estimators, DimensionMismatchRaises) {
  EXPECT_THROW(StreamingEstimator({0.1, 0.1, 0.2, 0.2, 2}, KernelPair::epanechnikov(2),
                                  {QueryPoint{State{0.5}, 0.1}}),
               DimensionError);
}
