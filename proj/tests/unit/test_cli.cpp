#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "pdmp");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = pdmp::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(PDMP_TEST_TMPDIR) / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path write_config(const json& doc, const std::string& name = "config.json") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump(2);
    return p;
  }

  // Small grids keep the end-to-end runs fast.
  static json small_tcp() {
    return {{"model", {{"name", "tcp"}}},
            {"n", 2000},
            {"n_val", 300},
            {"alpha_grid", {0.1, 0.25, 0.4}},
            {"beta_grid", {0.2, 0.4}},
            {"nu_grid_points", 5}};
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, PrintConfigShowsDefaults) {
  const Outcome o = run({"print-config"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json doc = json::parse(o.out);
  EXPECT_EQ(doc["model"]["name"], "tcp");
  EXPECT_EQ(doc["n"], 10000);
  EXPECT_EQ(doc["n_val"], 1000);
  EXPECT_EQ(doc["alpha_grid"].size(), 10u);
  EXPECT_TRUE(doc["curve_cap"].is_null());
}

TEST_F(Cli, PrintConfigAppliesOverrides) {
  const fs::path cfg = write_config({{"n", 123}});
  const Outcome o = run({"print-config", "--config", cfg.string(), "--seed", "9", "--jobs", "3"});
  ASSERT_EQ(o.code, 0) << o.err;
  const json doc = json::parse(o.out);
  EXPECT_EQ(doc["n"], 123);
  EXPECT_EQ(doc["seed"], 9);
  EXPECT_EQ(doc["jobs"], 3);
}

TEST_F(Cli, SimulateIsDeterministic) {
  const fs::path cfg = write_config({{"n", 10}, {"n_val", 0}, {"seed", 7}});
  const fs::path a = dir_ / "a";
  const fs::path b = dir_ / "b";
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", a.string()}).code, 0);
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", b.string()}).code, 0);
  EXPECT_EQ(line_count(a / "chain.csv"), 11u);
  EXPECT_EQ(slurp(a / "chain.csv"), slurp(b / "chain.csv"));
  const json meta = json::parse(slurp(a / "simulate.json"));
  EXPECT_EQ(meta["seed"], 7);
  EXPECT_EQ(meta["model"], "tcp");
  EXPECT_EQ(meta["n"], 10);
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--seed", "8", "--out", b.string()}).code, 0);
  EXPECT_NE(slurp(a / "chain.csv"), slurp(b / "chain.csv"));
}

TEST_F(Cli, SimulateEmptyChainWritesHeader) {
  const fs::path cfg = write_config({{"n", 0}, {"n_val", 0}});
  const Outcome o = run({"simulate", "--config", cfg.string(), "--out", dir_.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(slurp(dir_ / "chain.csv"), "idx,z_1,z_2,s,boundary\n");
}

TEST_F(Cli, ConfigErrorsExitWithTwo) {
  EXPECT_EQ(run({"simulate", "--config", write_config({{"sed", 1}}).string()}).code, 2);
  EXPECT_EQ(run({"simulate", "--config", (dir_ / "missing.json").string()}).code, 2);
  EXPECT_EQ(run({"simulate", "--config", write_config({{"model", {{"name", "x"}}}}).string()}).code, 2);
  EXPECT_EQ(run({"simulate", "--config", write_config({{"n", "ten"}}).string()}).code, 2);
  EXPECT_EQ(run({"full-run", "--config", write_config({{"alpha_grid", json::array()}}).string()}).code, 2);
  EXPECT_EQ(run({"full-run", "--config", write_config({{"v0", 0.0}}).string()}).code, 2);
  EXPECT_EQ(run({"simulate", "--config", write_config({{"x0", {1.5, 0.5}}}).string()}).code, 2);
  std::ofstream(dir_ / "broken.json") << "{ not json";
  EXPECT_EQ(run({"simulate", "--config", (dir_ / "broken.json").string()}).code, 2);
  EXPECT_EQ(run({"no-such-command"}).code, 2);
}

TEST_F(Cli, EstimateFromAChainFile) {
  const fs::path sim = dir_ / "sim";
  ASSERT_EQ(run({"simulate", "--config", write_config({{"n", 500}, {"n_val", 0}}).string(), "--out",
                 sim.string()})
                .code,
            0);
  const fs::path cfg = write_config({{"inputs", {{"chain_csv", (sim / "chain.csv").string()}}},
                                     {"estimate", {{"query_times", {0.1, 0.2}}}}},
                                    "estimate.json");
  const Outcome o = run({"estimate", "--config", cfg.string(), "--out", dir_.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(line_count(dir_ / "estimate.csv"), 3u);
  EXPECT_TRUE(fs::exists(dir_ / "estimate.json"));
}

TEST_F(Cli, StepwiseCommands) {
  const fs::path cfg = write_config(small_tcp());
  ASSERT_EQ(run({"cv-g", "--config", cfg.string(), "--out", dir_.string()}).code, 0);
  EXPECT_EQ(line_count(dir_ / "cv_G.csv"), 4u);
  ASSERT_EQ(run({"cv-f", "--config", cfg.string(), "--out", dir_.string()}).code, 0);
  EXPECT_EQ(line_count(dir_ / "cv_F.csv"), 7u);
  ASSERT_EQ(run({"select", "--config", cfg.string(), "--out", dir_.string()}).code, 0);
  const json sel = json::parse(slurp(dir_ / "selection.json"));
  EXPECT_TRUE(sel.contains("xi_star"));
  EXPECT_TRUE(fs::exists(dir_ / "kappa.csv"));
}

TEST_F(Cli, FullRunTcpEmitsEveryArtifact) {
  const fs::path cfg = write_config(small_tcp());
  const Outcome o = run({"full-run", "--config", cfg.string(), "--out", dir_.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  for (const char* f : {"report.json", "kappa.csv", "curve.csv", "cv_G.csv", "cv_F.csv",
                        "cv_G.json", "cv_F.json", "nu_grid.csv", "lambda_replicates.csv",
                        "lambda_by_index.csv"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
  EXPECT_EQ(line_count(dir_ / "nu_grid.csv"), 26u);
  const json report = json::parse(slurp(dir_ / "report.json"));
  EXPECT_TRUE(report["lambda_hat"].is_number());
  const fs::path again = dir_ / "again";
  ASSERT_EQ(run({"full-run", "--config", cfg.string(), "--out", again.string()}).code, 0);
  EXPECT_EQ(slurp(dir_ / "report.json"), slurp(again / "report.json"));
}

TEST_F(Cli, ReplicatesUseDistinctSeeds) {
  json doc = small_tcp();
  doc["replicates"] = 3;
  doc["fixed_alpha_G"] = 0.25;
  doc["fixed_F"] = {{"alpha", 0.2}, {"beta", 0.3}};
  const Outcome o =
      run({"full-run", "--config", write_config(doc).string(), "--out", dir_.string(), "--jobs", "2"});
  ASSERT_EQ(o.code, 0) << o.err;
  std::ifstream in(dir_ / "lambda_replicates.csv");
  std::string line;
  std::getline(in, line);
  std::vector<std::string> seeds;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string replicate;
    std::string seed;
    std::getline(fields, replicate, ',');
    std::getline(fields, seed, ',');
    seeds.push_back(seed);
  }
  ASSERT_EQ(seeds.size(), 3u);
  EXPECT_NE(seeds[0], seeds[1]);
  EXPECT_NE(seeds[1], seeds[2]);
  EXPECT_TRUE(fs::exists(dir_ / "replicates" / "report_002.json"));

  const Outcome summary = run({"report", (dir_ / "replicates" / "report_000.json").string(),
                               (dir_ / "replicates" / "report_001.json").string(),
                               (dir_ / "replicates" / "report_002.json").string()});
  ASSERT_EQ(summary.code, 0) << summary.err;
  EXPECT_NE(summary.out.find("median"), std::string::npos);
  EXPECT_NE(summary.out.find("IQR"), std::string::npos);
}

TEST_F(Cli, ReportSingleAndMissing) {
  ASSERT_EQ(run({"full-run", "--config", write_config(small_tcp()).string(), "--out", dir_.string()})
                .code,
            0);
  const Outcome one = run({"report", (dir_ / "report.json").string()});
  ASSERT_EQ(one.code, 0);
  EXPECT_NE(one.out.find("lambda_hat"), std::string::npos);
  EXPECT_EQ(one.out.find("median"), std::string::npos);
  const std::string missing = (dir_ / "nope.json").string();
  const Outcome bad = run({"report", missing});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find(missing), std::string::npos);
  std::ofstream(dir_ / "garbage.json") << "[1, 2";
  EXPECT_EQ(run({"report", (dir_ / "garbage.json").string()}).code, 2);
}

TEST_F(Cli, NoDataNearTheCurveExitsWithFour) {
  const json doc = {{"model", {{"name", "oracle"}}},
                    {"n", 500},
                    {"n_val", 100},
                    {"target_x", {5.0}},
                    {"curve_cap", 1.0},
                    {"alpha_grid", {0.2}},
                    {"beta_grid", {0.3}}};
  const Outcome o = run({"full-run", "--config", write_config(doc).string(), "--out", dir_.string()});
  EXPECT_EQ(o.code, 4);
  EXPECT_NE(o.err.find("estimation impossible"), std::string::npos);
}

TEST_F(Cli, BacteriaFullRun) {
  const json doc = {{"model", {{"name", "bacteria"}}},
                    {"n", 20000},
                    {"n_val", 2000},
                    {"bacteria", {{"angles", 2}, {"targets", {{0.0, 0.0}, {0.5, 0.0}}}}}};
  const Outcome o = run({"full-run", "--config", write_config(doc).string(), "--out", dir_.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(line_count(dir_ / "bacteria_estimates.csv"), 3u);
  EXPECT_EQ(line_count(dir_ / "bacteria_angles.csv"), 5u);
  EXPECT_EQ(run({"report", (dir_ / "report.json").string()}).code, 0);
}

TEST_F(Cli, BacteriaGetsWiderBandwidths) {
  const json doc = {{"model", {{"name", "bacteria"}}}, {"w0", 0.25}};
  const Outcome o = run({"print-config", "--config", write_config(doc).string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const json printed = json::parse(o.out);
  EXPECT_DOUBLE_EQ(printed.at("v0").get<double>(), 0.4);
  EXPECT_DOUBLE_EQ(printed.at("w0").get<double>(), 0.25);
  EXPECT_EQ(printed.at("n").get<std::size_t>(), 50000u);
}

TEST_F(Cli, CrackSimulateAndFullRun) {
  const json doc = {{"model", {{"name", "crack"}}}, {"n", 300}};
  const fs::path cfg = write_config(doc);
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", dir_.string()}).code, 0);
  EXPECT_EQ(line_count(dir_ / "crack_histories.csv"), 301u);
  const Outcome o = run({"full-run", "--config", cfg.string(), "--out", dir_.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(line_count(dir_ / "crack_lambda.csv"), 6u);
  EXPECT_TRUE(fs::exists(dir_ / "crack_criterion.csv"));
  const json report = json::parse(slurp(dir_ / "report.json"));
  EXPECT_TRUE(report.contains("units"));
  EXPECT_EQ(run({"cv-g", "--config", cfg.string()}).code, 2);
}

TEST_F(Cli, CrackIngestRejectsCurveFiles) {
  std::ofstream(dir_ / "curves.csv") << "history_id,cycle,a_mm\nA,0,9\nA,100,9.5\n";
  const json doc = {{"model", {{"name", "crack"}}},
                    {"inputs", {{"crack_histories_csv", (dir_ / "curves.csv").string()}}}};
  EXPECT_EQ(run({"full-run", "--config", write_config(doc).string(), "--out", dir_.string()}).code, 2);
}
