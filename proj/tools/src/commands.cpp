#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "pdmp/pdmp.hpp"
#include "run_config.hpp"

namespace pdmp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::optional<std::string> out_dir;
};

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.jobs) {
    if (*o.jobs == 0) throw ConfigError("--jobs must be at least 1");
    c.pipeline.jobs = *o.jobs;
  }
  if (o.out_dir) c.output_dir = *o.out_dir;
  return c;
}

fs::path prepare_dir(const RunConfig& c) {
  const fs::path dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + c.output_dir + "': " + ec.message());
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  open_out(path) << text << (text.empty() || text.back() == '\n' ? "" : "\n");
}

std::vector<double> coords(const State& s) { return {s.begin(), s.end()}; }

void require_not_crack(const RunConfig& c, const char* command) {
  if (c.model == "crack") {
    throw ConfigError(std::string(command) + " is not available for the crack model; use full-run");
  }
}

struct StreamIds {
  std::uint64_t main = streams::main_chain;
  std::uint64_t validation = streams::validation_chain;
};

StreamIds replicate_streams(std::size_t r, std::size_t replicates) {
  if (replicates <= 1) return {};
  return {streams::replicate_main(r), streams::replicate_validation(r)};
}

struct Chains {
  std::shared_ptr<const EmbeddedChain> main;
  std::shared_ptr<const EmbeddedChain> val;
  bool approximate_split = false;
};

EmbeddedChain checked_read(const std::string& path, std::size_t dim) {
  EmbeddedChain c = read_chain_csv(path);
  if (!c.empty() && c.dim != dim) {
    throw DataError("chain file '" + path + "' has dimension " + std::to_string(c.dim) +
                    ", the model needs " + std::to_string(dim));
  }
  c.dim = dim;
  return c;
}

Chains obtain_chains(const RunConfig& c, const PdmpModel& model, StreamIds ids,
                     bool use_inputs = true) {
  const StreamFactory f(c.seed);
  Chains out;
  if (use_inputs && c.chain_csv) {
    out.main = std::make_shared<const EmbeddedChain>(checked_read(*c.chain_csv, model.dim()));
  } else {
    out.main = std::make_shared<const EmbeddedChain>(
        simulate_chain(model, c.start_state(), c.n, f.stream(ids.main)));
  }
  if (use_inputs && c.validation_csv) {
    out.val = std::make_shared<const EmbeddedChain>(checked_read(*c.validation_csv, model.dim()));
  } else if (c.n_val > 0) {
    out.val = std::make_shared<const EmbeddedChain>(
        simulate_chain(model, c.start_state(), c.n_val, f.stream(ids.validation)));
  } else {
    ChainSplit split = split_for_validation(*out.main);
    out.main = std::make_shared<const EmbeddedChain>(std::move(split.main));
    out.val = std::make_shared<const EmbeddedChain>(std::move(split.validation));
    out.approximate_split = true;
  }
  if (out.main->empty()) throw DataError("the main chain is empty");
  return out;
}

std::vector<CrackSwitch> obtain_crack_histories(const RunConfig& c) {
  if (c.crack_histories_csv) {
    CrackDataset data = ingest_crack_histories(*c.crack_histories_csv, c.crack_params.a_final);
    if (!data.curves.empty()) {
      throw DataError("crack history file '" + *c.crack_histories_csv +
                      "' holds full growth curves; switch records (history_id,m,a_switch_mm) "
                      "are required");
    }
    return data.switches;
  }
  const StreamFactory f(c.seed);
  return generate_crack_histories(c.crack_params, build_crack_rate(c.crack_rate), c.n,
                                  f.stream(streams::main_chain));
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const fs::path dir = prepare_dir(c);
  const StreamFactory f(c.seed);
  json meta = {{"model", c.model},
               {"seed", c.seed},
               {"n", c.n},
               {"streams",
                {{"main", f.derived_seed(streams::main_chain)},
                 {"validation", f.derived_seed(streams::validation_chain)}}}};
  if (c.model == "crack") {
    const std::vector<CrackSwitch> sw = obtain_crack_histories(c);
    auto hist = open_out(dir / "crack_histories.csv");
    write_crack_switches(hist, sw);
    write_chain_csv((dir / "chain.csv").string(), crack_switch_chain(c.crack_params, sw));
    meta["n"] = sw.size();
    write_text(dir / "simulate.json", meta.dump(2));
    out << "wrote " << sw.size() << " crack histories to " << dir.string() << '\n';
    return kExitOk;
  }
  const PdmpModel model = build_model(c);
  const State x0 = c.start_state();
  const EmbeddedChain main = simulate_chain(model, x0, c.n, f.stream(streams::main_chain));
  write_chain_csv((dir / "chain.csv").string(), main);
  meta["n_val"] = c.n_val;
  meta["x0"] = coords(x0);
  if (c.n_val > 0) {
    write_chain_csv((dir / "validation.csv").string(),
                    simulate_chain(model, x0, c.n_val, f.stream(streams::validation_chain)));
  }
  write_text(dir / "simulate.json", meta.dump(2));
  out << "wrote " << main.size() << " records to " << (dir / "chain.csv").string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- estimate

int cmd_estimate(const RunConfig& c, std::ostream& out) {
  require_not_crack(c, "estimate");
  validate_for_estimation(c);
  if (c.estimate.query_times.empty()) throw ConfigError("estimate.query_times must be nonempty");
  const PdmpModel model = build_model(c);
  const Chains chains = obtain_chains(c, model, {});
  const std::size_t d = model.dim();
  const BandwidthSchedule schedule{c.pipeline.v0, c.pipeline.w0, c.estimate.alpha,
                                   c.estimate.beta, d};
  std::vector<QueryPoint> queries;
  for (double t : c.estimate.query_times) queries.push_back({c.target_state(), t});
  StreamingEstimator est(schedule, pipeline_kernels(c.pipeline, d), queries);
  est.accumulate(*chains.main);

  const fs::path dir = prepare_dir(c);
  write_text(dir / "estimate.json", estimator_snapshot_json(est));
  auto csv = open_out(dir / "estimate.csv");
  for (std::size_t k = 1; k <= d; ++k) csv << "x_" << k << ',';
  csv << "t,F,G,nu,f,survival,lambda\n";
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const RawEstimate r = est.eval_raw(i);
    for (double v : queries[i].x) csv << format_double(v) << ',';
    csv << format_double(queries[i].t) << ',' << format_double(r.F) << ','
        << format_double(r.G) << ',' << format_double(r.nu) << ','
        << format_double(estimate_f(r)) << ',' << format_double(estimate_G(r)) << ','
        << format_double(estimate_lambda_phi(r)) << '\n';
  }
  out << "evaluated " << queries.size() << " queries on " << est.count() << " records\n";
  return kExitOk;
}

// ---------------------------------------------------------------- cv-g / cv-f / select

struct Prepared {
  PdmpModel model;
  Chains chains;
  std::shared_ptr<const ChainIndex> index;
  ReverseCurve curve;
  KernelPair kernels;
};

Prepared prepare(const RunConfig& c) {
  validate_for_estimation(c);
  PdmpModel model = build_model(c);
  Chains chains = obtain_chains(c, model, {});
  auto index = make_chain_index(chains.main, c.pipeline.v0);
  ReverseCurve curve = pipeline_curve(model, c.target_state(), c.pipeline);
  KernelPair kernels = pipeline_kernels(c.pipeline, model.dim());
  return {std::move(model), std::move(chains), std::move(index), std::move(curve),
          std::move(kernels)};
}

CvReport run_cv_G(const RunConfig& c, const Prepared& p) {
  const CvProblem problem = make_cv_problem(p.model, p.index, p.chains.val, p.curve, c.pipeline.rho,
                                            p.kernels, c.pipeline.v0, c.pipeline.w0);
  CvReport r = choose_alpha_G(problem, c.pipeline.alpha_grid, c.pipeline.jobs);
  r.approximate_split = p.chains.approximate_split;
  return r;
}

void write_cv(const fs::path& dir, const std::string& stem, const CvReport& r) {
  write_text(dir / (stem + ".json"), cv_report_json(r));
  auto csv = open_out(dir / (stem + ".csv"));
  write_cv_csv(csv, r);
}

int cmd_cv_g(const RunConfig& c, std::ostream& out) {
  require_not_crack(c, "cv-g");
  const Prepared p = prepare(c);
  const CvReport r = run_cv_G(c, p);
  write_cv(prepare_dir(c), "cv_G", r);
  out << "alpha_G = " << r.chosen_alpha << " (" << r.hit_count << " tube hits)\n";
  return kExitOk;
}

int cmd_cv_f(const RunConfig& c, std::ostream& out) {
  require_not_crack(c, "cv-f");
  const Prepared p = prepare(c);
  const CvProblem problem = make_cv_problem(p.model, p.index, p.chains.val, p.curve,
                                            c.pipeline.rho_f, p.kernels, c.pipeline.v0,
                                            c.pipeline.w0);
  CvReport r = choose_alpha_beta_F(problem, c.pipeline.alpha_grid, c.pipeline.beta_grid,
                                   c.pipeline.rho2, c.pipeline.jobs);
  r.approximate_split = p.chains.approximate_split;
  write_cv(prepare_dir(c), "cv_F", r);
  out << "alpha_F = " << r.chosen_alpha << ", beta_F = " << r.chosen_beta << " ("
      << r.window_hit_count << " window hits)\n";
  return kExitOk;
}

int cmd_select(const RunConfig& c, std::ostream& out) {
  require_not_crack(c, "select");
  const Prepared p = prepare(c);
  const fs::path dir = prepare_dir(c);
  double alpha = 0.0;
  if (c.pipeline.fixed_alpha_G) {
    alpha = *c.pipeline.fixed_alpha_G;
  } else {
    const CvReport cv = run_cv_G(c, p);
    write_cv(dir, "cv_G", cv);
    alpha = cv.chosen_alpha;
  }
  const std::size_t d = p.model.dim();
  const BatchEstimator g(p.index, {c.pipeline.v0, c.pipeline.w0, alpha, alpha, d}, p.kernels);
  const double delta = c.pipeline.delta > 0.0 ? c.pipeline.delta
                                              : std::max(p.kernels.spatial.support_radius(),
                                                         p.kernels.temporal.support_radius());
  const SelectionReport s = select_xi_star(
      p.curve, criterion_profile(g, p.curve),
      node_feasibility(p.model, p.curve, c.pipeline.v0, c.pipeline.w0, delta),
      SelectionOptions{c.pipeline.strict_feasibility});
  write_text(dir / "selection.json", selection_report_json(s));
  auto csv = open_out(dir / "kappa.csv");
  write_kappa_csv(csv, s);
  out << "xi* = " << to_string(s.xi_star) << " at tau = " << s.tau_star << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- full-run

void write_nu_grid(const fs::path& path, const RunConfig& c, const PipelineResult& r,
                   const std::shared_ptr<const EmbeddedChain>& main) {
  const std::size_t d = main->dim;
  if (d > 2 || c.nu_grid_points == 0) return;
  const BatchEstimator est(main, {c.pipeline.v0, c.pipeline.w0, r.alpha_G, r.alpha_G, d},
                           pipeline_kernels(c.pipeline, d));
  auto csv = open_out(path);
  csv << (d == 1 ? "x_1,nu\n" : "x_1,x_2,nu\n");
  const std::size_t m = c.nu_grid_points;
  auto at = [m](std::size_t i) { return (static_cast<double>(i) + 0.5) / static_cast<double>(m); };
  for (std::size_t i = 0; i < m; ++i) {
    if (d == 1) {
      csv << format_double(at(i)) << ','
          << format_double(est.eval_raw(QueryPoint{State{at(i)}, 0.0}).nu) << '\n';
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) {
      const State x{at(i), at(j)};
      csv << format_double(x[0]) << ',' << format_double(x[1]) << ','
          << format_double(est.eval_raw(QueryPoint{x, 0.0}).nu) << '\n';
    }
  }
}

int full_run_generic(const RunConfig& c, std::ostream& out) {
  const PdmpModel model = build_model(c);
  const fs::path dir = prepare_dir(c);
  const std::size_t R = c.replicates;
  const StreamFactory f(c.seed);
  PipelineConfig pc = c.pipeline;
  const unsigned outer_jobs = R > 1 ? c.pipeline.jobs : 1;
  if (R > 1) pc.jobs = 1;

  std::vector<std::optional<PipelineResult>> results(R);
  std::vector<Chains> chains(R);
  parallel_for(R, outer_jobs, [&](std::size_t r) {
    // Input files only make sense for a single run.
    chains[r] = obtain_chains(c, model, replicate_streams(r, R), R == 1);
    PipelineConfig local = pc;
    local.approximate_split = chains[r].approximate_split;
    results[r] = run_pipeline(model, chains[r].main, chains[r].val, c.target_state(), local);
  });

  const PipelineResult& first = *results[0];
  const std::size_t d = model.dim();
  write_text(dir / "report.json",
             pipeline_report_json(first, c.model, chains[0].main->size(), chains[0].val->size()));
  {
    auto csv = open_out(dir / "kappa.csv");
    write_kappa_csv(csv, first.selection, first.nu_profile, first.lambda_profile);
  }
  {
    auto csv = open_out(dir / "curve.csv");
    write_curve_csv(csv, first.curve);
  }
  if (first.cv_G) write_cv(dir, "cv_G", *first.cv_G);
  if (first.cv_F) write_cv(dir, "cv_F", *first.cv_F);
  write_nu_grid(dir / "nu_grid.csv", c, first, chains[0].main);

  if (R > 1) fs::create_directories(dir / "replicates");
  auto reps = open_out(dir / "lambda_replicates.csv");
  reps << "replicate,seed_main,seed_val,lambda_hat";
  for (std::size_t k = 1; k <= d; ++k) reps << ",xi_star_" << k;
  reps << ",tau_star,alpha_G,alpha_F,beta_F,standard_error\n";
  auto by_index = open_out(dir / "lambda_by_index.csv");
  by_index << "replicate,j,tau";
  for (std::size_t k = 1; k <= d; ++k) by_index << ",xi_" << k;
  by_index << ",kappa,lambda\n";
  for (std::size_t r = 0; r < R; ++r) {
    const PipelineResult& res = *results[r];
    const StreamIds ids = replicate_streams(r, R);
    reps << r << ',' << f.derived_seed(ids.main) << ',' << f.derived_seed(ids.validation) << ','
         << format_double(res.selection.lambda_hat);
    for (double v : res.selection.xi_star) reps << ',' << format_double(v);
    reps << ',' << format_double(res.selection.tau_star) << ',' << format_double(res.alpha_G)
         << ',' << format_double(res.alpha_F) << ',' << format_double(res.beta_F) << ','
         << format_double(res.selection.standard_error) << '\n';
    for (std::size_t j = 0; j < res.curve.size(); ++j) {
      const CurveNode& node = res.curve.node(j);
      by_index << r << ',' << j << ',' << format_double(node.tau);
      for (double v : node.xi) by_index << ',' << format_double(v);
      by_index << ',' << format_double(res.selection.kappa[j]) << ','
               << format_double(res.lambda_profile[j]) << '\n';
    }
    if (R > 1) {
      std::ostringstream name;
      name << "report_" << std::setw(3) << std::setfill('0') << r << ".json";
      write_text(dir / "replicates" / name.str(),
                 pipeline_report_json(res, c.model, chains[r].main->size(),
                                      chains[r].val->size()));
    }
  }
  out << "lambda_hat = " << first.selection.lambda_hat << " at xi* = "
      << to_string(first.selection.xi_star);
  if (R > 1) out << " (replicate 0 of " << R << ")";
  out << "\nwrote reports to " << dir.string() << '\n';
  return kExitOk;
}

int full_run_bacteria(const RunConfig& c, std::ostream& out) {
  const PdmpModel model = build_model(c);
  for (const auto& t : c.bacteria_targets) {
    if (!(t[0] * t[0] + t[1] * t[1] < 1.0)) {
      throw ConfigError("bacteria target (" + format_double(t[0]) + ", " + format_double(t[1]) +
                        ") lies outside the unit disc");
    }
  }
  if (c.bacteria_angles == 0) throw ConfigError("bacteria.angles must be at least 1");
  const Chains chains = obtain_chains(c, model, {});
  PipelineConfig pc = c.pipeline;
  pc.approximate_split = chains.approximate_split;
  pc.jobs = 1;
  std::vector<BacteriaEstimate> estimates(c.bacteria_targets.size());
  parallel_for(estimates.size(), c.pipeline.jobs, [&](std::size_t i) {
    estimates[i] = estimate_bacteria_rate(model, chains.main, chains.val, c.bacteria_targets[i],
                                          pc, c.bacteria_angles);
  });

  const fs::path dir = prepare_dir(c);
  auto agg = open_out(dir / "bacteria_estimates.csv");
  agg << "x_1,x_2,lambda_aggregated\n";
  auto angles = open_out(dir / "bacteria_angles.csv");
  angles << "x_1,x_2,angle,lambda,xi_star_1,xi_star_2,xi_star_3,alpha_G,alpha_F,beta_F\n";
  json rows = json::array();
  for (const BacteriaEstimate& e : estimates) {
    agg << format_double(e.position[0]) << ',' << format_double(e.position[1]) << ','
        << format_double(e.aggregated) << '\n';
    for (std::size_t k = 0; k < e.angles.size(); ++k) {
      const PipelineResult& run = e.runs[k];
      angles << format_double(e.position[0]) << ',' << format_double(e.position[1]) << ','
             << format_double(e.angles[k]) << ',' << format_double(e.per_angle[k]);
      for (double v : e.xi_star[k]) angles << ',' << format_double(v);
      angles << ',' << format_double(run.alpha_G) << ',' << format_double(run.alpha_F) << ','
             << format_double(run.beta_F) << '\n';
    }
    rows.push_back({{"x", {e.position[0], e.position[1]}},
                    {"lambda_hat", e.aggregated},
                    {"per_angle", e.per_angle}});
  }
  const json report = {{"model", "bacteria"},
                       {"n_main", chains.main->size()},
                       {"n_val", chains.val->size()},
                       {"angles", c.bacteria_angles},
                       {"estimates", rows}};
  write_text(dir / "report.json", report.dump(2));
  for (const BacteriaEstimate& e : estimates) {
    out << "(" << e.position[0] << ", " << e.position[1] << "): lambda_hat = " << e.aggregated
        << '\n';
  }
  out << "wrote reports to " << dir.string() << '\n';
  return kExitOk;
}

int full_run_crack(const RunConfig& c, std::ostream& out) {
  const std::vector<CrackSwitch> sw = obtain_crack_histories(c);
  if (sw.empty()) throw DataError("no crack histories to estimate from");
  const auto chain =
      std::make_shared<const EmbeddedChain>(crack_switch_chain(c.crack_params, sw));
  const std::vector<double> grid = crack_m_grid(c.crack_params, c.crack.m_step);
  std::vector<CrackEstimate> estimates(c.crack.targets_mm.size());
  parallel_for(estimates.size(), c.pipeline.jobs, [&](std::size_t i) {
    estimates[i] = estimate_crack_rate(c.crack_params, chain, c.crack.targets_mm[i], grid,
                                       c.crack.estimator);
  });

  const fs::path dir = prepare_dir(c);
  {
    auto hist = open_out(dir / "crack_histories.csv");
    write_crack_switches(hist, sw);
  }
  auto crit = open_out(dir / "crack_criterion.csv");
  crit << "a_mm,m,tau_cycles,kappa\n";
  auto lam = open_out(dir / "crack_lambda.csv");
  lam << "a_mm,m_star,tau_star_cycles,lambda_hat_per_cycle\n";
  json rows = json::array();
  for (const CrackEstimate& e : estimates) {
    for (std::size_t j = 0; j < e.m.size(); ++j) {
      crit << format_double(e.a) << ',' << format_double(e.m[j]) << ','
           << format_double(e.tau[j]) << ',' << format_double(e.kappa[j]) << '\n';
    }
    lam << format_double(e.a) << ',' << format_double(e.m_star) << ','
        << format_double(e.tau_star) << ',' << format_double(e.lambda_hat) << '\n';
    rows.push_back({{"a_mm", e.a},
                    {"m_star", e.m_star},
                    {"tau_star", e.tau_star},
                    {"lambda_hat", e.lambda_hat}});
  }
  std::size_t censored = 0;
  for (const CrackSwitch& s : sw) censored += s.censored ? 1 : 0;
  const json report = {
      {"model", "crack"},
      {"units",
       "lengths in mm, stress in MPa, stress intensity in MPa sqrt(mm), time in cycles, "
       "lambda per cycle; C carries the units making da/dN = C dK^m in mm/cycle"},
      {"n_histories", sw.size()},
      {"censored", censored},
      {"estimates", rows}};
  write_text(dir / "report.json", report.dump(2));
  for (const CrackEstimate& e : estimates) {
    out << "a = " << e.a << " mm: m* = " << e.m_star << ", lambda_hat = " << e.lambda_hat
        << " per cycle\n";
  }
  out << "wrote reports to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_full_run(const RunConfig& c, std::ostream& out) {
  validate_for_estimation(c);
  if (c.model == "bacteria") return full_run_bacteria(c, out);
  if (c.model == "crack") return full_run_crack(c, out);
  return full_run_generic(c, out);
}

// ---------------------------------------------------------------- report

json read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report '" + path + "'");
  try {
    json doc = json::parse(in);
    if (!doc.is_object() || !doc.contains("model")) {
      throw DataError("report '" + path + "' has no model field");
    }
    return doc;
  } catch (const json::exception& e) {
    throw DataError("report '" + path + "' is not valid JSON: " + e.what());
  }
}

std::string fmt(const json& v) {
  if (v.is_null()) return "n/a";
  std::ostringstream s;
  if (v.is_array()) {
    s << '(';
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ", " : "") << fmt(v[i]);
    s << ')';
    return s.str();
  }
  if (v.is_number()) {
    s << std::setprecision(6) << v.get<double>();
    return s.str();
  }
  return v.dump();
}

// Linear interpolation between order statistics.
double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void print_block(std::ostream& out, const std::string& path, const json& r) {
  out << "report " << path << '\n';
  out << "  model " << r.at("model").get<std::string>();
  if (r.contains("n_main")) out << ", n = " << fmt(r["n_main"]);
  if (r.contains("n_val")) out << ", n_val = " << fmt(r["n_val"]);
  if (r.contains("n_histories")) out << ", histories = " << fmt(r["n_histories"]);
  out << '\n';
  if (r.contains("estimates")) {
    for (const json& e : r.at("estimates")) {
      if (e.contains("a_mm")) {
        out << "  a = " << fmt(e["a_mm"]) << " mm  m* = " << fmt(e["m_star"])
            << "  lambda_hat = " << fmt(e["lambda_hat"]) << '\n';
      } else {
        out << "  x = " << fmt(e["x"]) << "  lambda_hat = " << fmt(e["lambda_hat"]) << '\n';
      }
    }
    return;
  }
  out << "  lambda_hat  " << fmt(r.value("lambda_hat", json())) << "  (plug-in SE "
      << fmt(r.value("standard_error", json())) << ")\n";
  out << "  xi*         " << fmt(r.value("xi_star", json())) << "  tau* "
      << fmt(r.value("tau_star", json())) << '\n';
  out << "  alpha_G     " << fmt(r.value("alpha_G", json())) << "  (alpha_F, beta_F) ("
      << fmt(r.value("alpha_F", json())) << ", " << fmt(r.value("beta_F", json())) << ")\n";
  if (r.contains("selection") && r["selection"].contains("flags")) {
    for (const json& flag : r["selection"]["flags"]) out << "  flag: " << flag.get<std::string>() << '\n';
  }
}

int cmd_report(const std::vector<std::string>& paths, std::ostream& out) {
  if (paths.empty()) throw ConfigError("report needs at least one report file");
  std::vector<json> docs;
  for (const std::string& p : paths) docs.push_back(read_report(p));
  std::vector<double> lambdas;
  std::vector<double> xi1;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    print_block(out, paths[i], docs[i]);
    const json& d = docs[i];
    if (d.contains("lambda_hat") && d["lambda_hat"].is_number()) {
      lambdas.push_back(d["lambda_hat"].get<double>());
      if (d.contains("xi_star") && d["xi_star"].is_array() && !d["xi_star"].empty()) {
        xi1.push_back(d["xi_star"][0].get<double>());
      }
    }
  }
  if (lambdas.size() > 1) {
    out << "summary over " << lambdas.size() << " reports\n";
    out << "  lambda_hat  median " << fmt(quantile(lambdas, 0.5)) << "  IQR ["
        << fmt(quantile(lambdas, 0.25)) << ", " << fmt(quantile(lambdas, 0.75)) << "]\n";
    if (xi1.size() == lambdas.size()) {
      out << "  xi*_1       median " << fmt(quantile(xi1, 0.5)) << "  IQR ["
          << fmt(quantile(xi1, 0.25)) << ", " << fmt(quantile(xi1, 0.75)) << "]\n";
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonparametric jump-rate estimation for piecewise-deterministic Markov processes",
               "pdmp"};
  app.require_subcommand(1);
  Overrides ov;
  std::vector<std::string> report_paths;

  auto add_common = [&ov](CLI::App* sub) {
    sub->add_option("--config", ov.config_path, "JSON run configuration");
    sub->add_option("--seed", ov.seed, "Master seed (overrides the config)");
    sub->add_option("--jobs", ov.jobs, "Worker threads (overrides the config)");
    sub->add_option("--out", ov.out_dir, "Output directory (overrides the config)");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "Simulate the main and validation chains");
  CLI::App* estimate = app.add_subcommand("estimate", "Evaluate the kernel sums at the target");
  CLI::App* cv_g = app.add_subcommand("cv-g", "Cross-validate the survival exponent");
  CLI::App* cv_f = app.add_subcommand("cv-f", "Cross-validate the joint-density exponents");
  CLI::App* select = app.add_subcommand("select", "Select the upstream point on the reverse curve");
  CLI::App* full = app.add_subcommand("full-run", "Run the whole estimation procedure");
  CLI::App* report = app.add_subcommand("report", "Summarize report JSON files");
  CLI::App* print = app.add_subcommand("print-config", "Print the effective configuration");
  for (CLI::App* sub : {simulate, estimate, cv_g, cv_f, select, full, print}) add_common(sub);
  report->add_option("reports", report_paths, "Report JSON files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*report) return cmd_report(report_paths, out);
    const RunConfig c = resolve(ov);
    if (*print) {
      out << config_to_json(c) << '\n';
      return kExitOk;
    }
    if (*simulate) return cmd_simulate(c, out);
    if (*estimate) return cmd_estimate(c, out);
    if (*cv_g) return cmd_cv_g(c, out);
    if (*cv_f) return cmd_cv_f(c, out);
    if (*select) return cmd_select(c, out);
    if (*full) return cmd_full_run(c, out);
  } catch (const SelectionImpossible& e) {
    err << "estimation impossible: " << e.what() << '\n';
    return kExitEstimation;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SimulationError& e) {
    err << "simulation error: " << e.what() << '\n';
    return kExitSimulation;
  } catch (const NumericalFlowError& e) {
    err << "simulation error: " << e.what() << '\n';
    return kExitSimulation;
  } catch (const ModelContractError& e) {
    err << "simulation error: " << e.what() << '\n';
    return kExitSimulation;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace pdmp::cli
