// Command-line front end: plan, run, minheap, analyze, report, simulate.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gcdistill/heapsize.hpp"
#include "gcdistill/ingest.hpp"
#include "gcdistill/orchestrate.hpp"
#include "gcdistill/pipeline.hpp"
#include "gcdistill/report.hpp"
#include "gcdistill/scenario.hpp"
#include "gcdistill/simcheck.hpp"

namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::string out = "gcdistill-out";
  std::optional<std::uint64_t> seed;
};

gcd::ExperimentConfig require_config(const Globals& g) {
  if (g.config.empty()) throw gcd::ConfigError("--config is required for this command");
  return gcd::load_config(g.config);
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw gcd::IoError(p.string(), "cannot open for writing");
  out << text;
}

gcd::ExperimentPlan plan_for(const Globals& g, const gcd::ExperimentConfig& cfg) {
  auto plan_path = fs::path(g.out) / "plan.json";
  if (fs::exists(plan_path)) {
    std::ifstream in(plan_path);
    return gcd::plan_from_json(nlohmann::json::parse(in));
  }
  auto plan = gcd::build_plan(cfg, g.seed);
  write_text(plan_path, gcd::to_json(plan).dump(2) + "\n");
  return plan;
}

struct AnalysisInputs {
  std::vector<gcd::InvocationRecord> records;
  gcd::AnalysisOptions options;
  std::set<std::string> exclusions;
};

AnalysisInputs load_for_analysis(const Globals& g, const std::vector<std::string>& metric_names, const std::string& pool,
                                 const std::string& mode, const std::vector<std::string>& exclude) {
  AnalysisInputs in;
  std::optional<gcd::ExperimentConfig> cfg;
  if (!g.config.empty()) cfg = gcd::load_config(g.config);
  std::vector<std::string> errors;
  in.records = gcd::load_logs(fs::path(g.out) / "logs", &errors);
  for (const auto& e : errors) std::cerr << "warning: " << e << "\n";
  auto manifest = fs::path(g.out) / "manifest.json";
  if (fs::exists(manifest)) gcd::apply_manifest(in.records, gcd::load_manifest(manifest));

  if (cfg) {
    in.options.metrics = cfg->metrics;
    in.options.mode = cfg->attribution;
    in.options.pool = gcd::pool_policy_from_string(cfg->pool);
    in.exclusions = cfg->exclusions;
  }
  if (!metric_names.empty()) {
    in.options.metrics.clear();
    for (const auto& m : metric_names) in.options.metrics.emplace_back(m);
  }
  if (!pool.empty()) in.options.pool = gcd::pool_policy_from_string(pool);
  if (!mode.empty()) in.options.mode = gcd::attribution_from_string(mode);
  in.exclusions.insert(exclude.begin(), exclude.end());
  return in;
}

std::string cells_csv(const gcd::AnalysisResult& res) {
  auto full = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string s =
      "benchmark,collector,heap_factor,metric,heap_mb,status,n,mdc";
  const gcd::Quantity qs[] = {gcd::Quantity::total, gcd::Quantity::explicit_cost, gcd::Quantity::distilled,
                              gcd::Quantity::lbo, gcd::Quantity::nlbo_reported, gcd::Quantity::stw_fraction};
  for (auto q : qs) s += "," + std::string(to_string(q)) + "_mean," + std::string(to_string(q)) + "_ci";
  s += "\n";
  for (const auto& c : res.cells) {
    std::string status;
    for (auto r : c.blank) status += (status.empty() ? "" : ";") + std::string(to_string(r));
    s += c.key.benchmark + "," + c.key.collector + "," + (c.key.heap_factor ? c.key.heap_factor->to_string() : "") + "," +
         c.key.metric.name + "," + std::to_string(c.config.heap_mb) + "," + (c.ok() ? "ok" : status) + "," +
         std::to_string(c.n()) + "," + (c.ok() ? full(c.mdc) : "");
    for (auto q : qs) {
      const auto& e = c.get(q);
      s += "," + (c.ok() ? full(e.mean) : std::string()) + "," +
           (c.ok() && e.ci_half_width ? full(*e.ci_half_width) : std::string());
    }
    s += "\n";
  }
  return s;
}

int cmd_plan(const Globals& g) {
  auto cfg = require_config(g);
  auto plan = gcd::build_plan(cfg, g.seed);
  auto path = fs::path(g.out) / "plan.json";
  write_text(path, gcd::to_json(plan).dump(2) + "\n");
  std::cout << plan.tasks.size() << " tasks written to " << path.string() << "\n";
  return 0;
}

int cmd_run(const Globals& g) {
  auto cfg = require_config(g);
  auto plan = plan_for(g, cfg);
  gcd::ExecuteOptions opt;
  opt.out_dir = g.out;
  auto manifest = gcd::execute_plan(plan, cfg, opt);
  std::size_t ok = 0;
  for (const auto& e : manifest.entries) ok += e.outcome == gcd::Outcome::completed;
  std::cout << ok << "/" << manifest.entries.size() << " invocations completed; manifest at "
            << (fs::path(g.out) / "manifest.json").string() << "\n";
  return 0;
}

int cmd_minheap(const Globals& g, const std::string& collector, std::int64_t lo, std::int64_t hi, std::int64_t gran,
                int repeats) {
  auto cfg = require_config(g);
  if (cfg.probe_path.empty() || !fs::exists(cfg.probe_path))
    throw gcd::ConfigError("probe agent not found at '" + cfg.probe_path.string() + "'");
  std::vector<gcd::MinHeapResult> results;
  auto dir = fs::path(g.out) / "minheap";
  fs::create_directories(dir);
  for (const auto& b : cfg.benchmarks) {
    int trial = 0;
    auto runner = [&](std::int64_t mb) {
      gcd::ConfigKey key{b, collector, mb, std::nullopt, {}};
      gcd::TaskContext ctx;
      ctx.log_path = dir / gcd::log_file_name(key, trial++);
      ctx.output_path = ctx.log_path;
      ctx.output_path.replace_extension(".out");
      ctx.argv = gcd::jvm_command(key, cfg, cfg.probe_path, ctx.log_path);
      ctx.timeout = std::chrono::seconds(cfg.timeout_s);
      auto r = gcd::run_process(ctx);
      if (r.outcome != gcd::Outcome::completed) return false;
      try {
        auto rec = gcd::parse_log_file(ctx.log_path);
        return rec.outcome == gcd::Outcome::completed && rec.iterations.size() == static_cast<std::size_t>(cfg.iterations);
      } catch (const gcd::Error&) {
        return false;
      }
    };
    auto r = gcd::find_min_heap(runner, lo, hi, gran, repeats, b, collector);
    std::cout << b << ": " << r.min_mb << " MB (" << r.trials.size() << " runs)\n";
    results.push_back(std::move(r));
  }
  gcd::write_min_heap_csv(fs::path(g.out) / "min_heap.csv", results);
  return 0;
}

int cmd_analyze(const Globals& g, const AnalysisInputs& in) {
  auto res = gcd::analyze(in.records, in.options);
  auto dir = fs::path(g.out) / "analysis";
  write_text(dir / "cells.csv", cells_csv(res));
  std::string pools = "benchmark,heap_factor,metric,mdc,argmin\n";
  for (const auto& p : res.pools) {
    pools += p.benchmark + "," + (p.heap_factor ? p.heap_factor->to_string() : "") + "," + p.metric.name + ",";
    if (p.mdc) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", p.mdc->mdc);
      pools += std::string(buf) + "," + p.mdc->argmin.label();
    } else {
      pools += ",";
    }
    pools += "\n";
  }
  write_text(dir / "pools.csv", pools);
  std::string diag;
  for (const auto& d : res.diagnostics) diag += d + "\n";
  write_text(dir / "diagnostics.txt", diag);
  std::cout << in.records.size() << " invocations, " << res.cells.size() << " cells, " << res.diagnostics.size()
            << " diagnostics -> " << dir.string() << "\n";
  return 0;
}

int cmd_report(const Globals& g, const AnalysisInputs& in) {
  auto res = gcd::analyze(in.records, in.options);
  auto curves = gcd::latency_curves(in.records);
  auto files = gcd::write_report(res, curves, g.out, in.exclusions);
  for (const auto& f : files) std::cout << f.string() << "\n";
  return 0;
}

int cmd_simulate(const Globals& g) {
  nlohmann::json j;
  if (g.config.empty()) {
    j = gcd::sim::default_scenario_json();
  } else {
    std::ifstream in(g.config);
    if (!in) throw gcd::IoError(g.config, "cannot open scenario");
    j = nlohmann::json::parse(in);
  }
  auto scenario = gcd::sim::scenario_from_json(j, g.seed);
  auto logs = fs::path(g.out) / "logs";
  fs::create_directories(logs);
  std::vector<gcd::InvocationRecord> records;
  std::vector<gcd::sim::GroundTruth> truths;
  nlohmann::json truth_json = nlohmann::json::array();
  for (int inv = 0; inv < scenario.invocations; ++inv) {
    for (const auto& gc : scenario.collectors) {
      auto [rec, truth] = gcd::sim::simulate_run(scenario.workload, gc, inv);
      gcd::write_log_file(logs / gcd::log_file_name(rec.config, inv), rec);
      nlohmann::json t{{"config", gcd::to_json(truth.config)}, {"invocation", inv}};
      for (const auto& [m, v] : truth.intrinsic) t["intrinsic"][m.name] = v;
      for (const auto& [m, v] : truth.true_explicit) t["true_explicit"][m.name] = v;
      for (const auto& [m, v] : truth.true_implicit) t["true_implicit"][m.name] = v;
      truth_json.push_back(std::move(t));
      records.push_back(std::move(rec));
      truths.push_back(std::move(truth));
    }
  }
  write_text(fs::path(g.out) / "truth.json", truth_json.dump(2) + "\n");
  auto verdict = gcd::sim::verify_bound(records, truths, scenario.workload.intrinsic.metrics());
  std::cout << records.size() << " logs written to " << logs.string() << "\n";
  std::cout << "bound " << (verdict.sound() ? "sound" : "VIOLATED") << " over " << verdict.checks.size() << " checks\n";
  for (const auto& v : verdict.violations) std::cout << "  " << v << "\n";
  return verdict.sound() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical lower bounds on garbage collection cost"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Experiment config (or simulation scenario) JSON");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for plan shuffling or simulation");

  auto* plan = app.add_subcommand("plan", "Expand the config into an interleaved invocation plan");
  auto* run = app.add_subcommand("run", "Execute (or resume) the plan, one JVM at a time");
  auto* minheap = app.add_subcommand("minheap", "Search the minimum heap of each benchmark");
  std::string mh_collector = "g1";
  std::int64_t mh_lo = 1, mh_hi = 4096, mh_gran = 1;
  int mh_repeats = 1;
  minheap->add_option("--collector", mh_collector, "Collector used for the search")->capture_default_str();
  minheap->add_option("--lo", mh_lo, "Lower bound in MB")->capture_default_str();
  minheap->add_option("--hi", mh_hi, "Upper bound in MB (must run)")->capture_default_str();
  minheap->add_option("--granularity", mh_gran, "Search step in MB")->capture_default_str();
  minheap->add_option("--repeats", mh_repeats, "Runs that must all succeed per size")->capture_default_str();

  std::vector<std::string> metrics, exclude;
  std::string pool, mode;
  auto* analyze = app.add_subcommand("analyze", "Distill logs under <out>/logs into cells");
  auto* report = app.add_subcommand("report", "Render tables and curve exports under <out>/report");
  for (auto* sc : {analyze, report}) {
    sc->add_option("--metric", metrics, "Metric to analyze (repeatable)");
    sc->add_option("--pool", pool, "MDC pool policy: per_heap or global");
    sc->add_option("--mode", mode, "Attribution: stw or threads");
    sc->add_option("--exclude", exclude, "Benchmark left out of geometric means (repeatable)");
  }
  auto* simulate = app.add_subcommand("simulate", "Emit synthetic logs with known ground truth");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*plan) return cmd_plan(g);
    if (*run) return cmd_run(g);
    if (*minheap) return cmd_minheap(g, mh_collector, mh_lo, mh_hi, mh_gran, mh_repeats);
    if (*analyze) return cmd_analyze(g, load_for_analysis(g, metrics, pool, mode, exclude));
    if (*report) return cmd_report(g, load_for_analysis(g, metrics, pool, mode, exclude));
    if (*simulate) return cmd_simulate(g);
  } catch (const gcd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
