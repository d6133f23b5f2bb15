#pragma once

// Records -> per-configuration distillation -> MDC pools -> cells.

#include <algorithm>
#include <filesystem>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gcdistill/distill.hpp"
#include "gcdistill/ingest.hpp"
#include "gcdistill/latency.hpp"
#include "gcdistill/model.hpp"
#include "gcdistill/stats.hpp"

namespace gcd {

enum class PoolPolicy {
  per_heap,  // one pool per (benchmark, heap factor); factorless configs join every pool
  global,    // one pool per benchmark
};

inline PoolPolicy pool_policy_from_string(std::string_view s) {
  if (s == "per_heap") return PoolPolicy::per_heap;
  if (s == "global") return PoolPolicy::global;
  throw ConfigError("unknown pool policy '" + std::string(s) + "'");
}

struct AnalysisOptions {
  std::vector<MetricId> metrics;  // empty: every metric common to all completed measured iterations
  AttributionMode mode = AttributionMode::stw_pauses;
  PoolPolicy pool = PoolPolicy::per_heap;
  double level = 0.95;
};

struct PoolResult {
  std::string benchmark;
  std::optional<HeapFactor> heap_factor;
  MetricId metric;
  std::optional<MdcPool> mdc;  // absent when no member has samples
};

struct AnalysisResult {
  std::vector<CellResult> cells;
  std::vector<PoolResult> pools;
  std::vector<std::string> diagnostics;
  std::vector<MetricId> metrics;
};

inline std::string collector_label(const ConfigKey& k) {
  std::string s = k.collector;
  for (const auto& f : k.extra_flags) s += " " + f;
  return s;
}

namespace detail {

inline std::vector<MetricId> common_metrics(const std::vector<InvocationRecord>& recs) {
  std::optional<std::set<MetricId>> common;
  for (const auto& r : recs) {
    if (r.outcome != Outcome::completed || r.iterations.empty()) continue;
    auto ms = r.measured().ctr_at_start.metrics();
    std::set<MetricId> s(ms.begin(), ms.end());
    if (!common) {
      common = std::move(s);
    } else {
      std::set<MetricId> keep;
      std::set_intersection(common->begin(), common->end(), s.begin(), s.end(), std::inserter(keep, keep.end()));
      common = std::move(keep);
    }
  }
  if (!common) return {metrics::wall_time_ns};
  common->insert(metrics::wall_time_ns);
  // wall time first, the rest alphabetical
  std::vector<MetricId> out{metrics::wall_time_ns};
  for (const auto& m : *common)
    if (m != metrics::wall_time_ns) out.push_back(m);
  return out;
}

}  // namespace detail

inline AnalysisResult analyze(const std::vector<InvocationRecord>& records, const AnalysisOptions& opt = {}) {
  AnalysisResult res;
  res.metrics = opt.metrics.empty() ? detail::common_metrics(records) : opt.metrics;

  std::map<ConfigKey, std::vector<const InvocationRecord*>> by_config;
  for (const auto& r : records) by_config[r.config].push_back(&r);

  // Pool assignment.
  std::map<std::pair<std::string, std::optional<HeapFactor>>, std::set<ConfigKey>> pools;
  if (opt.pool == PoolPolicy::global) {
    for (const auto& [k, _] : by_config) pools[{k.benchmark, std::nullopt}].insert(k);
  } else {
    std::map<std::string, std::set<HeapFactor>> factors;
    for (const auto& [k, _] : by_config)
      if (k.heap_factor) factors[k.benchmark].insert(*k.heap_factor);
    for (const auto& [k, _] : by_config) {
      if (k.heap_factor) {
        pools[{k.benchmark, k.heap_factor}].insert(k);
      } else if (factors.count(k.benchmark)) {
        for (const auto& f : factors[k.benchmark]) pools[{k.benchmark, f}].insert(k);
      } else {
        pools[{k.benchmark, std::nullopt}].insert(k);
      }
    }
  }

  for (const auto& metric : res.metrics) {
    struct ConfigSamples {
      std::set<BlankReason> blank;
      std::vector<DistilledSample> samples;
      double mean_distilled = 0;
    };
    std::map<ConfigKey, ConfigSamples> per_config;
    for (const auto& [k, recs] : by_config) {
      auto& cs = per_config[k];
      for (const auto* r : recs) {
        if (r->outcome != Outcome::completed) {
          cs.blank.insert(blank_reason_of(r->outcome));
          continue;
        }
        try {
          auto s = distilled_cost(*r, metric, opt.mode);
          if (s.diagnostic) res.diagnostics.push_back(r->config.label() + " inv" + std::to_string(r->invocation_index) + ": " + *s.diagnostic);
          cs.samples.push_back(std::move(s));
        } catch (const Error& e) {
          res.diagnostics.push_back(r->config.label() + ": " + e.what());
          cs.blank.insert(BlankReason::insufficient_samples);
        }
      }
      if (cs.samples.empty() && cs.blank.empty()) cs.blank.insert(BlankReason::insufficient_samples);
      if (cs.blank.empty()) {
        double sum = 0;
        for (const auto& s : cs.samples) sum += static_cast<double>(s.distilled);
        cs.mean_distilled = sum / static_cast<double>(cs.samples.size());
      }
    }

    for (const auto& [pk, members] : pools) {
      PoolResult pr;
      pr.benchmark = pk.first;
      pr.heap_factor = pk.second;
      pr.metric = metric;
      std::map<ConfigKey, double> means;
      std::set<ConfigKey> ok_members;
      for (const auto& k : members) {
        const auto& cs = per_config.at(k);
        if (cs.blank.empty()) {
          means[k] = cs.mean_distilled;
          ok_members.insert(k);
        }
      }
      if (!ok_members.empty()) pr.mdc = compute_mdc(means, ok_members, metric);
      if (pr.mdc && !(pr.mdc->mdc > 0)) {
        res.diagnostics.push_back(pk.first + " " + metric.name + ": MDC is zero; pool left blank");
        pr.mdc.reset();
      }

      for (const auto& k : members) {
        const auto& cs = per_config.at(k);
        CellResult cell;
        cell.key = {k.benchmark, collector_label(k), opt.pool == PoolPolicy::global ? k.heap_factor : pk.second, metric};
        cell.config = k;
        cell.blank = cs.blank;
        if (!pr.mdc && cell.blank.empty()) cell.blank.insert(BlankReason::insufficient_samples);
        if (cell.ok()) {
          cell.mdc = pr.mdc->mdc;
          std::vector<double> tot, exp, dist, lb, nl, stw;
          for (const auto& s : cs.samples) {
            tot.push_back(static_cast<double>(s.total));
            exp.push_back(static_cast<double>(s.explicit_cost));
            dist.push_back(static_cast<double>(s.distilled));
            double l = lbo(static_cast<double>(s.total), cell.mdc);
            lb.push_back(l);
            nl.push_back(nlbo(l, cell.mdc).reported);
            if (s.total > 0) stw.push_back(static_cast<double>(s.explicit_cost) / static_cast<double>(s.total));
          }
          cell.total = Estimate::of(tot, opt.level);
          cell.explicit_cost = Estimate::of(exp, opt.level);
          cell.distilled = Estimate::of(dist, opt.level);
          cell.lbo = Estimate::of(lb, opt.level);
          cell.nlbo_reported = Estimate::of(nl, opt.level);
          cell.stw_fraction = Estimate::of(stw, opt.level);
        }
        res.cells.push_back(std::move(cell));
      }
      res.pools.push_back(std::move(pr));
    }
  }
  return res;
}

// Reads every *.jsonl under dir. Files that fail to parse are reported, not
// fatal.
inline std::vector<InvocationRecord> load_logs(const std::filesystem::path& dir, std::vector<std::string>* errors = nullptr) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::exists(dir)) throw IoError(dir.string(), "log directory does not exist");
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<InvocationRecord> out;
  for (const auto& f : files) {
    try {
      out.push_back(parse_log_file(f));
    } catch (const Error& e) {
      if (errors) errors->push_back(f.string() + ": " + e.what());
    }
  }
  return out;
}

struct CurveSet {
  std::string benchmark;
  std::string kind;  // pause, simple, metered
  std::vector<PercentileCurve> curves;
};

// Percentile curves per benchmark, pooling the measured iteration of every
// completed invocation of a configuration.
inline std::vector<CurveSet> latency_curves(const std::vector<InvocationRecord>& records,
                                            const std::vector<double>& percentiles = default_percentiles()) {
  std::map<std::string, std::map<std::string, std::map<std::string, std::vector<Nanos>>>> data;  // bench -> kind -> label
  for (const auto& r : records) {
    if (r.outcome != Outcome::completed || r.iterations.empty()) continue;
    const auto& it = r.measured();
    std::string label = collector_label(r.config) + "@" +
                        (r.config.heap_factor ? r.config.heap_factor->display() + "x" : std::to_string(r.config.heap_mb) + "mb");
    auto& pause = data[r.config.benchmark]["pause"][label];
    for (const auto& p : it.pauses) pause.push_back(p.end_ns - p.start_ns);
    if (it.requests) {
      auto s = simple_latency(*it.requests);
      auto m = metered_latency(*it.requests);
      auto& sv = data[r.config.benchmark]["simple"][label];
      auto& mv = data[r.config.benchmark]["metered"][label];
      sv.insert(sv.end(), s.begin(), s.end());
      mv.insert(mv.end(), m.begin(), m.end());
    }
  }
  std::vector<CurveSet> out;
  for (auto& [bench, kinds] : data) {
    for (auto& [kind, labels] : kinds) {
      CurveSet cs{bench, kind, {}};
      for (auto& [label, values] : labels) {
        auto c = percentile_curve(std::move(values), percentiles, label);
        if (!c.empty()) cs.curves.push_back(std::move(c));
      }
      if (!cs.curves.empty()) out.push_back(std::move(cs));
    }
  }
  return out;
}

}  // namespace gcd
