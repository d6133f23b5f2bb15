#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gcdistill/error.hpp"
#include "gcdistill/model.hpp"

namespace gcd {

// How costs that are unambiguously GC are identified.
enum class AttributionMode {
  stw_pauses,  // everything inside stop-the-world intervals
  gc_threads,  // totals accumulated by collector threads
};

inline std::string_view to_string(AttributionMode m) { return m == AttributionMode::stw_pauses ? "stw" : "threads"; }

inline AttributionMode attribution_from_string(std::string_view s) {
  if (s == "stw" || s == "stw_pauses") return AttributionMode::stw_pauses;
  if (s == "threads" || s == "gc_threads") return AttributionMode::gc_threads;
  throw ConfigError("unknown attribution mode '" + std::string(s) + "'");
}

struct DistilledSample {
  ConfigKey config;
  MetricId metric;
  std::uint64_t total = 0;
  std::uint64_t explicit_cost = 0;
  std::uint64_t distilled = 0;
  // Set when explicit exceeded total and the sample was clamped.
  std::optional<std::string> diagnostic;
};

inline std::uint64_t total_cost(const IterationRecord& iter, const MetricId& metric) {
  if (metric == metrics::wall_time_ns) return static_cast<std::uint64_t>(iter.end_ns - iter.start_ns);
  auto where = "iteration " + std::to_string(iter.index);
  auto a = iter.ctr_at_start.get(metric);
  auto b = iter.ctr_at_end.get(metric);
  if (!a || !b) throw MissingMetricError(metric.name, where);
  return *b - *a;
}

inline std::uint64_t explicit_cost(const IterationRecord& iter, const MetricId& metric, AttributionMode mode) {
  if (mode == AttributionMode::gc_threads) {
    if (!iter.gc_thread_totals)
      throw MissingDataError("gc_threads attribution needs gc_thread_totals in iteration " + std::to_string(iter.index));
    auto v = iter.gc_thread_totals->get(metric);
    if (!v) throw MissingDataError("gc_threads attribution: gc_thread_totals lacks '" + metric.name + "'");
    return *v;
  }
  std::uint64_t sum = 0;
  for (const auto& p : iter.pauses) {
    if (metric == metrics::wall_time_ns) {
      sum += static_cast<std::uint64_t>(p.end_ns - p.start_ns);
      continue;
    }
    auto a = p.ctr_start.get(metric);
    auto b = p.ctr_end.get(metric);
    if (!a || !b) throw MissingDataError("stw_pauses attribution: pause lacks '" + metric.name + "'");
    sum += *b - *a;
  }
  return sum;
}

// Total minus explicit GC cost, clamped at zero.
inline DistilledSample distilled_cost(const IterationRecord& iter, const MetricId& metric, AttributionMode mode) {
  DistilledSample s;
  s.metric = metric;
  s.total = total_cost(iter, metric);
  s.explicit_cost = explicit_cost(iter, metric, mode);
  if (s.explicit_cost > s.total) {
    s.diagnostic = "explicit " + std::to_string(s.explicit_cost) + " exceeds total " + std::to_string(s.total) + " for " +
                   metric.name + " in iteration " + std::to_string(iter.index) + "; clamped";
    s.explicit_cost = s.total;
  }
  s.distilled = s.total - s.explicit_cost;
  return s;
}

// Uses the measured (last) iteration.
inline DistilledSample distilled_cost(const InvocationRecord& rec, const MetricId& metric, AttributionMode mode) {
  auto s = distilled_cost(rec.measured(), metric, mode);
  s.config = rec.config;
  return s;
}

struct MdcPool {
  std::string benchmark;
  MetricId metric;
  std::set<ConfigKey> members;
  double mdc = 0;
  ConfigKey argmin;
};

// Minimum mean distilled cost over an explicit pool. Ties resolve to the
// lexicographically smallest ConfigKey.
inline MdcPool compute_mdc(const std::map<ConfigKey, double>& mean_distilled, const std::set<ConfigKey>& pool,
                           const MetricId& metric = metrics::wall_time_ns) {
  if (pool.empty()) throw ConfigError("MDC pool is empty");
  MdcPool out;
  out.metric = metric;
  out.members = pool;
  out.benchmark = pool.begin()->benchmark;
  bool first = true;
  for (const auto& key : pool) {
    auto it = mean_distilled.find(key);
    if (it == mean_distilled.end()) throw MissingDataError("no distilled cost for pool member " + key.label());
    if (first || it->second < out.mdc) {
      out.mdc = it->second;
      out.argmin = key;
      first = false;
    }
  }
  return out;
}

inline double lbo(double total, double mdc) { return total - mdc; }

struct Nlbo {
  double ratio = 0;     // LBO / MDC
  double reported = 1;  // 1 + LBO / MDC, i.e. Total / MDC; what the tables print
};

inline Nlbo nlbo(double lbo_value, double mdc) {
  if (!(mdc > 0)) throw ConfigError("NLBO needs a positive MDC");
  return {lbo_value / mdc, (lbo_value + mdc) / mdc};
}

inline double stw_fraction(const IterationRecord& iter, const MetricId& metric, AttributionMode mode) {
  auto total = total_cost(iter, metric);
  if (total == 0) throw MissingDataError("STW fraction undefined: zero total " + metric.name);
  auto exp = explicit_cost(iter, metric, mode);
  return static_cast<double>(std::min(exp, total)) / static_cast<double>(total);
}

}  // namespace gcd
