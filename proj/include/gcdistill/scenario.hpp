#pragma once

// JSON scenarios for the simulator:
// {
//   "benchmark": "h2", "heap_mb": 2319, "heap_factor": "3.0",
//   "invocations": 3, "iterations": 5, "seed": 1,
//   "intrinsic": {"wall_time_ns": 2000000000, "cycles": 7200000000},
//   "requests": {"count": 5000, "service_ns": {"kind": "lognormal", "a": 12.0, "b": 0.5}},
//   "collectors": [
//     {"id": "parallel", "pause_count": 40, "pause_ns": {"kind": "uniform", "a": 1e6, "b": 4e6},
//      "pause_rate_scale": 6.0, "implicit_tax": 0.02},
//     {"id": "shenandoah", "pause_count": 80, "pause_ns": {"kind": "constant", "a": 1e5},
//      "implicit_tax": 0.25, "throttling": {"stall_count": 30, "stall_ns": {"kind": "constant", "a": 5e6}}}
//   ]
// }

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gcdistill/error.hpp"
#include "gcdistill/simcheck.hpp"

namespace gcd::sim {

struct Scenario {
  WorkloadSpec workload;
  std::vector<GcSpec> collectors;
  int invocations = 1;
};

inline Distribution distribution_from_json(const nlohmann::json& j) {
  if (j.is_number()) return Distribution::constant(j.get<double>());
  auto kind = j.value("kind", std::string("constant"));
  Distribution d;
  d.a = j.value("a", 0.0);
  d.b = j.value("b", 0.0);
  if (kind == "constant")
    d.kind = Distribution::Kind::constant;
  else if (kind == "uniform")
    d.kind = Distribution::Kind::uniform;
  else if (kind == "lognormal")
    d.kind = Distribution::Kind::lognormal;
  else
    throw ConfigError("unknown distribution kind '" + kind + "'");
  return d;
}

inline Scenario scenario_from_json(const nlohmann::json& j, std::optional<std::uint64_t> seed_override = std::nullopt) {
  Scenario s;
  try {
    auto& w = s.workload;
    w.benchmark = j.value("benchmark", w.benchmark);
    w.heap_mb = j.value("heap_mb", w.heap_mb);
    if (auto it = j.find("heap_factor"); it != j.end() && !it->is_null())
      w.heap_factor = it->is_string() ? Rational::parse(it->get<std::string>()) : Rational::parse(it->dump());
    w.iterations = j.value("iterations", 5);
    w.seed = seed_override.value_or(j.value("seed", std::uint64_t{0}));
    for (const auto& [k, v] : j.at("intrinsic").items()) w.intrinsic.set(MetricId(k), v.get<std::uint64_t>());
    if (auto it = j.find("requests"); it != j.end()) {
      w.request_count = it->value("count", 0);
      if (auto sv = it->find("service_ns"); sv != it->end()) w.service_ns = distribution_from_json(*sv);
      if (auto r = it->find("arrival_rate"); r != it->end()) w.arrival_rate = r->get<double>();
    }
    s.invocations = j.value("invocations", 1);
    for (const auto& c : j.at("collectors")) {
      GcSpec g;
      g.collector_id = c.at("id").get<std::string>();
      g.pause_count = c.value("pause_count", 0);
      if (auto p = c.find("pause_ns"); p != c.end()) g.pause_ns = distribution_from_json(*p);
      g.pause_rate_scale = c.value("pause_rate_scale", 1.0);
      g.implicit_tax = c.value("implicit_tax", 0.0);
      if (auto t = c.find("throttling"); t != c.end()) {
        Throttling th;
        th.stall_count = t->value("stall_count", 0);
        if (auto d = t->find("stall_ns"); d != t->end()) th.stall_ns = distribution_from_json(*d);
        g.throttling = th;
      }
      g.extra_flags = c.value("extra_flags", std::vector<std::string>{});
      if (auto h = c.find("heap_mb"); h != c.end()) g.heap_mb = h->get<std::int64_t>();
      if (auto share = c.find("gc_thread_share"); share != c.end()) g.gc_thread_share = share->get<double>();
      s.collectors.push_back(std::move(g));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  if (s.collectors.empty()) throw ConfigError("scenario needs at least one collector");
  if (s.invocations < 1) throw ConfigError("scenario invocations must be >= 1");
  return s;
}

// Loosely shaped after the h2 example: a parallel STW collector, a serial one
// and a concurrent collector that pays a large implicit tax.
inline nlohmann::json default_scenario_json() {
  return nlohmann::json::parse(R"({
    "benchmark": "h2", "heap_mb": 2319, "heap_factor": "3.0",
    "invocations": 5, "iterations": 5, "seed": 1,
    "intrinsic": {"wall_time_ns": 2000000000, "cycles": 100000000000},
    "requests": {"count": 2000, "service_ns": {"kind": "lognormal", "a": 12.5, "b": 0.6}},
    "collectors": [
      {"id": "parallel", "pause_count": 30, "pause_ns": {"kind": "uniform", "a": 1000000, "b": 5000000},
       "pause_rate_scale": 8.0, "implicit_tax": 0.0},
      {"id": "serial", "pause_count": 30, "pause_ns": {"kind": "uniform", "a": 2000000, "b": 8000000},
       "pause_rate_scale": 1.0, "implicit_tax": 0.015},
      {"id": "shenandoah", "pause_count": 60, "pause_ns": {"kind": "constant", "a": 200000},
       "pause_rate_scale": 8.0, "implicit_tax": 1.0,
       "throttling": {"stall_count": 20, "stall_ns": {"kind": "uniform", "a": 1000000, "b": 10000000}}}
    ]
  })");
}

}  // namespace gcd::sim
