#pragma once

// Fixtures shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gcdistill/latency.hpp"
#include "gcdistill/model.hpp"

namespace gcd::fixture {

inline ConfigKey key(std::string bench, std::string coll, std::int64_t heap_mb,
                     std::optional<HeapFactor> f = std::nullopt) {
  return {std::move(bench), std::move(coll), heap_mb, f, {}};
}

// One completed invocation whose measured iteration has the given total and
// single-pause explicit cost for `metric`. Wall time is scaled 1:1000 so the
// recorded timestamps stay small.
inline InvocationRecord single_pause_record(const ConfigKey& k, const MetricId& metric, std::uint64_t total,
                                            std::uint64_t stw, std::int64_t invocation = 0) {
  InvocationRecord r;
  r.config = k;
  r.invocation_index = invocation;
  r.meta["jvm"] = "fixture";
  r.vm_init_ns = 0;
  IterationRecord it;
  it.start_ns = 1000;
  Nanos wall = static_cast<Nanos>(total / 1000 + 1);
  Nanos pause_wall = static_cast<Nanos>(stw / 1000);
  it.end_ns = it.start_ns + wall;
  auto snap = [&](Nanos t, std::uint64_t v) {
    CostVector c{{metrics::wall_time_ns, static_cast<std::uint64_t>(t)}};
    if (metric != metrics::wall_time_ns) c.set(metric, v);
    return c;
  };
  const std::uint64_t base = 5'000'000;
  it.ctr_at_start = snap(it.start_ns, base);
  PauseInterval p;
  p.start_ns = it.start_ns + 10;
  p.end_ns = p.start_ns + pause_wall;
  p.ctr_start = snap(p.start_ns, base + 1);
  p.ctr_end = snap(p.end_ns, base + 1 + stw);
  it.pauses.push_back(p);
  it.ctr_at_end = snap(it.end_ns, base + total);
  r.iterations.push_back(it);
  r.vm_exit_ns = it.end_ns + 1000;
  return r;
}

// Random valid record for serialization round trips.
inline InvocationRecord random_record(std::mt19937_64& rng) {
  auto u = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
  static const char* benches[] = {"h2", "xalan", "lusearch", "avrora", "tradebeans"};
  static const char* colls[] = {"serial", "parallel", "g1", "shenandoah", "zgc", "epsilon"};
  static const char* extra[] = {"cycles", "instructions", "llc_misses", "dtlb_misses", "energy_uj", "custom.ctr"};
  static const char* factors[] = {"1.4", "1.9", "2.4", "3", "3.7", "4.4", "5.2", "6", "7/3"};

  InvocationRecord r;
  r.config.benchmark = benches[u(0, 4)];
  r.config.collector = colls[u(0, 5)];
  r.config.heap_mb = u(1, 100000);
  if (u(0, 3) != 0) r.config.heap_factor = Rational::parse(factors[u(0, 8)]);
  for (int i = 0, n = static_cast<int>(u(0, 2)); i < n; ++i) r.config.extra_flags.push_back("-XX:Flag" + std::to_string(u(0, 99)) + "=" + std::to_string(u(1, 8)));
  r.invocation_index = u(0, 19);
  r.meta["jvm"] = u(0, 1) ? "17.0.2+8" : "21 \"temurin\" \\ ünïcode";
  if (u(0, 1)) r.meta["host"] = "node-" + std::to_string(u(0, 9));
  if (u(0, 2) == 0) r.meta["note"] = "tab\there, newline\nthere";

  std::vector<MetricId> ms{metrics::wall_time_ns};
  for (const auto* m : extra)
    if (u(0, 2) == 0) ms.emplace_back(m);

  Nanos t = u(0, 1'000'000);
  r.vm_init_ns = t;
  CostVector ctr;
  for (const auto& m : ms) ctr.set(m, static_cast<std::uint64_t>(u(1, 1000)));
  auto stamp = [&] {
    ctr.set(metrics::wall_time_ns, static_cast<std::uint64_t>(t));
    return ctr;
  };
  auto bump = [&](std::int64_t max_dt) {
    t += u(0, max_dt);
    for (const auto& m : ms)
      if (m != metrics::wall_time_ns) ctr.add(m, static_cast<std::uint64_t>(u(0, 100000)));
  };

  int iters = static_cast<int>(u(0, 5));
  for (int i = 0; i < iters; ++i) {
    bump(5000);
    IterationRecord it;
    it.index = static_cast<std::size_t>(i);
    it.start_ns = t;
    it.ctr_at_start = stamp();
    for (int p = 0, n = static_cast<int>(u(0, 6)); p < n; ++p) {
      bump(20000);
      PauseInterval pi;
      pi.start_ns = t;
      pi.ctr_start = stamp();
      bump(3000);
      pi.end_ns = t;
      pi.ctr_end = stamp();
      it.pauses.push_back(pi);
    }
    bump(20000);
    it.end_ns = t;
    it.ctr_at_end = stamp();
    if (u(0, 1) && it.end_ns > it.start_ns) {
      std::vector<RequestRecord> reqs;
      for (int q = 0, n = static_cast<int>(u(1, 8)); q < n; ++q) {
        RequestRecord rq;
        rq.id = q;
        rq.finish_ns = u(it.start_ns, it.end_ns);
        rq.start_ns = u(it.start_ns, rq.finish_ns);
        rq.issue_ns = u(it.start_ns - 500, rq.start_ns);
        reqs.push_back(rq);
      }
      std::sort(reqs.begin(), reqs.end(), [](const auto& a, const auto& b) { return std::pair(a.finish_ns, a.id) < std::pair(b.finish_ns, b.id); });
      it.requests = std::move(reqs);
    }
    if (u(0, 2) == 0) {
      CostVector g;
      for (const auto& m : ms) g.set(m, static_cast<std::uint64_t>(u(0, 5000)));
      it.gc_thread_totals = g;
    }
    r.iterations.push_back(std::move(it));
  }

  switch (u(0, 5)) {
    case 0: r.outcome = Outcome::crash; break;
    case 1: r.outcome = Outcome::oom; break;
    case 2: r.outcome = Outcome::timeout; break;
    default: r.outcome = Outcome::completed; break;
  }
  if (r.outcome == Outcome::completed && r.iterations.empty()) r.outcome = Outcome::oom;
  if (r.outcome != Outcome::crash) r.vm_exit_ns = t + u(0, 1000);
  return r;
}

// Tick-by-tick FIFO server used as an independent reference for
// replay_metered. Arrivals are exactly i * spacing_ns after origin.
inline std::vector<RequestRecord> brute_force_queue(const std::vector<Nanos>& service, Nanos spacing_ns,
                                                    const std::vector<Interval>& stops, Nanos origin = 0) {
  auto stopped = [&](Nanos tick) {
    for (const auto& s : stops)
      if (s.start <= tick && tick < s.end) return true;
    return false;
  };
  std::vector<RequestRecord> out;
  Nanos free_at = origin;
  for (std::size_t i = 0; i < service.size(); ++i) {
    RequestRecord r;
    r.id = static_cast<std::int64_t>(i);
    r.issue_ns = origin + static_cast<Nanos>(i) * spacing_ns;
    Nanos tick = std::max(r.issue_ns, free_at);
    while (stopped(tick)) ++tick;
    r.start_ns = tick;
    Nanos left = service[i];
    while (left > 0) {
      if (!stopped(tick)) --left;
      ++tick;
    }
    r.finish_ns = left == 0 && service[i] == 0 ? r.start_ns : tick;
    free_at = r.finish_ns;
    out.push_back(r);
  }
  return out;
}

}  // namespace gcd::fixture
