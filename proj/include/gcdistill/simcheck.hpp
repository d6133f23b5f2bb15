#pragma once

// Synthetic runtime with known ground truth. Each iteration is a mutator
// timeline that is interrupted by stop-the-world pauses (which carry the
// explicit GC cost) and, optionally, by throttling stalls (wall time only).
// Mutator work is the intrinsic cost inflated by an implicit tax, spread
// uniformly over mutator time.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gcdistill/distill.hpp"
#include "gcdistill/error.hpp"
#include "gcdistill/latency.hpp"
#include "gcdistill/model.hpp"

namespace gcd::sim {

struct Distribution {
  enum class Kind { constant, uniform, lognormal };
  Kind kind = Kind::constant;
  double a = 0;  // constant value, uniform low, or lognormal mu
  double b = 0;  // uniform high, or lognormal sigma

  static Distribution constant(double v) { return {Kind::constant, v, 0}; }
  static Distribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
  static Distribution lognormal(double mu, double sigma) { return {Kind::lognormal, mu, sigma}; }

  template <class Rng>
  std::int64_t sample(Rng& rng) const {
    double v = a;
    switch (kind) {
      case Kind::constant: break;
      case Kind::uniform: v = a + (b - a) * std::generate_canonical<double, 53>(rng); break;
      case Kind::lognormal: v = std::lognormal_distribution<double>(a, b)(rng); break;
    }
    if (!std::isfinite(v) || v < 0) v = 0;
    return static_cast<std::int64_t>(std::llround(v));
  }
};

struct WorkloadSpec {
  std::string benchmark = "synthetic";
  std::int64_t heap_mb = 1024;
  std::optional<HeapFactor> heap_factor;
  CostVector intrinsic;  // per iteration; wall_time_ns required
  int iterations = 1;
  int request_count = 0;
  Distribution service_ns = Distribution::constant(0);
  std::optional<double> arrival_rate;  // requests per second; default spreads requests over the iteration
  std::uint64_t seed = 0;
};

struct Throttling {
  int stall_count = 0;
  Distribution stall_ns;
};

struct GcSpec {
  std::string collector_id = "stw";
  int pause_count = 0;
  Distribution pause_ns = Distribution::constant(0);
  double pause_rate_scale = 1.0;  // counter rate inside pauses relative to the mutator rate
  double implicit_tax = 0.0;
  std::optional<Throttling> throttling;
  std::vector<std::string> extra_flags;
  std::optional<std::int64_t> heap_mb;       // overrides the workload's heap
  std::optional<double> gc_thread_share;     // emit gc_thread_totals: explicit + share * implicit
};

struct GroundTruth {
  ConfigKey config;
  std::int64_t invocation = 0;
  CostVector intrinsic;
  CostVector true_explicit;
  CostVector true_implicit;

  CostVector true_gc_cost() const {
    CostVector out = true_explicit;
    for (const auto& [m, v] : true_implicit) out.add(m, v);
    return out;
  }
};

namespace detail {

inline std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  v += 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  v ^= v >> 30;
  v *= 0xbf58476d1ce4e5b9ULL;
  v ^= v >> 27;
  v *= 0x94d049bb133111ebULL;
  v ^= v >> 31;
  return h ^ v;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

inline std::uint64_t scaled(std::uint64_t total, std::uint64_t part, std::uint64_t whole) {
  if (whole == 0) return 0;
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(total) * part / whole);
}

inline std::uint64_t rate_cost(std::int64_t duration_ns, std::uint64_t intrinsic_m, std::uint64_t intrinsic_wall,
                               double scale) {
  double v = static_cast<double>(duration_ns) * static_cast<double>(intrinsic_m) / static_cast<double>(intrinsic_wall) * scale;
  return v > 0 ? static_cast<std::uint64_t>(std::llround(v)) : 0;
}

struct Interruption {
  std::uint64_t offset;  // mutator time elapsed before it
  std::int64_t duration;
  bool pause;
};

}  // namespace detail

inline void check_specs(const WorkloadSpec& w, const GcSpec& g) {
  auto wall = w.intrinsic.get(metrics::wall_time_ns);
  if (!wall || *wall == 0) throw ConfigError("workload intrinsic cost needs a positive wall_time_ns");
  for (const auto& [m, v] : w.intrinsic)
    if (v == 0) throw ConfigError("intrinsic cost for " + m.name + " must be positive");
  if (w.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (!(g.implicit_tax >= 0) || !std::isfinite(g.implicit_tax)) throw ConfigError("implicit_tax must be finite and >= 0");
  if (!(g.pause_rate_scale >= 0) || !std::isfinite(g.pause_rate_scale)) throw ConfigError("pause_rate_scale must be finite and >= 0");
  if (g.pause_count < 0) throw ConfigError("pause_count must be >= 0");
  if (g.collector_id.empty()) throw ConfigError("collector_id must be non-empty");
}

inline std::pair<InvocationRecord, GroundTruth> simulate_run(const WorkloadSpec& w, const GcSpec& g,
                                                             std::int64_t invocation = 0) {
  check_specs(w, g);
  std::mt19937_64 rng(detail::mix(detail::mix(w.seed, detail::fnv1a(g.collector_id)), static_cast<std::uint64_t>(invocation)));

  InvocationRecord rec;
  rec.config.benchmark = w.benchmark;
  rec.config.collector = g.collector_id;
  rec.config.heap_mb = g.heap_mb.value_or(w.heap_mb);
  rec.config.heap_factor = w.heap_factor;
  rec.config.extra_flags = g.extra_flags;
  rec.invocation_index = invocation;
  rec.meta["jvm"] = "simcheck";
  rec.meta["seed"] = std::to_string(w.seed);

  const std::uint64_t intrinsic_wall = w.intrinsic.at(metrics::wall_time_ns);
  const auto metric_ids = w.intrinsic.metrics();
  constexpr std::int64_t gap_ns = 1000;

  GroundTruth truth;
  truth.config = rec.config;
  truth.invocation = invocation;
  truth.intrinsic = w.intrinsic;

  // Mutator cost per metric: intrinsic plus implicit tax.
  CostVector implicit_tax;
  CostVector mutator;
  for (const auto& [m, v] : w.intrinsic) {
    auto tax = static_cast<std::uint64_t>(std::llround(static_cast<double>(v) * g.implicit_tax));
    implicit_tax.set(m, tax);
    mutator.set(m, v + tax);
  }
  const std::uint64_t mutator_wall = mutator.at(metrics::wall_time_ns);

  CostVector ctr;
  for (const auto& m : metric_ids) ctr.set(m, 0);
  Nanos t = 0;
  rec.vm_init_ns = t;

  auto advance_gap = [&] {
    t += gap_ns;
    for (const auto& m : metric_ids) {
      if (m == metrics::wall_time_ns) continue;
      ctr.add(m, detail::rate_cost(gap_ns, w.intrinsic.at(m), intrinsic_wall, 1.0));
    }
    ctr.set(metrics::wall_time_ns, static_cast<std::uint64_t>(t));
  };

  for (int i = 0; i < w.iterations; ++i) {
    const bool measured = i + 1 == w.iterations;
    advance_gap();
    IterationRecord it;
    it.index = static_cast<std::size_t>(i);
    it.start_ns = t;
    it.ctr_at_start = ctr;
    const CostVector base = ctr;

    std::vector<detail::Interruption> events;
    std::uniform_int_distribution<std::uint64_t> where(0, mutator_wall);
    for (int p = 0; p < g.pause_count; ++p) events.push_back({where(rng), g.pause_ns.sample(rng), true});
    if (g.throttling)
      for (int s = 0; s < g.throttling->stall_count; ++s) events.push_back({where(rng), g.throttling->stall_ns.sample(rng), false});
    std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.offset < b.offset; });

    CostVector pause_acc;  // explicit cost so far, per metric
    for (const auto& m : metric_ids) pause_acc.set(m, 0);
    std::uint64_t stall_acc = 0;
    std::vector<Interval> stops;

    auto at_mutator = [&](std::uint64_t x) {
      t = it.start_ns + static_cast<Nanos>(x + pause_acc.at(metrics::wall_time_ns) + stall_acc);
      for (const auto& m : metric_ids) {
        if (m == metrics::wall_time_ns) continue;
        ctr.set(m, base.at(m) + detail::scaled(mutator.at(m), x, mutator_wall) + pause_acc.at(m));
      }
      ctr.set(metrics::wall_time_ns, static_cast<std::uint64_t>(t));
    };

    for (const auto& e : events) {
      at_mutator(e.offset);
      if (e.pause) {
        PauseInterval p;
        p.start_ns = t;
        p.ctr_start = ctr;
        for (const auto& m : metric_ids) {
          std::uint64_t c = m == metrics::wall_time_ns
                                ? static_cast<std::uint64_t>(e.duration)
                                : detail::rate_cost(e.duration, w.intrinsic.at(m), intrinsic_wall, g.pause_rate_scale);
          pause_acc.add(m, c);
        }
        at_mutator(e.offset);
        p.end_ns = t;
        p.ctr_end = ctr;
        stops.push_back({p.start_ns, p.end_ns});
        it.pauses.push_back(std::move(p));
      } else {
        Nanos s = t;
        stall_acc += static_cast<std::uint64_t>(e.duration);
        at_mutator(e.offset);
        stops.push_back({s, t});
      }
    }
    at_mutator(mutator_wall);
    it.end_ns = t;
    it.ctr_at_end = ctr;

    CostVector implicit = implicit_tax;
    implicit.add(metrics::wall_time_ns, stall_acc);

    if (g.gc_thread_share) {
      CostVector totals;
      for (const auto& m : metric_ids)
        totals.set(m, pause_acc.at(m) + static_cast<std::uint64_t>(std::llround(static_cast<double>(implicit.at(m)) * *g.gc_thread_share)));
      it.gc_thread_totals = totals;
    }

    if (measured && w.request_count > 0) {
      std::vector<Nanos> service;
      for (int r = 0; r < w.request_count; ++r) service.push_back(w.service_ns.sample(rng));
      double rate = w.arrival_rate.value_or(1e9 * (w.request_count + 1) / static_cast<double>(it.end_ns - it.start_ns));
      auto reqs = replay_metered(service, rate, stops, it.start_ns);
      std::erase_if(reqs, [&](const RequestRecord& r) { return r.finish_ns > it.end_ns; });
      if (!reqs.empty()) it.requests = std::move(reqs);
    }

    if (measured) {
      truth.true_explicit = pause_acc;
      truth.true_implicit = implicit;
    }
    rec.iterations.push_back(std::move(it));
  }
  advance_gap();
  rec.vm_exit_ns = t;
  return {std::move(rec), std::move(truth)};
}

struct BoundCheck {
  ConfigKey config;
  std::int64_t invocation = 0;
  MetricId metric;
  double mdc = 0;
  double lbo = 0;
  std::uint64_t intrinsic = 0;
  std::uint64_t true_gc_cost = 0;
  bool ok = true;

  double slack() const { return static_cast<double>(true_gc_cost) - lbo; }
};

struct BoundReport {
  std::vector<BoundCheck> checks;
  std::vector<std::string> violations;

  bool sound() const { return violations.empty(); }
  double max_slack() const {
    double s = 0;
    for (const auto& c : checks) s = std::max(s, c.slack());
    return s;
  }
};

// Runs distillation over a pool of simulated invocations and checks, per
// invocation and metric, LBO <= true GC cost and MDC >= intrinsic. The MDC
// is the minimum over configurations of mean distilled cost.
inline BoundReport verify_bound(const std::vector<InvocationRecord>& records, const std::vector<GroundTruth>& truths,
                                const std::vector<MetricId>& metric_list,
                                AttributionMode mode = AttributionMode::stw_pauses) {
  if (records.size() != truths.size()) throw ConfigError("verify_bound needs one truth per record");
  BoundReport report;
  for (const auto& metric : metric_list) {
    std::map<ConfigKey, std::pair<double, std::size_t>> sums;
    for (const auto& r : records) {
      auto s = distilled_cost(r, metric, mode);
      auto& acc = sums[r.config];
      acc.first += static_cast<double>(s.distilled);
      acc.second += 1;
    }
    std::map<ConfigKey, double> means;
    std::set<ConfigKey> pool;
    for (const auto& [k, acc] : sums) {
      means[k] = acc.first / static_cast<double>(acc.second);
      pool.insert(k);
    }
    auto mdc = compute_mdc(means, pool, metric);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      const auto& truth = truths[i];
      if (!(truth.config == r.config)) throw ConfigError("truth/record mismatch for " + r.config.label());
      BoundCheck c;
      c.config = r.config;
      c.invocation = r.invocation_index;
      c.metric = metric;
      c.mdc = mdc.mdc;
      c.lbo = lbo(static_cast<double>(total_cost(r.measured(), metric)), mdc.mdc);
      c.intrinsic = truth.intrinsic.at(metric);
      c.true_gc_cost = truth.true_gc_cost().at(metric);
      bool lbo_ok = c.lbo <= static_cast<double>(c.true_gc_cost);
      bool mdc_ok = mdc.mdc >= static_cast<double>(c.intrinsic);
      c.ok = lbo_ok && mdc_ok;
      if (!lbo_ok)
        report.violations.push_back(r.config.label() + " " + metric.name + ": LBO " + std::to_string(c.lbo) +
                                    " exceeds true GC cost " + std::to_string(c.true_gc_cost));
      if (!mdc_ok)
        report.violations.push_back(r.config.label() + " " + metric.name + ": MDC " + std::to_string(mdc.mdc) +
                                    " below intrinsic " + std::to_string(c.intrinsic));
      report.checks.push_back(c);
    }
  }
  return report;
}

}  // namespace gcd::sim
