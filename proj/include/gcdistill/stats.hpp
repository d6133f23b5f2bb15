#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "gcdistill/error.hpp"
#include "gcdistill/model.hpp"

namespace gcd {

struct MeanCi {
  double mean = 0;
  std::optional<double> half_width;  // absent with a single sample
};

// Student-t interval on the mean using the unbiased sample deviation.
inline MeanCi mean_ci(const std::vector<double>& xs, double level = 0.95) {
  if (xs.empty()) throw ConfigError("mean_ci of an empty sample");
  if (!(level > 0 && level < 1)) throw ConfigError("confidence level must be in (0,1)");
  double n = static_cast<double>(xs.size());
  double sum = 0;
  for (double x : xs) sum += x;
  MeanCi out;
  out.mean = sum / n;
  if (xs.size() < 2) return out;
  double ss = 0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  double sd = std::sqrt(ss / (n - 1));
  boost::math::students_t dist(n - 1);
  double t = boost::math::quantile(dist, 0.5 + level / 2);
  out.half_width = t * sd / std::sqrt(n);
  return out;
}

inline double geomean(const std::vector<double>& xs) {
  if (xs.empty()) throw ConfigError("geomean of an empty list");
  double acc = 0;
  for (double x : xs) {
    if (!(x > 0) || !std::isfinite(x)) throw ConfigError("geomean needs positive finite values");
    acc += std::log(x);
  }
  return std::exp(acc / static_cast<double>(xs.size()));
}

// Geometric mean that admits zeros (the product, and so the mean, is zero).
// Used for STW fractions where a pauseless collector reports 0.
inline double geomean_allow_zero(const std::vector<double>& xs) {
  for (double x : xs) {
    if (x < 0 || !std::isfinite(x)) throw ConfigError("geomean needs non-negative finite values");
    if (x == 0) return 0;
  }
  return geomean(xs);
}

enum class BlankReason { oom, crash, timeout, insufficient_samples };

inline std::string_view to_string(BlankReason r) {
  switch (r) {
    case BlankReason::oom: return "oom";
    case BlankReason::crash: return "crash";
    case BlankReason::timeout: return "timeout";
    case BlankReason::insufficient_samples: return "insufficient_samples";
  }
  return "crash";
}

inline std::optional<BlankReason> blank_reason_from_string(std::string_view s) {
  for (auto r : {BlankReason::oom, BlankReason::crash, BlankReason::timeout, BlankReason::insufficient_samples})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

inline BlankReason blank_reason_of(Outcome o) {
  switch (o) {
    case Outcome::oom: return BlankReason::oom;
    case Outcome::timeout: return BlankReason::timeout;
    default: return BlankReason::crash;
  }
}

struct CellKey {
  std::string benchmark;
  std::string collector;
  std::optional<HeapFactor> heap_factor;
  MetricId metric;

  auto operator<=>(const CellKey&) const = default;
};

struct Estimate {
  std::size_t n = 0;
  double mean = 0;
  std::optional<double> ci_half_width;

  static Estimate of(const std::vector<double>& xs, double level = 0.95) {
    if (xs.empty()) return {};
    auto m = mean_ci(xs, level);
    return {xs.size(), m.mean, m.half_width};
  }
};

enum class Quantity { total, explicit_cost, distilled, lbo, nlbo_reported, stw_fraction };

inline std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::total: return "total";
    case Quantity::explicit_cost: return "explicit";
    case Quantity::distilled: return "distilled";
    case Quantity::lbo: return "lbo";
    case Quantity::nlbo_reported: return "nlbo_reported";
    case Quantity::stw_fraction: return "stw_fraction";
  }
  return "";
}

struct CellResult {
  CellKey key;
  ConfigKey config;
  std::set<BlankReason> blank;  // empty means ok
  double mdc = 0;
  Estimate total, explicit_cost, distilled, lbo, nlbo_reported, stw_fraction;

  bool ok() const { return blank.empty(); }
  std::size_t n() const { return total.n; }

  const Estimate& get(Quantity q) const {
    switch (q) {
      case Quantity::total: return total;
      case Quantity::explicit_cost: return explicit_cost;
      case Quantity::distilled: return distilled;
      case Quantity::lbo: return lbo;
      case Quantity::nlbo_reported: return nlbo_reported;
      case Quantity::stw_fraction: return stw_fraction;
    }
    return total;
  }
};

struct SummaryRow {
  std::string collector;
  std::optional<HeapFactor> heap_factor;
  MetricId metric;
  std::optional<double> geomean;  // absent when blank
  std::vector<std::string> included_benchmarks;
  std::set<BlankReason> blank;
};

// Geometric mean of one quantity across benchmarks for a single
// collector x heap factor x metric. Exclusions are dropped first; any
// remaining blank cell blanks the row.
inline SummaryRow summarize(const std::vector<CellResult>& cells, const std::set<std::string>& exclusions,
                            Quantity q = Quantity::nlbo_reported) {
  SummaryRow row;
  if (!cells.empty()) {
    row.collector = cells.front().key.collector;
    row.heap_factor = cells.front().key.heap_factor;
    row.metric = cells.front().key.metric;
  }
  std::vector<const CellResult*> kept;
  for (const auto& c : cells)
    if (!exclusions.count(c.key.benchmark)) kept.push_back(&c);
  std::sort(kept.begin(), kept.end(), [](auto* a, auto* b) { return a->key.benchmark < b->key.benchmark; });
  std::vector<double> values;
  for (const auto* c : kept) {
    row.included_benchmarks.push_back(c->key.benchmark);
    if (!c->ok()) {
      row.blank.insert(c->blank.begin(), c->blank.end());
      continue;
    }
    if (c->get(q).n == 0) {
      row.blank.insert(BlankReason::insufficient_samples);
      continue;
    }
    values.push_back(c->get(q).mean);
  }
  if (kept.empty()) row.blank.insert(BlankReason::insufficient_samples);
  if (row.blank.empty()) row.geomean = q == Quantity::stw_fraction ? geomean_allow_zero(values) : geomean(values);
  return row;
}

}  // namespace gcd
