#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gcdistill/error.hpp"

namespace gcd {

// Nanoseconds on a single per-process monotonic clock.
using Nanos = std::int64_t;

struct MetricId {
  std::string name;

  MetricId() = default;
  MetricId(std::string n) : name(std::move(n)) {}  // NOLINT(google-explicit-constructor)
  MetricId(const char* n) : name(n) {}             // NOLINT(google-explicit-constructor)

  const std::string& str() const noexcept { return name; }
  auto operator<=>(const MetricId&) const = default;
};

namespace metrics {
inline const MetricId wall_time_ns{"wall_time_ns"};
inline const MetricId cycles{"cycles"};
inline const MetricId instructions{"instructions"};
inline const MetricId llc_misses{"llc_misses"};
inline const MetricId dtlb_misses{"dtlb_misses"};
inline const MetricId energy_uj{"energy_uj"};
}  // namespace metrics

// Open registry: the well-known counters are pre-registered, anything seen in
// a log can be added.
class MetricRegistry {
 public:
  MetricRegistry()
      : names_{metrics::wall_time_ns.name, metrics::cycles.name,     metrics::instructions.name,
               metrics::llc_misses.name,   metrics::dtlb_misses.name, metrics::energy_uj.name} {}

  // Returns false when the name was already registered.
  bool add(const MetricId& m) {
    if (m.name.empty()) throw ConfigError("metric name must be non-empty");
    return names_.insert(m.name).second;
  }
  bool contains(const MetricId& m) const { return names_.count(m.name) != 0; }
  std::vector<MetricId> all() const { return {names_.begin(), names_.end()}; }

 private:
  std::set<std::string> names_;
};

// Cumulative per-metric counts. Values are unsigned so non-negativity holds
// by construction.
class CostVector {
 public:
  using Map = std::map<MetricId, std::uint64_t>;

  CostVector() = default;
  CostVector(std::initializer_list<Map::value_type> init) : values_(init) {}

  bool contains(const MetricId& m) const { return values_.count(m) != 0; }
  std::optional<std::uint64_t> get(const MetricId& m) const {
    auto it = values_.find(m);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  std::uint64_t at(const MetricId& m) const {
    auto it = values_.find(m);
    if (it == values_.end()) throw MissingMetricError(m.name);
    return it->second;
  }
  void set(const MetricId& m, std::uint64_t v) { values_[m] = v; }
  void add(const MetricId& m, std::uint64_t v) { values_[m] += v; }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  std::vector<MetricId> metrics() const {
    std::vector<MetricId> out;
    out.reserve(values_.size());
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
  }

  bool same_metrics(const CostVector& o) const {
    return std::equal(values_.begin(), values_.end(), o.values_.begin(), o.values_.end(),
                      [](const auto& a, const auto& b) { return a.first == b.first; });
  }

  bool operator==(const CostVector&) const = default;

 private:
  Map values_;
};

struct PauseInterval {
  Nanos start_ns = 0;
  Nanos end_ns = 0;
  CostVector ctr_start;
  CostVector ctr_end;

  Nanos duration() const noexcept { return end_ns - start_ns; }
  bool operator==(const PauseInterval&) const = default;
};

struct RequestRecord {
  std::int64_t id = 0;
  Nanos issue_ns = 0;
  Nanos start_ns = 0;
  Nanos finish_ns = 0;

  bool operator==(const RequestRecord&) const = default;
};

struct IterationRecord {
  std::size_t index = 0;
  Nanos start_ns = 0;
  Nanos end_ns = 0;
  CostVector ctr_at_start;
  CostVector ctr_at_end;
  std::vector<PauseInterval> pauses;
  std::optional<std::vector<RequestRecord>> requests;
  std::optional<CostVector> gc_thread_totals;

  bool operator==(const IterationRecord&) const = default;
};

// Exact heap multiplier, e.g. 7/5 for "1.4x". Kept rational so heap sizes
// derived from it never suffer binary rounding.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) { normalize(); }

  // Accepts "3", "1.4", "7/5".
  static Rational parse(std::string_view s) {
    auto fail = [&] { return ConfigError("invalid rational '" + std::string(s) + "'"); };
    auto to_int = [&](std::string_view part) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (part.empty() || ec != std::errc() || p != part.data() + part.size()) throw fail();
      return v;
    };
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
      auto d = to_int(s.substr(slash + 1));
      if (d == 0) throw fail();
      return Rational(to_int(s.substr(0, slash)), d);
    }
    auto dot = s.find('.');
    if (dot == std::string_view::npos) return Rational(to_int(s));
    auto frac = s.substr(dot + 1);
    if (frac.empty() || frac.size() > 15 || frac.front() == '-' || frac.front() == '+') throw fail();
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    auto whole_part = s.substr(0, dot);
    bool negative = !whole_part.empty() && whole_part.front() == '-';
    std::int64_t whole = (whole_part.empty() || whole_part == "-") ? 0 : to_int(whole_part);
    std::int64_t f = to_int(frac);
    std::int64_t num = (whole < 0 ? -whole : whole) * den + f;
    return Rational(negative ? -num : num, den);
  }

  constexpr std::int64_t num() const noexcept { return num_; }
  constexpr std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  // ceil(n * this) computed exactly.
  std::int64_t ceil_mul(std::int64_t n) const {
    __int128 p = static_cast<__int128>(n) * num_;
    __int128 q = p / den_;
    if (p % den_ != 0 && p > 0) ++q;
    return static_cast<std::int64_t>(q);
  }

  // Decimal when the denominator allows a terminating expansion, n/d otherwise.
  std::string to_string() const {
    if (den_ == 1) return std::to_string(num_);
    std::int64_t rest = den_;
    int twos = 0, fives = 0;
    while (rest % 2 == 0) rest /= 2, ++twos;
    while (rest % 5 == 0) rest /= 5, ++fives;
    int digits = std::max(twos, fives);
    if (rest != 1 || digits > 15) return std::to_string(num_) + "/" + std::to_string(den_);
    std::int64_t scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    std::int64_t scaled = num_ * (scale / den_);
    bool neg = scaled < 0;
    std::int64_t mag = neg ? -scaled : scaled;
    std::string frac = std::to_string(mag % scale);
    frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
    return (neg ? "-" : "") + std::to_string(mag / scale) + "." + frac;
  }

  // Fixed one-decimal display ("3.0", "1.4") used for column headings.
  std::string display() const {
    double v = to_double();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
  }

  friend constexpr bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    __int128 l = static_cast<__int128>(a.num_) * b.den_;
    __int128 r = static_cast<__int128>(b.num_) * a.den_;
    return l < r ? std::strong_ordering::less : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  constexpr void normalize() {
    if (den_ == 0) den_ = 1;
    if (den_ < 0) num_ = -num_, den_ = -den_;
    std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) num_ /= g, den_ /= g;
  }

  std::int64_t num_ = 1;
  std::int64_t den_ = 1;
};

using HeapFactor = Rational;

struct ConfigKey {
  std::string benchmark;
  std::string collector;
  std::int64_t heap_mb = 0;
  std::optional<HeapFactor> heap_factor;
  std::vector<std::string> extra_flags;

  // Identity excludes heap_factor, which is derived from heap_mb.
  friend bool operator==(const ConfigKey& a, const ConfigKey& b) {
    return a.benchmark == b.benchmark && a.collector == b.collector && a.heap_mb == b.heap_mb &&
           a.extra_flags == b.extra_flags;
  }
  friend std::strong_ordering operator<=>(const ConfigKey& a, const ConfigKey& b) {
    if (auto c = a.benchmark <=> b.benchmark; c != 0) return c;
    if (auto c = a.collector <=> b.collector; c != 0) return c;
    if (auto c = a.heap_mb <=> b.heap_mb; c != 0) return c;
    return a.extra_flags <=> b.extra_flags;
  }

  std::string label() const {
    std::string s = benchmark + "/" + collector + "/" + std::to_string(heap_mb) + "mb";
    for (const auto& f : extra_flags) s += " " + f;
    return s;
  }
};

enum class Outcome { completed, oom, crash, timeout };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::completed: return "completed";
    case Outcome::oom: return "oom";
    case Outcome::crash: return "crash";
    case Outcome::timeout: return "timeout";
  }
  return "crash";
}

inline std::optional<Outcome> outcome_from_string(std::string_view s) {
  if (s == "completed") return Outcome::completed;
  if (s == "oom") return Outcome::oom;
  if (s == "crash") return Outcome::crash;
  if (s == "timeout") return Outcome::timeout;
  return std::nullopt;
}

struct InvocationRecord {
  ConfigKey config;
  std::int64_t invocation_index = 0;
  Nanos vm_init_ns = 0;
  std::optional<Nanos> vm_exit_ns;
  std::vector<IterationRecord> iterations;
  Outcome outcome = Outcome::completed;
  std::map<std::string, std::string> meta;

  // Warm-up iterations precede it; only the last one is reported.
  const IterationRecord& measured() const {
    if (iterations.empty()) throw MissingDataError("invocation " + config.label() + " has no iterations");
    return iterations.back();
  }

  bool operator==(const InvocationRecord& o) const {
    return config == o.config && config.heap_factor == o.config.heap_factor &&
           invocation_index == o.invocation_index && vm_init_ns == o.vm_init_ns && vm_exit_ns == o.vm_exit_ns &&
           iterations == o.iterations && outcome == o.outcome && meta == o.meta;
  }
};

// Meta keys that the log format derives from ConfigKey and the invocation.
inline const std::set<std::string>& reserved_meta_keys() {
  static const std::set<std::string> keys{"ev",         "t",     "benchmark", "collector", "heap_mb",
                                          "heap_factor", "flags", "invocation"};
  return keys;
}

struct Violation {
  std::string field;
  std::optional<std::size_t> iteration;
  std::string rule;

  std::string to_string() const {
    std::string s = field + " " + rule;
    if (iteration) s += ", iteration " + std::to_string(*iteration);
    return s;
  }
  bool operator==(const Violation&) const = default;
};

namespace detail {

inline void check_monotone(const CostVector& before, const CostVector& after, std::size_t iteration,
                           std::set<MetricId>& reported, std::vector<Violation>& out) {
  for (const auto& [m, v] : after) {
    auto prev = before.get(m);
    if (prev && v < *prev && reported.insert(m).second) out.push_back({m.name, iteration, "monotonicity"});
  }
}

}  // namespace detail

// Lists every broken invariant; empty iff the record is valid. Monotonicity
// is reported once per (iteration, metric).
inline std::vector<Violation> validate_invocation(const InvocationRecord& rec) {
  std::vector<Violation> out;
  const auto& cfg = rec.config;
  if (cfg.benchmark.empty()) out.push_back({"config.benchmark", std::nullopt, "must be non-empty"});
  if (cfg.collector.empty()) out.push_back({"config.collector", std::nullopt, "must be non-empty"});
  if (cfg.heap_mb < 1) out.push_back({"config.heap_mb", std::nullopt, "must be >= 1"});
  for (const auto& f : cfg.extra_flags) {
    if (f.empty() || f.find_first_of(" \t\n\r") != std::string::npos)
      out.push_back({"config.extra_flags", std::nullopt, "flag '" + f + "' must be non-empty without whitespace"});
  }
  for (const auto& [k, v] : rec.meta) {
    if (reserved_meta_keys().count(k)) out.push_back({"meta." + k, std::nullopt, "is reserved"});
  }
  if (rec.outcome == Outcome::completed && rec.iterations.empty())
    out.push_back({"iterations", std::nullopt, "must be non-empty for a completed invocation"});
  if (rec.vm_exit_ns && *rec.vm_exit_ns < rec.vm_init_ns) out.push_back({"vm_exit_ns", std::nullopt, "precedes vm_init"});
  if (rec.outcome == Outcome::completed && !rec.vm_exit_ns)
    out.push_back({"vm_exit_ns", std::nullopt, "required for a completed invocation"});

  const CostVector* prev_snapshot = nullptr;
  Nanos prev_t = rec.vm_init_ns;
  for (std::size_t i = 0; i < rec.iterations.size(); ++i) {
    const auto& it = rec.iterations[i];
    std::set<MetricId> reported;
    if (it.index != i) out.push_back({"index", i, "must be consecutive from 0"});
    if (it.start_ns < prev_t) out.push_back({"start_ns", i, "precedes previous event"});
    if (it.end_ns < it.start_ns) out.push_back({"end_ns", i, "precedes start_ns"});
    if (!it.ctr_at_start.contains(metrics::wall_time_ns) || !it.ctr_at_end.contains(metrics::wall_time_ns)) {
      out.push_back({"ctr", i, "lacks wall_time_ns"});
    } else {
      if (it.ctr_at_start.at(metrics::wall_time_ns) != static_cast<std::uint64_t>(it.start_ns))
        out.push_back({"ctr_at_start.wall_time_ns", i, "must equal start_ns"});
      if (it.ctr_at_end.at(metrics::wall_time_ns) != static_cast<std::uint64_t>(it.end_ns))
        out.push_back({"ctr_at_end.wall_time_ns", i, "must equal end_ns"});
    }
    if (!it.ctr_at_end.same_metrics(it.ctr_at_start)) out.push_back({"ctr_at_end", i, "metric set differs from ctr_at_start"});

    if (prev_snapshot) detail::check_monotone(*prev_snapshot, it.ctr_at_start, i, reported, out);
    const CostVector* last = &it.ctr_at_start;
    Nanos last_t = it.start_ns;
    for (std::size_t p = 0; p < it.pauses.size(); ++p) {
      const auto& pause = it.pauses[p];
      std::string name = "pauses[" + std::to_string(p) + "]";
      if (pause.end_ns < pause.start_ns) out.push_back({name, i, "end_ns precedes start_ns"});
      if (pause.start_ns < last_t) out.push_back({name, i, "overlaps or is out of order"});
      if (pause.start_ns < it.start_ns || pause.end_ns > it.end_ns) out.push_back({name, i, "lies outside its iteration"});
      if (!pause.ctr_start.same_metrics(it.ctr_at_start) || !pause.ctr_end.same_metrics(it.ctr_at_start)) {
        out.push_back({name, i, "metric set differs from ctr_at_start"});
      } else if (pause.ctr_start.at(metrics::wall_time_ns) != static_cast<std::uint64_t>(pause.start_ns) ||
                 pause.ctr_end.at(metrics::wall_time_ns) != static_cast<std::uint64_t>(pause.end_ns)) {
        out.push_back({name, i, "wall_time_ns must equal its timestamps"});
      }
      detail::check_monotone(*last, pause.ctr_start, i, reported, out);
      detail::check_monotone(pause.ctr_start, pause.ctr_end, i, reported, out);
      last = &pause.ctr_end;
      last_t = std::max(last_t, pause.end_ns);
    }
    detail::check_monotone(*last, it.ctr_at_end, i, reported, out);

    if (it.requests) {
      if (it.requests->empty()) out.push_back({"requests", i, "must be absent rather than empty"});
      const RequestRecord* prev_req = nullptr;
      for (const auto& r : *it.requests) {
        std::string name = "requests[id=" + std::to_string(r.id) + "]";
        if (!(r.issue_ns <= r.start_ns && r.start_ns <= r.finish_ns)) out.push_back({name, i, "requires issue <= start <= finish"});
        if (r.start_ns < it.start_ns || r.finish_ns > it.end_ns) out.push_back({name, i, "lies outside its iteration"});
        if (prev_req && std::pair(r.finish_ns, r.id) < std::pair(prev_req->finish_ns, prev_req->id))
          out.push_back({name, i, "out of (finish_ns, id) order"});
        prev_req = &r;
      }
    }
    if (it.gc_thread_totals && !it.gc_thread_totals->contains(metrics::wall_time_ns))
      out.push_back({"gc_thread_totals", i, "lacks wall_time_ns"});

    prev_snapshot = &it.ctr_at_end;
    prev_t = std::max(it.end_ns, it.start_ns);
  }
  if (rec.vm_exit_ns && *rec.vm_exit_ns < prev_t) out.push_back({"vm_exit_ns", std::nullopt, "precedes last iteration end"});
  return out;
}

}  // namespace gcd
