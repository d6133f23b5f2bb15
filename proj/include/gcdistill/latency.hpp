#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gcdistill/error.hpp"
#include "gcdistill/model.hpp"

namespace gcd {

struct PercentilePoint {
  double percentile = 0;  // [0, 100]
  Nanos value_ns = 0;

  bool operator==(const PercentilePoint&) const = default;
};

struct PercentileCurve {
  std::vector<PercentilePoint> points;
  std::string label;

  bool empty() const noexcept { return points.empty(); }
  bool operator==(const PercentileCurve&) const = default;
};

inline const std::vector<double>& default_percentiles() {
  static const std::vector<double> ps{0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 95, 99, 99.9, 99.99, 100};
  return ps;
}

// Nearest-rank: the smallest value with at least p% of the sample at or
// below it. p = 0 maps to the minimum. Requested percentiles are sorted and
// de-duplicated.
inline PercentileCurve percentile_curve(std::vector<Nanos> values, std::vector<double> percentiles, std::string label) {
  for (double p : percentiles)
    if (!(p >= 0 && p <= 100)) throw ConfigError("percentile " + std::to_string(p) + " outside [0,100]");
  PercentileCurve curve;
  curve.label = std::move(label);
  if (values.empty()) return curve;
  std::sort(values.begin(), values.end());
  std::sort(percentiles.begin(), percentiles.end());
  percentiles.erase(std::unique(percentiles.begin(), percentiles.end()), percentiles.end());
  const double n = static_cast<double>(values.size());
  for (double p : percentiles) {
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    curve.points.push_back({p, values[rank - 1]});
  }
  return curve;
}

inline PercentileCurve pause_percentiles(const IterationRecord& iter, const std::vector<double>& percentiles,
                                         std::string label = "pause") {
  std::vector<Nanos> d;
  d.reserve(iter.pauses.size());
  for (const auto& p : iter.pauses) d.push_back(p.end_ns - p.start_ns);
  return percentile_curve(std::move(d), percentiles, std::move(label));
}

inline std::vector<Nanos> simple_latency(const std::vector<RequestRecord>& reqs) {
  std::vector<Nanos> out;
  out.reserve(reqs.size());
  for (const auto& r : reqs) out.push_back(r.finish_ns - r.start_ns);
  return out;
}

inline std::vector<Nanos> metered_latency(const std::vector<RequestRecord>& reqs) {
  std::vector<Nanos> out;
  out.reserve(reqs.size());
  for (const auto& r : reqs) out.push_back(r.finish_ns - r.issue_ns);
  return out;
}

struct Interval {
  Nanos start = 0;
  Nanos end = 0;
};

namespace detail {

inline std::vector<Interval> merged(std::vector<Interval> xs) {
  std::sort(xs.begin(), xs.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  std::vector<Interval> out;
  for (const auto& x : xs) {
    if (x.end <= x.start) continue;
    if (!out.empty() && x.start <= out.back().end) {
      out.back().end = std::max(out.back().end, x.end);
    } else {
      out.push_back(x);
    }
  }
  return out;
}

}  // namespace detail

// Fixed-rate arrivals into one FIFO server that stops during every stop
// interval. Request i is issued at origin + round(i * 1e9 / rate).
inline std::vector<RequestRecord> replay_metered(const std::vector<Nanos>& service_times, double arrival_rate,
                                                 const std::vector<Interval>& stops, Nanos origin = 0) {
  if (!(arrival_rate > 0)) throw ConfigError("arrival rate must be positive");
  const auto halts = detail::merged(stops);
  const double spacing = 1e9 / arrival_rate;
  std::vector<RequestRecord> out;
  out.reserve(service_times.size());
  std::size_t k = 0;  // first halt that may still matter
  Nanos prev_finish = origin;
  for (std::size_t i = 0; i < service_times.size(); ++i) {
    if (service_times[i] < 0) throw ConfigError("negative service time");
    RequestRecord r;
    r.id = static_cast<std::int64_t>(i);
    r.issue_ns = origin + static_cast<Nanos>(std::llround(static_cast<double>(i) * spacing));
    Nanos t = std::max(r.issue_ns, prev_finish);
    while (k < halts.size() && halts[k].end <= t) ++k;
    if (k < halts.size() && halts[k].start <= t) t = halts[k++].end;
    r.start_ns = t;
    Nanos remaining = service_times[i];
    std::size_t j = k;
    while (j < halts.size() && halts[j].start < t + remaining) {
      remaining -= halts[j].start - t;
      t = halts[j].end;
      ++j;
    }
    r.finish_ns = t + remaining;
    prev_finish = r.finish_ns;
    out.push_back(r);
  }
  return out;
}

inline std::vector<RequestRecord> replay_metered(const std::vector<Nanos>& service_times, double arrival_rate,
                                                 const std::vector<PauseInterval>& pauses, Nanos origin = 0) {
  std::vector<Interval> stops;
  stops.reserve(pauses.size());
  for (const auto& p : pauses) stops.push_back({p.start_ns, p.end_ns});
  return replay_metered(service_times, arrival_rate, stops, origin);
}

// CSV with header "percentile,value_ns,label", ordered by label then
// percentile.
inline void write_curves_csv(std::ostream& out, std::vector<PercentileCurve> curves) {
  std::sort(curves.begin(), curves.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  out << "percentile,value_ns,label\n";
  for (const auto& c : curves) {
    if (c.label.find_first_of(",\"\n\r") != std::string::npos)
      throw ConfigError("curve label '" + c.label + "' must not contain commas, quotes or newlines");
    auto pts = c.points;
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.percentile < b.percentile; });
    for (const auto& p : pts) {
      char buf[64];
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p.percentile);
      (void)ec;
      out << std::string_view(buf, static_cast<std::size_t>(end - buf)) << ',' << p.value_ns << ',' << c.label << '\n';
    }
  }
}

inline std::vector<PercentileCurve> read_curves_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "percentile,value_ns,label") throw ParseError(1, 0, "missing curve CSV header");
  std::vector<PercentileCurve> curves;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto c1 = line.find(',');
    auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw ParseError(line_no, 0, "expected three fields");
    PercentilePoint pt;
    auto r1 = std::from_chars(line.data(), line.data() + c1, pt.percentile);
    auto r2 = std::from_chars(line.data() + c1 + 1, line.data() + c2, pt.value_ns);
    if (r1.ec != std::errc() || r1.ptr != line.data() + c1) throw ParseError(line_no, 0, "bad percentile");
    if (r2.ec != std::errc() || r2.ptr != line.data() + c2) throw ParseError(line_no, c1 + 1, "bad value_ns");
    std::string label = line.substr(c2 + 1);
    if (curves.empty() || curves.back().label != label) curves.push_back({{}, label});
    curves.back().points.push_back(pt);
  }
  return curves;
}

}  // namespace gcd
