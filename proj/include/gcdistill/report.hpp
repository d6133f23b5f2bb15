#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gcdistill/error.hpp"
#include "gcdistill/latency.hpp"
#include "gcdistill/pipeline.hpp"
#include "gcdistill/stats.hpp"

namespace gcd {

struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::vector<bool>> flagged;  // same shape as rows

  // Flagged cells are bold; empty cells stay empty.
  std::string to_markdown() const {
    std::ostringstream out;
    if (!title.empty()) out << "### " << title << "\n\n";
    out << '|';
    for (const auto& h : header) out << ' ' << h << " |";
    out << "\n|";
    for (std::size_t i = 0; i < header.size(); ++i) out << (i == 0 ? ":---|" : "---:|");
    out << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out << '|';
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        const auto& v = rows[r][c];
        bool bold = !v.empty() && r < flagged.size() && c < flagged[r].size() && flagged[r][c];
        out << ' ' << (bold ? "**" + v + "**" : v) << " |";
      }
      out << '\n';
    }
    return out.str();
  }
};

namespace detail {

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline std::string superscript(int n) {
  static const char* digits[] = {"⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹"};
  std::string s = n < 0 ? "⁻" : "";
  std::string d = std::to_string(n < 0 ? -n : n);
  for (char c : d) s += digits[c - '0'];
  return s;
}

inline std::string reasons(const std::set<BlankReason>& r) {
  std::string s;
  for (auto x : r) {
    if (!s.empty()) s += ';';
    s += std::string(to_string(x));
  }
  return s;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace detail

// Engineering exponent (multiple of three) used to display counter totals.
inline int display_exponent(double max_value) {
  if (!(max_value > 0)) return 0;
  int e = static_cast<int>(std::floor(std::log10(max_value)));
  return e >= 0 ? e / 3 * 3 : -((-e + 2) / 3 * 3);
}

struct WorkedExample {
  Table table;
  std::string csv;
};

// Collector | Total | STW | Distilled | LBO | NLBO for one benchmark, metric
// and pool. The minimum distilled cost and minimum LBO are flagged.
inline WorkedExample render_worked_example(const std::vector<CellResult>& cells) {
  WorkedExample out;
  std::string unit = cells.empty() ? std::string() : cells.front().key.metric.name;
  double max_total = 0;
  for (const auto& c : cells)
    if (c.ok()) max_total = std::max(max_total, c.total.mean);
  int exp = display_exponent(max_total);
  double scale = std::pow(10.0, exp);
  std::string units = exp == 0 ? unit : "×10" + detail::superscript(exp) + " " + unit;
  out.table.header = {"Collector", "Total (" + units + ")", "STW (" + units + ")", "Distilled (" + units + ")",
                      "LBO (" + units + ")", "NLBO"};
  out.csv = "benchmark,heap_factor,metric,collector,total,stw,distilled,lbo,nlbo_reported,mdc,status\n";
  if (!cells.empty()) {
    const auto& k = cells.front().key;
    out.table.title = k.benchmark + (k.heap_factor ? " @ " + k.heap_factor->display() + "× heap" : "") + ", " + k.metric.name;
  }

  std::optional<double> min_dist, min_lbo;
  for (const auto& c : cells) {
    if (!c.ok()) continue;
    min_dist = min_dist ? std::min(*min_dist, c.distilled.mean) : c.distilled.mean;
    min_lbo = min_lbo ? std::min(*min_lbo, c.lbo.mean) : c.lbo.mean;
  }
  for (const auto& c : cells) {
    std::vector<std::string> row{c.key.collector};
    std::vector<bool> flags(6, false);
    if (c.ok()) {
      row.push_back(detail::fixed(c.total.mean / scale, 2));
      row.push_back(detail::fixed(c.explicit_cost.mean / scale, 2));
      row.push_back(detail::fixed(c.distilled.mean / scale, 2));
      row.push_back(detail::fixed(c.lbo.mean / scale, 2));
      row.push_back(detail::fixed(c.nlbo_reported.mean, 3));
      flags[3] = c.distilled.mean == *min_dist;
      flags[4] = c.lbo.mean == *min_lbo;
    } else {
      row.resize(6);
    }
    out.table.rows.push_back(std::move(row));
    out.table.flagged.push_back(std::move(flags));

    out.csv += detail::csv_field(c.key.benchmark) + "," + (c.key.heap_factor ? c.key.heap_factor->to_string() : "") + "," +
               c.key.metric.name + "," + detail::csv_field(c.key.collector) + ",";
    if (c.ok()) {
      out.csv += detail::full(c.total.mean) + "," + detail::full(c.explicit_cost.mean) + "," +
                 detail::full(c.distilled.mean) + "," + detail::full(c.lbo.mean) + "," +
                 detail::full(c.nlbo_reported.mean) + "," + detail::full(c.mdc) + ",ok\n";
    } else {
      out.csv += ",,,,,," + detail::reasons(c.blank) + "\n";
    }
  }
  return out;
}

struct SummaryFormat {
  double scale = 1.0;  // 100 renders fractions as percent
  int decimals = 2;
};

struct SummaryTable {
  Table table;
  std::string csv;
};

// Collectors x heap factors, per-column minimum flagged (all ties), blank
// cells left empty. Collector and factor order follow first appearance.
inline SummaryTable render_summary(const std::vector<SummaryRow>& rows, SummaryFormat fmt = {}) {
  std::vector<std::string> collectors;
  std::vector<std::optional<HeapFactor>> factors;
  for (const auto& r : rows) {
    if (std::find(collectors.begin(), collectors.end(), r.collector) == collectors.end()) collectors.push_back(r.collector);
    if (std::find(factors.begin(), factors.end(), r.heap_factor) == factors.end()) factors.push_back(r.heap_factor);
  }
  std::stable_sort(factors.begin(), factors.end(), [](const auto& a, const auto& b) {
    if (!a || !b) return !a && b;
    return *a < *b;
  });
  auto find = [&](const std::string& c, const std::optional<HeapFactor>& f) -> const SummaryRow* {
    for (const auto& r : rows)
      if (r.collector == c && r.heap_factor == f) return &r;
    return nullptr;
  };

  SummaryTable out;
  out.table.header.push_back("GC");
  for (const auto& f : factors) out.table.header.push_back(f ? f->display() + "×" : "fixed");
  if (!rows.empty()) out.table.title = rows.front().metric.name;

  std::vector<std::optional<double>> best(factors.size());
  for (std::size_t j = 0; j < factors.size(); ++j) {
    for (const auto& c : collectors) {
      const auto* r = find(c, factors[j]);
      if (r && r->geomean) best[j] = best[j] ? std::min(*best[j], *r->geomean) : *r->geomean;
    }
  }
  for (const auto& c : collectors) {
    std::vector<std::string> row{c};
    std::vector<bool> flags{false};
    for (std::size_t j = 0; j < factors.size(); ++j) {
      const auto* r = find(c, factors[j]);
      if (r && r->geomean) {
        row.push_back(detail::fixed(*r->geomean * fmt.scale, fmt.decimals));
        flags.push_back(*r->geomean == *best[j]);
      } else {
        row.emplace_back();
        flags.push_back(false);
      }
    }
    out.table.rows.push_back(std::move(row));
    out.table.flagged.push_back(std::move(flags));
  }

  out.csv = "collector,heap_factor,metric,value,status,included_benchmarks\n";
  for (const auto& c : collectors) {
    for (const auto& f : factors) {
      const auto* r = find(c, f);
      if (!r) continue;
      std::string inc;
      for (const auto& b : r->included_benchmarks) inc += (inc.empty() ? "" : ";") + b;
      out.csv += detail::csv_field(c) + "," + (f ? f->to_string() : "") + "," + r->metric.name + "," +
                 (r->geomean ? detail::full(*r->geomean) : "") + "," + (r->geomean ? "ok" : detail::reasons(r->blank)) +
                 "," + detail::csv_field(inc) + "\n";
    }
  }
  return out;
}

inline void export_curves(const std::vector<PercentileCurve>& curves, const std::filesystem::path& path) {
  if (curves.empty()) throw ConfigError("no curves to export to " + path.string());
  std::ostringstream s;
  write_curves_csv(s, curves);
  detail::write_file(path, s.str());
}

// Summary rows for one metric and quantity: one per collector x heap factor.
inline std::vector<SummaryRow> summary_rows(const AnalysisResult& res, const MetricId& metric,
                                            const std::set<std::string>& exclusions, Quantity q) {
  std::map<std::pair<std::string, std::optional<HeapFactor>>, std::vector<CellResult>> groups;
  std::vector<std::pair<std::string, std::optional<HeapFactor>>> order;
  for (const auto& c : res.cells) {
    if (c.key.metric != metric) continue;
    auto k = std::pair(c.key.collector, c.key.heap_factor);
    if (!groups.count(k)) order.push_back(k);
    groups[k].push_back(c);
  }
  std::vector<SummaryRow> rows;
  for (const auto& k : order) {
    auto row = summarize(groups[k], exclusions, q);
    row.collector = k.first;
    row.heap_factor = k.second;
    row.metric = metric;
    rows.push_back(std::move(row));
  }
  return rows;
}

// report/<metric>/worked_example.{md,csv}, report/summary_<metric>.{md,csv},
// report/stw_fraction_<metric>.{md,csv}, report/curves/<benchmark>_<kind>.csv
inline std::vector<std::filesystem::path> write_report(const AnalysisResult& res, const std::vector<CurveSet>& curves,
                                                       const std::filesystem::path& out_dir,
                                                       const std::set<std::string>& exclusions = {}) {
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::filesystem::path& p, const std::string& text) {
    detail::write_file(p, text);
    written.push_back(p);
  };
  const auto root = out_dir / "report";
  for (const auto& metric : res.metrics) {
    std::map<std::pair<std::string, std::optional<HeapFactor>>, std::vector<CellResult>> pools;
    for (const auto& c : res.cells)
      if (c.key.metric == metric) pools[{c.key.benchmark, c.key.heap_factor}].push_back(c);
    std::string md = "# Worked examples: " + metric.name + "\n\n";
    std::string csv;
    for (const auto& [k, cells] : pools) {
      auto w = render_worked_example(cells);
      md += w.table.to_markdown() + "\n";
      csv += csv.empty() ? w.csv : w.csv.substr(w.csv.find('\n') + 1);
    }
    if (csv.empty()) csv = render_worked_example({}).csv;
    emit(root / metric.name / "worked_example.md", md);
    emit(root / metric.name / "worked_example.csv", csv);

    auto summary = render_summary(summary_rows(res, metric, exclusions, Quantity::nlbo_reported));
    summary.table.title = metric.name + " LBO (geometric mean of Total/MDC)";
    emit(root / ("summary_" + metric.name + ".md"), summary.table.to_markdown());
    emit(root / ("summary_" + metric.name + ".csv"), summary.csv);

    auto stw = render_summary(summary_rows(res, metric, exclusions, Quantity::stw_fraction), {100.0, 1});
    stw.table.title = "Percent of " + metric.name + " in STW pauses (geometric mean)";
    emit(root / ("stw_fraction_" + metric.name + ".md"), stw.table.to_markdown());
    emit(root / ("stw_fraction_" + metric.name + ".csv"), stw.csv);
  }
  for (const auto& cs : curves) {
    auto p = root / "curves" / (cs.benchmark + "_" + cs.kind + ".csv");
    export_curves(cs.curves, p);
    written.push_back(p);
  }
  return written;
}

}  // namespace gcd
