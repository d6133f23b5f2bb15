#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gcdistill/error.hpp"
#include "gcdistill/model.hpp"

namespace gcd {

struct HeapTrial {
  std::int64_t heap_mb = 0;
  bool success = false;
};

struct MinHeapResult {
  std::string benchmark;
  std::string probe_collector = "g1";
  std::int64_t min_mb = 0;
  std::int64_t granularity_mb = 1;
  std::vector<HeapTrial> trials;
};

// Returns true if one run at the given heap size completed.
using HeapRunner = std::function<bool(std::int64_t heap_mb)>;

// Upper bound on runner calls made by find_min_heap.
inline std::int64_t min_heap_budget(std::int64_t lo_mb, std::int64_t hi_mb, std::int64_t granularity_mb, int repeats) {
  std::int64_t steps = (hi_mb - lo_mb + granularity_mb - 1) / granularity_mb;
  std::int64_t log = 0;
  while ((std::int64_t{1} << log) < steps) ++log;
  return repeats * (log + 2);
}

// Binary search over lo, lo+g, lo+2g, ... (the last step clamped to hi).
// A size passes only if all `repeats` runs succeed.
inline MinHeapResult find_min_heap(const HeapRunner& runner, std::int64_t lo_mb, std::int64_t hi_mb,
                                   std::int64_t granularity_mb = 1, int repeats = 1, std::string benchmark = {},
                                   std::string probe_collector = "g1") {
  if (granularity_mb < 1) throw ConfigError("granularity must be >= 1 MB");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (lo_mb < 1 || lo_mb >= hi_mb) throw ConfigError("need 1 <= lo_mb < hi_mb");

  MinHeapResult out;
  out.benchmark = std::move(benchmark);
  out.probe_collector = std::move(probe_collector);
  out.granularity_mb = granularity_mb;

  const std::int64_t steps = (hi_mb - lo_mb + granularity_mb - 1) / granularity_mb;
  auto size_at = [&](std::int64_t j) { return std::min(lo_mb + j * granularity_mb, hi_mb); };
  auto passes = [&](std::int64_t mb) {
    for (int r = 0; r < repeats; ++r) {
      bool ok = runner(mb);
      out.trials.push_back({mb, ok});
      if (!ok) return false;
    }
    return true;
  };

  if (!passes(hi_mb)) throw ConfigError("upper search bound " + std::to_string(hi_mb) + " MB does not run");
  if (passes(lo_mb)) {
    out.min_mb = lo_mb;
    return out;
  }
  std::int64_t fail = 0, pass = steps;  // indices into the grid
  while (pass - fail > 1) {
    std::int64_t mid = fail + (pass - fail) / 2;
    if (passes(size_at(mid)))
      pass = mid;
    else
      fail = mid;
  }
  out.min_mb = size_at(pass);
  return out;
}

inline std::vector<std::pair<HeapFactor, std::int64_t>> heap_ladder(std::int64_t min_mb,
                                                                    const std::vector<HeapFactor>& factors) {
  if (min_mb < 1) throw ConfigError("min heap must be >= 1 MB");
  std::vector<std::pair<HeapFactor, std::int64_t>> out;
  out.reserve(factors.size());
  for (const auto& f : factors) {
    if (f < HeapFactor(1)) throw ConfigError("heap factor " + f.to_string() + " is below 1");
    out.emplace_back(f, f.ceil_mul(min_mb));
  }
  return out;
}

inline const std::vector<HeapFactor>& default_heap_factors() {
  static const std::vector<HeapFactor> f{HeapFactor(7, 5),  HeapFactor(19, 10), HeapFactor(12, 5), HeapFactor(3),
                                         HeapFactor(37, 10), HeapFactor(22, 5),  HeapFactor(26, 5), HeapFactor(6)};
  return f;
}

// "benchmark,probe_collector,min_mb,granularity_mb"
inline void write_min_heap_csv(const std::filesystem::path& path, const std::vector<MinHeapResult>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "benchmark,probe_collector,min_mb,granularity_mb\n";
  for (const auto& r : rows) out << r.benchmark << ',' << r.probe_collector << ',' << r.min_mb << ',' << r.granularity_mb << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

inline std::vector<MinHeapResult> read_min_heap_csv(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  if (!std::getline(in, line) || line != "benchmark,probe_collector,min_mb,granularity_mb")
    throw ParseError(1, 0, source + ": missing min-heap CSV header");
  std::vector<MinHeapResult> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 4) throw ParseError(line_no, 0, source + ": expected 4 fields");
    MinHeapResult r;
    r.benchmark = f[0];
    r.probe_collector = f[1];
    try {
      r.min_mb = std::stoll(f[2]);
      r.granularity_mb = std::stoll(f[3]);
    } catch (const std::exception&) {
      throw ParseError(line_no, 0, source + ": non-integer heap size");
    }
    if (r.min_mb < 1) throw ParseError(line_no, 0, source + ": min_mb must be >= 1");
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::map<std::string, std::int64_t> read_min_heap_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open min-heap table");
  std::map<std::string, std::int64_t> out;
  for (const auto& r : read_min_heap_csv(in, path.string())) out[r.benchmark] = r.min_mb;
  return out;
}

}  // namespace gcd
