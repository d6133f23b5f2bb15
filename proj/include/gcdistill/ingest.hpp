#pragma once

// Line-delimited JSON event logs written by the runtime probe.
//
// One object per '\n'-terminated line, sorted by "t":
//   {"ev":"meta","t":0,"benchmark":"h2",...}       string pairs
//   {"ev":"vm_init","t":0}
//   {"ev":"iter_start","t":10,"i":0,"ctr":{...}}
//   {"ev":"pause_start","t":20,"ctr":{...}}
//   {"ev":"pause_end","t":25,"ctr":{...}}
//   {"ev":"req","t":40,"id":0,"issue":30,"start":31,"finish":40}
//   {"ev":"gc_thread_totals","t":90,"ctr":{...}}
//   {"ev":"iter_end","t":90,"i":0,"ctr":{...}}
//   {"ev":"vm_exit","t":95,"outcome":"completed"}

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "gcdistill/error.hpp"
#include "gcdistill/model.hpp"

namespace gcd {

enum class EventKind { meta, vm_init, iter_start, iter_end, pause_start, pause_end, req, gc_thread_totals, vm_exit };

inline std::optional<EventKind> event_kind_from_string(std::string_view s) {
  static constexpr std::pair<std::string_view, EventKind> table[] = {
      {"meta", EventKind::meta},
      {"vm_init", EventKind::vm_init},
      {"iter_start", EventKind::iter_start},
      {"iter_end", EventKind::iter_end},
      {"pause_start", EventKind::pause_start},
      {"pause_end", EventKind::pause_end},
      {"req", EventKind::req},
      {"gc_thread_totals", EventKind::gc_thread_totals},
      {"vm_exit", EventKind::vm_exit},
  };
  for (const auto& [name, kind] : table)
    if (name == s) return kind;
  return std::nullopt;
}

// <benchmark>.<collector>.<heap_mb>mb.inv<k>.jsonl
inline std::string log_file_name(const ConfigKey& key, std::int64_t invocation) {
  return key.benchmark + "." + key.collector + "." + std::to_string(key.heap_mb) + "mb.inv" +
         std::to_string(invocation) + ".jsonl";
}

struct LogFileName {
  ConfigKey config;
  std::int64_t invocation = 0;
};

inline std::optional<LogFileName> parse_log_file_name(std::string_view name) {
  constexpr std::string_view suffix = ".jsonl";
  if (name.size() <= suffix.size() || name.substr(name.size() - suffix.size()) != suffix) return std::nullopt;
  name.remove_suffix(suffix.size());
  std::vector<std::string_view> parts;
  for (std::size_t pos = 0;;) {
    auto dot = name.find('.', pos);
    parts.push_back(name.substr(pos, dot - pos));
    if (dot == std::string_view::npos) break;
    pos = dot + 1;
  }
  if (parts.size() != 4) return std::nullopt;
  auto int_of = [](std::string_view s) -> std::optional<std::int64_t> {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
  };
  if (parts[2].size() < 3 || parts[2].substr(parts[2].size() - 2) != "mb") return std::nullopt;
  if (parts[3].substr(0, 3) != "inv") return std::nullopt;
  auto heap = int_of(parts[2].substr(0, parts[2].size() - 2));
  auto inv = int_of(parts[3].substr(3));
  if (!heap || !inv || parts[0].empty() || parts[1].empty()) return std::nullopt;
  LogFileName out;
  out.config.benchmark = std::string(parts[0]);
  out.config.collector = std::string(parts[1]);
  out.config.heap_mb = *heap;
  out.invocation = *inv;
  return out;
}

namespace detail {

inline std::vector<std::string> split_flags(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string f; in >> f;) out.push_back(f);
  return out;
}

inline std::string join_flags(const std::vector<std::string>& flags) {
  std::string s;
  for (const auto& f : flags) {
    if (!s.empty()) s += ' ';
    s += f;
  }
  return s;
}

// Incremental state machine over log lines. Memory held is the current
// record; events themselves are not retained.
class LogParser {
 public:
  explicit LogParser(std::optional<ConfigKey> fallback, std::optional<std::int64_t> fallback_invocation)
      : fallback_(std::move(fallback)), fallback_invocation_(fallback_invocation) {}

  void line(std::string_view text, std::size_t line_no, std::size_t offset) {
    line_no_ = line_no;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
      std::size_t within = e.byte > 0 ? e.byte - 1 : 0;
      throw ParseError(line_no, offset + within, "malformed JSON: " + std::string(e.what()));
    }
    auto bad = [&](const std::string& what) { return ParseError(line_no, offset, what); };
    if (!j.is_object()) throw bad("event is not a JSON object");
    auto ev_it = j.find("ev");
    if (ev_it == j.end() || !ev_it->is_string()) throw bad("missing string key \"ev\"");
    auto t_it = j.find("t");
    if (t_it == j.end() || !t_it->is_number_integer()) throw bad("missing integer key \"t\"");
    auto kind = event_kind_from_string(ev_it->get<std::string>());
    if (!kind) throw bad("unknown event \"" + ev_it->get<std::string>() + "\"");
    Nanos t = t_it->get<Nanos>();
    if (exited_) throw structural("event after vm_exit");
    if (any_event_ && t < last_t_) throw structural("timestamp " + std::to_string(t) + " precedes previous event");
    last_t_ = t;

    switch (*kind) {
      case EventKind::meta: on_meta(j, t, bad); break;
      case EventKind::vm_init:
        if (seen_init_) throw structural("duplicate vm_init");
        seen_init_ = true;
        rec_.vm_init_ns = t;
        break;
      case EventKind::iter_start: {
        require_init();
        if (open_) throw structural("iter_start while iteration " + std::to_string(cur_.index) + " is open");
        auto i = index_of(j, bad);
        if (i != rec_.iterations.size())
          throw structural("iteration index " + std::to_string(i) + " out of order, expected " +
                           std::to_string(rec_.iterations.size()));
        cur_ = IterationRecord{};
        cur_.index = i;
        cur_.start_ns = t;
        cur_.ctr_at_start = counters_of(j, bad);
        open_ = true;
        break;
      }
      case EventKind::pause_start:
        require_iteration("pause_start");
        if (pause_open_) throw structural("pause_start while a pause is open");
        pending_pause_ = PauseInterval{};
        pending_pause_.start_ns = t;
        pending_pause_.ctr_start = counters_of(j, bad);
        pause_open_ = true;
        break;
      case EventKind::pause_end:
        require_iteration("pause_end");
        if (!pause_open_) throw structural("pause_end without pause_start");
        pending_pause_.end_ns = t;
        pending_pause_.ctr_end = counters_of(j, bad);
        cur_.pauses.push_back(std::move(pending_pause_));
        pause_open_ = false;
        break;
      case EventKind::req: {
        require_iteration("req");
        RequestRecord r;
        r.id = int_field(j, "id", bad);
        r.issue_ns = int_field(j, "issue", bad);
        r.start_ns = int_field(j, "start", bad);
        r.finish_ns = int_field(j, "finish", bad);
        if (!cur_.requests) cur_.requests.emplace();
        cur_.requests->push_back(r);
        break;
      }
      case EventKind::gc_thread_totals:
        require_iteration("gc_thread_totals");
        if (cur_.gc_thread_totals) throw structural("duplicate gc_thread_totals");
        cur_.gc_thread_totals = counters_of(j, bad);
        break;
      case EventKind::iter_end: {
        require_iteration("iter_end");
        if (pause_open_) throw structural("unterminated pause in iteration " + std::to_string(cur_.index));
        auto i = index_of(j, bad);
        if (i != cur_.index)
          throw structural("iter_end " + std::to_string(i) + " does not match iter_start " + std::to_string(cur_.index));
        cur_.end_ns = t;
        cur_.ctr_at_end = counters_of(j, bad);
        rec_.iterations.push_back(std::move(cur_));
        open_ = false;
        break;
      }
      case EventKind::vm_exit: {
        require_init();
        if (pause_open_) throw structural("unterminated pause at vm_exit");
        if (open_) throw structural("iteration " + std::to_string(cur_.index) + " open at vm_exit");
        rec_.vm_exit_ns = t;
        rec_.outcome = Outcome::completed;
        if (auto o = j.find("outcome"); o != j.end()) {
          if (!o->is_string()) throw bad("\"outcome\" must be a string");
          auto parsed = outcome_from_string(o->get<std::string>());
          if (!parsed) throw bad("unknown outcome \"" + o->get<std::string>() + "\"");
          rec_.outcome = *parsed;
        }
        exited_ = true;
        break;
      }
    }
    any_event_ = true;
  }

  InvocationRecord finish() {
    line_no_ = 0;
    if (!seen_init_) throw StructuralError(0, "missing vm_init");
    if (!exited_) {
      // Process died: keep completed iterations, drop the partial one.
      rec_.outcome = Outcome::crash;
      rec_.vm_exit_ns.reset();
    }
    if (!seen_meta_) {
      if (!fallback_) throw StructuralError(0, "missing meta event and no configuration supplied");
      rec_.config = *fallback_;
      rec_.invocation_index = fallback_invocation_.value_or(0);
    }
    auto violations = validate_invocation(rec_);
    if (!violations.empty()) throw StructuralError(0, violations.front().to_string());
    return std::move(rec_);
  }

 private:
  template <class Bad>
  void on_meta(const nlohmann::json& j, Nanos t, const Bad& bad) {
    if (seen_meta_) throw structural("duplicate meta");
    if (any_event_) throw structural("meta must be the first event");
    (void)t;
    seen_meta_ = true;
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : j.items()) {
      if (k == "ev" || k == "t") continue;
      if (!v.is_string()) throw bad("meta value for \"" + k + "\" must be a string");
      kv[k] = v.template get<std::string>();
    }
    for (const char* req : {"jvm", "flags", "collector", "heap_mb", "benchmark", "invocation"}) {
      if (!kv.count(req)) throw structural(std::string("meta lacks required key \"") + req + "\"");
    }
    auto as_int = [&](const std::string& key) {
      const auto& s = kv.at(key);
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc() || p != s.data() + s.size())
        throw structural("meta \"" + key + "\" is not an integer: '" + s + "'");
      return v;
    };
    rec_.config.benchmark = kv.at("benchmark");
    rec_.config.collector = kv.at("collector");
    rec_.config.heap_mb = as_int("heap_mb");
    rec_.config.extra_flags = split_flags(kv.at("flags"));
    rec_.invocation_index = as_int("invocation");
    if (auto f = kv.find("heap_factor"); f != kv.end()) {
      try {
        rec_.config.heap_factor = Rational::parse(f->second);
      } catch (const ConfigError& e) {
        throw structural(std::string("meta heap_factor: ") + e.what());
      }
    }
    for (const auto& k : reserved_meta_keys()) kv.erase(k);
    rec_.meta = std::move(kv);
  }

  StructuralError structural(const std::string& what) const { return StructuralError(line_no_, what); }

  void require_init() const {
    if (!seen_init_) throw structural("missing vm_init");
  }
  void require_iteration(const char* ev) const {
    require_init();
    if (!open_) throw structural(std::string(ev) + " outside an iteration");
  }

  template <class Bad>
  static std::int64_t int_field(const nlohmann::json& j, const char* key, const Bad& bad) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) throw bad(std::string("missing integer key \"") + key + "\"");
    return it->get<std::int64_t>();
  }

  template <class Bad>
  static std::size_t index_of(const nlohmann::json& j, const Bad& bad) {
    auto v = int_field(j, "i", bad);
    if (v < 0) throw bad("negative iteration index");
    return static_cast<std::size_t>(v);
  }

  template <class Bad>
  static CostVector counters_of(const nlohmann::json& j, const Bad& bad) {
    auto it = j.find("ctr");
    if (it == j.end() || !it->is_object()) throw bad("missing object key \"ctr\"");
    CostVector out;
    for (const auto& [k, v] : it->items()) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.template get<std::int64_t>() >= 0))
        throw bad("counter \"" + k + "\" must be a non-negative integer");
      if (k.empty()) throw bad("empty counter name");
      out.set(MetricId(k), v.template get<std::uint64_t>());
    }
    return out;
  }

  std::optional<ConfigKey> fallback_;
  std::optional<std::int64_t> fallback_invocation_;
  InvocationRecord rec_;
  IterationRecord cur_;
  PauseInterval pending_pause_;
  bool seen_meta_ = false;
  bool seen_init_ = false;
  bool open_ = false;
  bool pause_open_ = false;
  bool exited_ = false;
  bool any_event_ = false;
  Nanos last_t_ = 0;
  std::size_t line_no_ = 0;
};

inline void write_counters(std::string& out, const CostVector& c) {
  out += "\"ctr\":{";
  bool first = true;
  for (const auto& [m, v] : c) {
    if (!first) out += ',';
    first = false;
    out += nlohmann::json(m.name).dump();
    out += ':';
    out += std::to_string(v);
  }
  out += '}';
}

struct PendingLine {
  Nanos t;
  std::string text;
};

}  // namespace detail

// Reads one invocation. If the log has no meta event, `fallback` supplies the
// configuration (typically from the file name).
inline InvocationRecord parse_log(std::istream& in, std::optional<ConfigKey> fallback = std::nullopt,
                                  std::optional<std::int64_t> fallback_invocation = std::nullopt) {
  detail::LogParser parser(std::move(fallback), fallback_invocation);
  std::string line;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (true) {
    line.clear();
    if (!std::getline(in, line)) break;
    ++line_no;
    bool terminated = !in.eof();
    if (!terminated) throw ParseError(line_no, offset + line.size(), "line is not newline-terminated");
    if (line.empty()) throw ParseError(line_no, offset, "empty line");
    parser.line(line, line_no, offset);
    offset += line.size() + 1;
  }
  return parser.finish();
}

inline InvocationRecord parse_log(std::string_view text, std::optional<ConfigKey> fallback = std::nullopt,
                                  std::optional<std::int64_t> fallback_invocation = std::nullopt) {
  std::istringstream in{std::string(text)};
  return parse_log(in, std::move(fallback), fallback_invocation);
}

inline InvocationRecord parse_log_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open log");
  auto name = parse_log_file_name(path.filename().string());
  std::optional<ConfigKey> cfg;
  std::optional<std::int64_t> inv;
  if (name) cfg = name->config, inv = name->invocation;
  return parse_log(in, cfg, inv);
}

// Canonical log text. Lines are stably sorted by timestamp; within a tie the
// structural order (iteration start, pauses, requests, totals, iteration end)
// is kept.
inline std::string serialize_record(const InvocationRecord& rec) {
  if (auto v = validate_invocation(rec); !v.empty()) throw StructuralError(0, "invalid record: " + v.front().to_string());
  if (!rec.meta.count("jvm")) throw StructuralError(0, "invalid record: meta.jvm is required by the log format");
  if (!rec.vm_exit_ns && rec.outcome != Outcome::crash)
    throw StructuralError(0, "invalid record: outcome " + std::string(to_string(rec.outcome)) + " needs vm_exit_ns");

  std::string out;
  {
    std::map<std::string, std::string> kv = rec.meta;
    kv["benchmark"] = rec.config.benchmark;
    kv["collector"] = rec.config.collector;
    kv["heap_mb"] = std::to_string(rec.config.heap_mb);
    kv["flags"] = detail::join_flags(rec.config.extra_flags);
    kv["invocation"] = std::to_string(rec.invocation_index);
    if (rec.config.heap_factor) kv["heap_factor"] = rec.config.heap_factor->to_string();
    out += "{\"ev\":\"meta\",\"t\":" + std::to_string(rec.vm_init_ns);
    for (const auto& [k, v] : kv) out += "," + nlohmann::json(k).dump() + ":" + nlohmann::json(v).dump();
    out += "}\n";
  }
  out += "{\"ev\":\"vm_init\",\"t\":" + std::to_string(rec.vm_init_ns) + "}\n";

  auto snapshot = [](const char* ev, Nanos t, const CostVector& c, std::optional<std::size_t> index) {
    std::string s = std::string("{\"ev\":\"") + ev + "\",\"t\":" + std::to_string(t);
    if (index) s += ",\"i\":" + std::to_string(*index);
    s += ',';
    detail::write_counters(s, c);
    s += "}\n";
    return s;
  };

  std::vector<detail::PendingLine> lines;
  for (const auto& it : rec.iterations) {
    lines.clear();
    lines.push_back({it.start_ns, snapshot("iter_start", it.start_ns, it.ctr_at_start, it.index)});
    for (const auto& p : it.pauses) {
      lines.push_back({p.start_ns, snapshot("pause_start", p.start_ns, p.ctr_start, std::nullopt)});
      lines.push_back({p.end_ns, snapshot("pause_end", p.end_ns, p.ctr_end, std::nullopt)});
    }
    if (it.requests) {
      for (const auto& r : *it.requests) {
        lines.push_back({r.finish_ns, "{\"ev\":\"req\",\"t\":" + std::to_string(r.finish_ns) +
                                          ",\"id\":" + std::to_string(r.id) + ",\"issue\":" + std::to_string(r.issue_ns) +
                                          ",\"start\":" + std::to_string(r.start_ns) +
                                          ",\"finish\":" + std::to_string(r.finish_ns) + "}\n"});
      }
    }
    if (it.gc_thread_totals)
      lines.push_back({it.end_ns, snapshot("gc_thread_totals", it.end_ns, *it.gc_thread_totals, std::nullopt)});
    lines.push_back({it.end_ns, snapshot("iter_end", it.end_ns, it.ctr_at_end, it.index)});
    std::stable_sort(lines.begin(), lines.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
    for (const auto& l : lines) out += l.text;
  }
  if (rec.vm_exit_ns) {
    out += "{\"ev\":\"vm_exit\",\"t\":" + std::to_string(*rec.vm_exit_ns) + ",\"outcome\":\"" +
           std::string(to_string(rec.outcome)) + "\"}\n";
  }
  return out;
}

inline void write_log_file(const std::filesystem::path& path, const InvocationRecord& rec) {
  auto text = serialize_record(rec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace gcd
