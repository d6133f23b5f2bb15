#pragma once

#include <algorithm>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/utsname.h>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

#include "gcdistill/distill.hpp"
#include "gcdistill/error.hpp"
#include "gcdistill/heapsize.hpp"
#include "gcdistill/ingest.hpp"
#include "gcdistill/model.hpp"

namespace gcd {

struct FlagOverride {
  std::vector<std::string> remove;
  std::vector<std::string> add;
};

struct ExperimentConfig {
  std::vector<std::string> benchmarks;
  // "g1" or "g1 -XX:ParallelGCThreads=2": the first token names the
  // collector, the rest become ConfigKey::extra_flags.
  std::vector<std::string> collectors;
  std::vector<HeapFactor> heap_factors = default_heap_factors();
  int invocations = 20;
  int iterations = 5;
  std::vector<MetricId> metrics{metrics::wall_time_ns, metrics::cycles};
  AttributionMode attribution = AttributionMode::stw_pauses;
  std::filesystem::path min_heap_table;
  std::map<std::string, std::int64_t> min_heap_mb;  // inline entries win over the table
  std::vector<std::string> jvm_base_flags{"-server", "-XX:-TieredCompilation", "-Xcomp"};
  std::map<std::string, FlagOverride> flag_overrides{
      {"tradebeans", {{"-XX:-TieredCompilation", "-Xcomp"}, {}}},
      {"tradesoap", {{"-XX:-TieredCompilation", "-Xcomp"}, {}}},
  };

  std::string java = "java";
  std::vector<std::string> harness{"-jar", "dacapo.jar", "-n", "{iterations}", "{benchmark}"};
  std::filesystem::path probe_path;
  int timeout_s = 3600;
  std::optional<std::int64_t> epsilon_heap_mb;  // epsilon runs at a fixed heap when set
  std::set<std::string> exclusions;
  std::string pool = "per_heap";
};

namespace detail {

template <class T>
T json_get(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

inline HeapFactor factor_from_json(const nlohmann::json& v) {
  if (v.is_string()) return Rational::parse(v.get<std::string>());
  if (v.is_number_integer()) return HeapFactor(v.get<std::int64_t>());
  if (v.is_number_float()) return Rational::parse(v.dump());
  throw ConfigError("heap factor must be a number or string");
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig c;
  c.benchmarks = detail::json_get(j, "benchmarks", c.benchmarks);
  c.collectors = detail::json_get(j, "collectors", c.collectors);
  if (auto it = j.find("heap_factors"); it != j.end()) {
    c.heap_factors.clear();
    for (const auto& v : *it) c.heap_factors.push_back(detail::factor_from_json(v));
  }
  c.invocations = detail::json_get(j, "invocations", c.invocations);
  c.iterations = detail::json_get(j, "iterations", c.iterations);
  if (auto it = j.find("metrics"); it != j.end()) {
    c.metrics.clear();
    for (const auto& v : *it) c.metrics.emplace_back(v.get<std::string>());
  }
  if (auto it = j.find("attribution"); it != j.end()) c.attribution = attribution_from_string(it->get<std::string>());
  c.min_heap_table = detail::json_get<std::string>(j, "min_heap_table", c.min_heap_table.string());
  c.min_heap_mb = detail::json_get(j, "min_heap_mb", c.min_heap_mb);
  c.jvm_base_flags = detail::json_get(j, "jvm_base_flags", c.jvm_base_flags);
  if (auto it = j.find("flag_overrides"); it != j.end()) {
    c.flag_overrides.clear();
    for (const auto& [bench, o] : it->items()) {
      FlagOverride fo;
      fo.remove = detail::json_get(o, "remove", fo.remove);
      fo.add = detail::json_get(o, "add", fo.add);
      c.flag_overrides[bench] = fo;
    }
  }
  c.java = detail::json_get(j, "java", c.java);
  c.harness = detail::json_get(j, "harness", c.harness);
  c.probe_path = detail::json_get<std::string>(j, "probe_path", c.probe_path.string());
  c.timeout_s = detail::json_get(j, "timeout_s", c.timeout_s);
  if (auto it = j.find("epsilon_heap_mb"); it != j.end() && !it->is_null()) c.epsilon_heap_mb = it->get<std::int64_t>();
  if (auto it = j.find("exclusions"); it != j.end())
    for (const auto& v : *it) c.exclusions.insert(v.get<std::string>());
  c.pool = detail::json_get(j, "pool", c.pool);

  if (c.invocations < 1) throw ConfigError("invocations must be >= 1");
  if (c.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (c.timeout_s < 1) throw ConfigError("timeout_s must be >= 1");
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open config");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  auto c = config_from_json(j);
  if (!c.min_heap_table.empty() && c.min_heap_table.is_relative())
    c.min_heap_table = path.parent_path() / c.min_heap_table;
  return c;
}

inline std::vector<std::string> collector_flags(const std::string& collector) {
  static const std::map<std::string, std::vector<std::string>> table{
      {"serial", {"-XX:+UseSerialGC"}},
      {"parallel", {"-XX:+UseParallelGC"}},
      {"g1", {"-XX:+UseG1GC"}},
      {"shenandoah", {"-XX:+UseShenandoahGC"}},
      {"zgc", {"-XX:+UseZGC"}},
      {"epsilon", {"-XX:+UnlockExperimentalVMOptions", "-XX:+UseEpsilonGC"}},
  };
  auto it = table.find(collector);
  if (it == table.end()) throw ConfigError("unknown collector '" + collector + "'");
  return it->second;
}

// All configurations in lexicographic ConfigKey order.
inline std::vector<ConfigKey> expand_configs(const ExperimentConfig& cfg, const std::map<std::string, std::int64_t>& min_heaps) {
  std::vector<ConfigKey> out;
  for (const auto& b : cfg.benchmarks) {
    for (const auto& spec : cfg.collectors) {
      auto tokens = detail::split_flags(spec);
      if (tokens.empty()) throw ConfigError("empty collector entry");
      collector_flags(tokens.front());
      ConfigKey base;
      base.benchmark = b;
      base.collector = tokens.front();
      base.extra_flags.assign(tokens.begin() + 1, tokens.end());
      if (base.collector == "epsilon" && cfg.epsilon_heap_mb) {
        base.heap_mb = *cfg.epsilon_heap_mb;
        out.push_back(base);
        continue;
      }
      auto mh = min_heaps.find(b);
      if (mh == min_heaps.end()) throw ConfigError("no minimum heap entry for benchmark '" + b + "'");
      for (const auto& [f, mb] : heap_ladder(mh->second, cfg.heap_factors)) {
        ConfigKey k = base;
        k.heap_mb = mb;
        k.heap_factor = f;
        out.push_back(k);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct PlanTask {
  ConfigKey key;
  std::int64_t invocation = 0;
  std::int64_t round = 0;

  bool operator==(const PlanTask& o) const {
    return key == o.key && key.heap_factor == o.key.heap_factor && invocation == o.invocation && round == o.round;
  }
};

struct ExperimentPlan {
  std::vector<PlanTask> tasks;
  bool operator==(const ExperimentPlan&) const = default;
};

namespace detail {

inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  // rejection sampling keeps the result independent of the standard library
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do v = rng();
  while (v >= limit);
  return v % n;
}

}  // namespace detail

// Round r holds invocation r of every configuration. Without a seed each
// round is in lexicographic order; with one, each round is shuffled
// independently and reproducibly.
inline ExperimentPlan build_plan(const std::vector<ConfigKey>& configs, int invocations,
                                 std::optional<std::uint64_t> seed = std::nullopt) {
  if (invocations < 1) throw ConfigError("invocations must be >= 1");
  ExperimentPlan plan;
  for (int r = 0; r < invocations; ++r) {
    std::vector<ConfigKey> round = configs;
    if (seed) {
      std::mt19937_64 rng(*seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(r));
      for (std::size_t i = round.size(); i > 1; --i) std::swap(round[i - 1], round[detail::uniform_below(rng, i)]);
    }
    for (auto& k : round) plan.tasks.push_back({std::move(k), r, r});
  }
  return plan;
}

inline ExperimentPlan build_plan(const ExperimentConfig& cfg, const std::map<std::string, std::int64_t>& min_heaps,
                                 std::optional<std::uint64_t> seed = std::nullopt) {
  return build_plan(expand_configs(cfg, min_heaps), cfg.invocations, seed);
}

inline ExperimentPlan build_plan(const ExperimentConfig& cfg, std::optional<std::uint64_t> seed = std::nullopt) {
  std::map<std::string, std::int64_t> min_heaps;
  if (!cfg.min_heap_table.empty()) min_heaps = read_min_heap_table(cfg.min_heap_table);
  for (const auto& [b, mb] : cfg.min_heap_mb) min_heaps[b] = mb;
  return build_plan(cfg, min_heaps, seed);
}

inline nlohmann::json to_json(const ConfigKey& k) {
  nlohmann::json j{{"benchmark", k.benchmark}, {"collector", k.collector}, {"heap_mb", k.heap_mb}, {"extra_flags", k.extra_flags}};
  j["heap_factor"] = k.heap_factor ? nlohmann::json(k.heap_factor->to_string()) : nlohmann::json(nullptr);
  return j;
}

inline ConfigKey config_key_from_json(const nlohmann::json& j) {
  ConfigKey k;
  k.benchmark = j.at("benchmark").get<std::string>();
  k.collector = j.at("collector").get<std::string>();
  k.heap_mb = j.at("heap_mb").get<std::int64_t>();
  k.extra_flags = j.value("extra_flags", std::vector<std::string>{});
  if (auto it = j.find("heap_factor"); it != j.end() && !it->is_null()) k.heap_factor = Rational::parse(it->get<std::string>());
  return k;
}

inline nlohmann::json to_json(const ExperimentPlan& plan) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : plan.tasks) {
    auto j = to_json(t.key);
    j["invocation"] = t.invocation;
    j["round"] = t.round;
    tasks.push_back(std::move(j));
  }
  return {{"tasks", tasks}};
}

inline ExperimentPlan plan_from_json(const nlohmann::json& j) {
  ExperimentPlan p;
  for (const auto& t : j.at("tasks")) p.tasks.push_back({config_key_from_json(t), t.at("invocation").get<std::int64_t>(), t.at("round").get<std::int64_t>()});
  return p;
}

inline std::string probe_options(const ExperimentConfig& cfg, const std::filesystem::path& log_path,
                                 const std::filesystem::path& pipe_path) {
  std::string ms;
  for (const auto& m : cfg.metrics) ms += (ms.empty() ? "" : ",") + m.name;
  return "metrics=" + ms + ";out=" + log_path.string() + ";pipe=" + pipe_path.string() +
         ";mode=" + std::string(to_string(cfg.attribution));
}

inline std::filesystem::path pipe_path_for(const std::filesystem::path& log_path) {
  auto p = log_path;
  p += ".ctl";
  return p;
}

inline std::vector<std::string> jvm_command(const ConfigKey& key, const ExperimentConfig& cfg,
                                            const std::filesystem::path& probe_path, const std::filesystem::path& log_path) {
  std::vector<std::string> flags = cfg.jvm_base_flags;
  const FlagOverride* ov = nullptr;
  if (auto it = cfg.flag_overrides.find(key.benchmark); it != cfg.flag_overrides.end()) ov = &it->second;
  std::vector<std::string> argv{cfg.java};
  for (const auto& f : flags) argv.push_back(f);
  for (const auto& f : collector_flags(key.collector)) argv.push_back(f);
  argv.push_back("-Xms" + std::to_string(key.heap_mb) + "m");
  argv.push_back("-Xmx" + std::to_string(key.heap_mb) + "m");
  for (const auto& f : key.extra_flags) argv.push_back(f);
  argv.push_back("-agentpath:" + probe_path.string() + "=" + probe_options(cfg, log_path, pipe_path_for(log_path)));
  if (ov) {
    std::erase_if(argv, [&](const std::string& a) { return std::find(ov->remove.begin(), ov->remove.end(), a) != ov->remove.end(); });
    argv.insert(argv.end(), ov->add.begin(), ov->add.end());
  }
  for (auto a : cfg.harness) {
    auto sub = [&](const std::string& token, const std::string& value) {
      for (std::size_t p; (p = a.find(token)) != std::string::npos;) a.replace(p, token.size(), value);
    };
    sub("{benchmark}", key.benchmark);
    sub("{iterations}", std::to_string(cfg.iterations));
    sub("{pipe}", pipe_path_for(log_path).string());
    sub("{heap_mb}", std::to_string(key.heap_mb));
    argv.push_back(a);
  }
  return argv;
}

struct TaskContext {
  const PlanTask* task = nullptr;
  std::size_t task_index = 0;
  std::vector<std::string> argv;
  std::filesystem::path log_path;
  std::filesystem::path output_path;  // captured stdout/stderr
  std::chrono::seconds timeout{3600};
};

struct TaskResult {
  Outcome outcome = Outcome::crash;
  int exit_code = -1;
  std::string note;
};

using TaskRunner = std::function<TaskResult(const TaskContext&)>;

// fork/exec one child, output captured to a file, killed at the timeout.
// Success needs exit status 0 and no OutOfMemoryError in the output.
inline TaskResult run_process(const TaskContext& ctx) {
  std::error_code ec;
  std::filesystem::create_directories(ctx.log_path.parent_path(), ec);
  auto fifo = pipe_path_for(ctx.log_path);
  if (!std::filesystem::exists(fifo)) ::mkfifo(fifo.c_str(), 0600);

  std::vector<char*> args;
  for (const auto& a : ctx.argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = ::fork();
  if (pid < 0) return {Outcome::crash, -1, "fork failed"};
  if (pid == 0) {
    int fd = ::open(ctx.output_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      ::dup2(fd, 1);
      ::dup2(fd, 2);
      ::close(fd);
    }
    ::setpgid(0, 0);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  auto deadline = std::chrono::steady_clock::now() + ctx.timeout;
  int status = 0;
  while (true) {
    pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) return {Outcome::crash, -1, "waitpid failed"};
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      std::filesystem::remove(fifo, ec);
      return {Outcome::timeout, -1, "killed after " + std::to_string(ctx.timeout.count()) + " s"};
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  std::filesystem::remove(fifo, ec);

  bool oom = false;
  {
    std::ifstream out(ctx.output_path);
    for (std::string line; std::getline(out, line);)
      if (line.find("OutOfMemoryError") != std::string::npos) oom = true;
  }
  TaskResult res;
  if (WIFEXITED(status)) {
    res.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    res.exit_code = 128 + WTERMSIG(status);
    res.note = "signal " + std::to_string(WTERMSIG(status));
  }
  if (oom)
    res.outcome = Outcome::oom;
  else if (res.exit_code == 0)
    res.outcome = Outcome::completed;
  else
    res.outcome = Outcome::crash;
  return res;
}

inline std::map<std::string, std::string> capture_environment() {
  std::map<std::string, std::string> env;
  struct utsname u {};
  if (::uname(&u) == 0) {
    env["kernel"] = std::string(u.sysname) + " " + u.release;
    env["host"] = u.nodename;
  }
  auto first_line = [](const char* path) -> std::optional<std::string> {
    std::ifstream in(path);
    std::string s;
    if (in && std::getline(in, s)) return s;
    return std::nullopt;
  };
  {
    std::ifstream in("/proc/cpuinfo");
    for (std::string line; std::getline(in, line);) {
      if (line.rfind("model name", 0) == 0) {
        auto c = line.find(':');
        if (c != std::string::npos) env["cpu_model"] = line.substr(line.find_first_not_of(' ', c + 1));
        break;
      }
    }
  }
  if (auto v = first_line("/sys/devices/system/cpu/intel_pstate/no_turbo")) env["no_turbo"] = *v;
  if (auto v = first_line("/sys/devices/system/cpu/cpufreq/boost")) env["cpufreq_boost"] = *v;
  if (auto v = first_line("/sys/devices/system/cpu/cpu0/cpufreq/scaling_governor")) env["scaling_governor"] = *v;
  return env;
}

struct ManifestEntry {
  std::size_t task_index = 0;
  ConfigKey key;
  std::int64_t invocation = 0;
  std::string log;
  Outcome outcome = Outcome::crash;
  int exit_code = -1;
  double duration_s = 0;
  std::string note;
};

struct RunManifest {
  std::size_t plan_size = 0;
  std::map<std::string, std::string> environment;
  std::vector<ManifestEntry> entries;  // in execution order

  bool has(std::size_t task_index) const {
    return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.task_index == task_index; });
  }
};

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    auto j = to_json(e.key);
    j["task"] = e.task_index;
    j["invocation"] = e.invocation;
    j["log"] = e.log;
    j["outcome"] = std::string(to_string(e.outcome));
    j["exit_code"] = e.exit_code;
    j["duration_s"] = e.duration_s;
    j["note"] = e.note;
    entries.push_back(std::move(j));
  }
  return {{"plan_size", m.plan_size}, {"environment", m.environment}, {"entries", entries}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.plan_size = j.at("plan_size").get<std::size_t>();
  m.environment = j.value("environment", std::map<std::string, std::string>{});
  for (const auto& e : j.at("entries")) {
    ManifestEntry me;
    me.task_index = e.at("task").get<std::size_t>();
    me.key = config_key_from_json(e);
    me.invocation = e.at("invocation").get<std::int64_t>();
    me.log = e.value("log", "");
    me.outcome = outcome_from_string(e.at("outcome").get<std::string>()).value_or(Outcome::crash);
    me.exit_code = e.value("exit_code", -1);
    me.duration_s = e.value("duration_s", 0.0);
    me.note = e.value("note", "");
    m.entries.push_back(std::move(me));
  }
  return m;
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open manifest");
  try {
    return manifest_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string(), std::string("corrupt manifest: ") + e.what());
  }
}

// Written to a temporary file and renamed, so a crash or a full disk leaves
// the previous manifest intact.
inline void save_manifest(const std::filesystem::path& path, const RunManifest& m) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError(tmp.string(), "cannot open for writing");
    out << to_json(m).dump(2) << '\n';
    out.flush();
    if (!out) throw IoError(tmp.string(), "write failed (disk full?)");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(path.string(), "rename failed: " + ec.message());
}

struct ExecuteOptions {
  std::filesystem::path out_dir;
  bool require_probe = true;
};

// Runs tasks strictly in plan order, one at a time. Tasks already recorded
// in out_dir/manifest.json are skipped; failures are recorded, never retried.
inline RunManifest execute_plan(const ExperimentPlan& plan, const ExperimentConfig& cfg, const ExecuteOptions& opt,
                                const TaskRunner& runner = run_process) {
  if (opt.require_probe && (cfg.probe_path.empty() || !std::filesystem::exists(cfg.probe_path)))
    throw ConfigError("probe agent not found at '" + cfg.probe_path.string() + "'");
  const auto logs = opt.out_dir / "logs";
  std::filesystem::create_directories(logs);
  const auto manifest_path = opt.out_dir / "manifest.json";

  RunManifest manifest;
  if (std::filesystem::exists(manifest_path)) {
    manifest = load_manifest(manifest_path);
    if (manifest.plan_size != plan.tasks.size()) throw ConfigError("existing manifest belongs to a different plan");
    for (const auto& e : manifest.entries) {
      if (e.task_index >= plan.tasks.size() || !(plan.tasks[e.task_index].key == e.key) ||
          plan.tasks[e.task_index].invocation != e.invocation)
        throw ConfigError("existing manifest entry " + std::to_string(e.task_index) + " does not match the plan");
    }
  } else {
    manifest.plan_size = plan.tasks.size();
  }
  manifest.environment = capture_environment();
  save_manifest(manifest_path, manifest);

  for (std::size_t i = 0; i < plan.tasks.size(); ++i) {
    if (manifest.has(i)) continue;
    const auto& task = plan.tasks[i];
    TaskContext ctx;
    ctx.task = &task;
    ctx.task_index = i;
    ctx.log_path = logs / log_file_name(task.key, task.invocation);
    ctx.output_path = ctx.log_path;
    ctx.output_path.replace_extension(".out");
    ctx.argv = jvm_command(task.key, cfg, cfg.probe_path, ctx.log_path);
    ctx.timeout = std::chrono::seconds(cfg.timeout_s);

    auto t0 = std::chrono::steady_clock::now();
    TaskResult res = runner(ctx);
    auto t1 = std::chrono::steady_clock::now();

    if (res.outcome == Outcome::completed) {
      try {
        auto rec = parse_log_file(ctx.log_path);
        rec.config.heap_factor = task.key.heap_factor;
        for (const auto& [k, v] : manifest.environment) rec.meta.emplace(k, v);
        if (rec.meta.count("jvm")) write_log_file(ctx.log_path, rec);
      } catch (const Error& e) {
        res.outcome = Outcome::crash;
        res.note = std::string("unusable log: ") + e.what();
      }
    }
    ManifestEntry e;
    e.task_index = i;
    e.key = task.key;
    e.invocation = task.invocation;
    e.log = std::filesystem::relative(ctx.log_path, opt.out_dir).string();
    e.outcome = res.outcome;
    e.exit_code = res.exit_code;
    e.duration_s = std::chrono::duration<double>(t1 - t0).count();
    e.note = res.note;
    manifest.entries.push_back(std::move(e));
    save_manifest(manifest_path, manifest);
  }
  return manifest;
}

// Overrides log outcomes with what the manifest recorded and adds
// placeholder records for failed invocations that left no usable log.
inline void apply_manifest(std::vector<InvocationRecord>& records, const RunManifest& m) {
  for (const auto& e : m.entries) {
    auto it = std::find_if(records.begin(), records.end(), [&](const InvocationRecord& r) {
      return r.config == e.key && r.invocation_index == e.invocation;
    });
    if (it != records.end()) {
      it->config.heap_factor = e.key.heap_factor;
      if (e.outcome != Outcome::completed) it->outcome = e.outcome;
    } else if (e.outcome != Outcome::completed) {
      InvocationRecord r;
      r.config = e.key;
      r.invocation_index = e.invocation;
      r.outcome = e.outcome;
      records.push_back(std::move(r));
    }
  }
}

}  // namespace gcd
