#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "covert/loader.hpp"
#include "covert/variants.hpp"

namespace covert::bench {

struct Options {
  std::optional<Variant> variant;  // overrides the problem files
  VariantParameters overrides;
  double timeout_seconds = 1800;
  std::size_t threads = 0;  // 0: hardware concurrency, capped by COVERT_PLANNER_THREADS
};

struct InstanceResult {
  std::string instance;
  std::string domain;
  std::string variant;
  bool solved = false;
  double seconds = 0;
  std::size_t trace_length = 0;
  std::string failure;  // error code when unsolved
  std::string message;
};

struct Row {
  std::string domain;
  std::string variant;
  std::size_t instances = 0;
  std::size_t solved = 0;
  std::optional<double> time_avg, time_sd, trace_length_avg;
};

struct Report {
  std::vector<Row> rows;
  std::vector<InstanceResult> instances;  // sorted by instance path
};

inline std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("COVERT_PLANNER_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

inline InstanceResult run_instance(const std::string& path, const Options& opts) {
  InstanceResult r;
  r.instance = std::filesystem::path(path).filename().string();
  try {
    LoadedProblem p = load_problem(path);
    r.domain = p.domain.name;
    VariantParameters params = p.spec.parameters();
    params.merge(opts.overrides);
    if (opts.variant) params.variant = opts.variant;
    VariantConfig config = make_variant_config(params);
    r.variant = std::string(to_string(config.variant));
    const auto start = std::chrono::steady_clock::now();
    config.deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  std::chrono::duration<double>(opts.timeout_seconds));
    Solution sol = solve(p.domain, p.model, p.spec.initial, p.spec.goals, config);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.solved = true;
    r.trace_length = sol.trace.size();
  } catch (const Error& e) {
    r.failure = e.code();
    r.message = e.what();
  } catch (const std::exception& e) {
    r.failure = "Error";
    r.message = e.what();
  }
  if (r.variant.empty()) r.variant = opts.variant ? std::string(to_string(*opts.variant)) : "?";
  if (r.domain.empty()) r.domain = "?";
  return r;
}

// Mean and sample standard deviation.
inline std::pair<double, double> mean_sd(const std::vector<double>& xs) {
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

inline Report summarize(std::vector<InstanceResult> results) {
  Report rep;
  std::map<std::pair<std::string, std::string>, std::vector<const InstanceResult*>> groups;
  for (const auto& r : results) groups[{r.domain, r.variant}].push_back(&r);
  for (const auto& [key, members] : groups) {
    Row row{key.first, key.second, members.size(), 0, {}, {}, {}};
    std::vector<double> times, lengths;
    for (const auto* m : members)
      if (m->solved) {
        times.push_back(m->seconds);
        lengths.push_back(static_cast<double>(m->trace_length));
      }
    row.solved = times.size();
    if (!times.empty()) {
      std::tie(row.time_avg, row.time_sd) = mean_sd(times);
      row.trace_length_avg = mean_sd(lengths).first;
    }
    rep.rows.push_back(row);
  }
  rep.instances = std::move(results);
  return rep;
}

// Runs every *.problem file in `suite` (non-recursive) on a worker pool.
inline Report run_suite(const std::string& suite, const Options& opts = {}) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(suite)) throw InputError("suite '" + suite + "' is not a directory");
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(suite))
    if (entry.is_regular_file() && entry.path().extension() == ".problem") paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());

  std::vector<InstanceResult> results(paths.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < paths.size();) results[i] = run_instance(paths[i], opts);
  };
  std::vector<std::thread> pool;
  const std::size_t workers = worker_count(opts.threads, paths.size());
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  if (!paths.empty()) work();
  for (auto& t : pool) t.join();
  return summarize(std::move(results));
}

inline std::string format_number(const std::optional<double>& v, int precision) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
  return buf;
}

inline std::string format_table(const Report& rep) {
  std::vector<std::vector<std::string>> cells{
      {"domain", "variant", "instances", "solved", "dnf", "time_avg_s", "time_sd_s", "obs_len_avg"}};
  for (const auto& r : rep.rows)
    cells.push_back({r.domain, r.variant, std::to_string(r.instances), std::to_string(r.solved),
                     std::to_string(r.instances - r.solved), format_number(r.time_avg, 3),
                     format_number(r.time_sd, 3), format_number(r.trace_length_avg, 2)});
  for (const auto& i : rep.instances)
    if (!i.solved) cells.push_back({i.domain, i.variant, i.instance, "DNF", i.failure, "-", "-", "-"});
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size()) out += std::string(width[c] - row[c].size() + 2, ' ');
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::json to_json(const Report& rep) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json doc;
  doc["rows"] = nlohmann::json::array();
  for (const auto& r : rep.rows)
    doc["rows"].push_back({{"domain", r.domain},
                           {"variant", r.variant},
                           {"instances", r.instances},
                           {"solved", r.solved},
                           {"dnf", r.instances - r.solved},
                           {"time_avg_s", opt(r.time_avg)},
                           {"time_sd_s", opt(r.time_sd)},
                           {"obs_len_avg", opt(r.trace_length_avg)}});
  doc["instances"] = nlohmann::json::array();
  for (const auto& i : rep.instances) {
    nlohmann::json row{{"instance", i.instance}, {"domain", i.domain}, {"variant", i.variant}, {"solved", i.solved}};
    if (i.solved) {
      row["seconds"] = i.seconds;
      row["obs_len"] = i.trace_length;
    } else {
      row["failure"] = i.failure;
      row["message"] = i.message;
    }
    doc["instances"].push_back(row);
  }
  return doc;
}

}  // namespace covert::bench
