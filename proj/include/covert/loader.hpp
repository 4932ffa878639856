#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "covert/model_io.hpp"
#include "covert/observation.hpp"
#include "covert/strips.hpp"

namespace covert {

// A problem file together with the domain and observation model it names.
struct LoadedProblem {
  GroundedDomain domain;
  ObservationModel model;
  ProblemSpec spec;
  std::string problem_path;
};

// Paths inside a problem file are relative to the file itself. Explicit
// domain/observation paths override the ones the file names; with neither,
// the observer sees every action (one-to-one model).
inline LoadedProblem load_problem(const std::string& problem_path, const std::optional<std::string>& domain_path = {},
                                  const std::optional<std::string>& obs_path = {}) {
  namespace fs = std::filesystem;
  RawProblem raw = parse_problem_text(read_file(problem_path));
  const fs::path base = fs::path(problem_path).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (base / p).string(); };

  std::string domain_file;
  if (domain_path) domain_file = *domain_path;
  else if (!raw.domain_path.empty()) domain_file = resolve(raw.domain_path);
  else throw BadParameter("no domain given: pass --domain or add 'domain:' to " + problem_path);

  LoadedProblem out;
  out.problem_path = problem_path;
  out.domain = parse_domain(read_file(domain_file));
  if (obs_path) out.model = parse_observation_model(read_file(*obs_path), out.domain);
  else if (!raw.observation_path.empty())
    out.model = parse_observation_model(read_file(resolve(raw.observation_path)), out.domain);
  else out.model = one_to_one_model(out.domain);
  out.spec = resolve_problem(std::move(raw), out.domain);
  return out;
}

}  // namespace covert
