#pragma once

#include <deque>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "covert/covert.hpp"

namespace covert::testing {

inline std::string data_path(const std::string& rel) { return std::string(COVERT_DATA_DIR) + "/" + rel; }

inline Plan plan_file(const GroundedDomain& d, const std::string& rel) {
  return d.make_plan(parse_plan_lines(read_file(data_path(rel))));
}

inline LoadedProblem four_blocks(const char* obs = "obs-o1.txt") {
  return load_problem(data_path("blocksworld/four-blocks.problem"), std::nullopt, data_path(std::string("blocksworld/") + obs));
}

// Small hand-built domains: fluents and actions given by name lists.
struct ToyAction {
  std::string name;
  std::vector<std::string> pre, add, del;
  Rational cost{1};
};

inline GroundedDomain toy_domain(const std::vector<std::string>& fluents, const std::vector<ToyAction>& actions) {
  GroundedDomain d;
  for (const auto& f : fluents) d.add_fluent(f);
  for (const auto& a : actions) d.add_action({a.name, d.make_set(a.pre), d.make_set(a.add), d.make_set(a.del), a.cost});
  return d;
}

// Every action emits `token`.
inline ObservationModel constant_model(const GroundedDomain& d, const std::string& token = "t") {
  return ObservationModel(d, {token}, {ObservationRule{0, "*", d.empty_set()}}, "init");
}

struct RandomInstance {
  GroundedDomain domain;
  ObservationModel model;
  State s0;
};

// Random grounded domain with at most `max_fluents` fluents and
// `max_actions` actions; tokens are assigned by a random many-to-one map,
// sometimes conditioned on a fluent of the successor state.
inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t max_fluents = 10,
                                      std::size_t max_actions = 8) {
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  RandomInstance inst;
  GroundedDomain& d = inst.domain;
  const std::size_t nf = uniform(2, max_fluents);
  for (std::size_t f = 0; f < nf; ++f) d.add_fluent("f" + std::to_string(f));
  const std::size_t na = uniform(1, max_actions);
  for (std::size_t a = 0; a < na; ++a) {
    GroundedAction act{"a" + std::to_string(a), d.empty_set(), d.empty_set(), d.empty_set(), Rational(1)};
    for (FluentId f = 0; f < nf; ++f) {
      switch (uniform(0, 7)) {
        case 0: act.pre.insert(f); break;
        case 1: act.add.insert(f); break;
        case 2: act.del.insert(f); break;
        case 3:
          act.pre.insert(f);
          act.del.insert(f);
          break;
        default: break;
      }
    }
    d.add_action(std::move(act));
  }
  const std::size_t nt = uniform(1, std::max<std::size_t>(1, na - 1));
  std::vector<std::string> alphabet;
  for (std::size_t t = 0; t < nt; ++t) alphabet.push_back("o" + std::to_string(t));
  std::vector<ObservationRule> rules;
  for (ActionId a = 0; a < na; ++a) {
    if (uniform(0, 3) == 0) {
      FluentSet when = d.empty_set();
      when.insert(static_cast<FluentId>(uniform(0, nf - 1)));
      rules.push_back({static_cast<TokenId>(uniform(0, nt - 1)), d.action(a).name, when});
    }
    rules.push_back({static_cast<TokenId>(uniform(0, nt - 1)), d.action(a).name, d.empty_set()});
  }
  inst.model = ObservationModel(d, alphabet, rules, "init");
  inst.s0 = d.empty_set();
  for (FluentId f = 0; f < nf; ++f)
    if (uniform(0, 1)) inst.s0.insert(f);
  return inst;
}

// Breadth-first search: shortest plan length from s to a state satisfying
// goal, if one exists.
inline std::optional<std::size_t> bfs_optimal_length(const GroundedDomain& d, const State& s, const GoalCondition& g) {
  std::unordered_map<State, std::size_t, FluentSetHash> dist{{s, 0}};
  std::deque<State> queue{s};
  while (!queue.empty()) {
    State cur = queue.front();
    queue.pop_front();
    const std::size_t depth = dist.at(cur);
    if (g.literals.is_subset_of(cur)) return depth;
    for (const auto& a : d.actions()) {
      if (!a.pre.is_subset_of(cur)) continue;
      State next = (cur - a.del) | a.add;
      if (dist.try_emplace(next, depth + 1).second) queue.push_back(std::move(next));
    }
  }
  return std::nullopt;
}

// All states reachable from s.
inline std::vector<State> reachable_states(const GroundedDomain& d, const State& s) {
  std::unordered_map<State, bool, FluentSetHash> seen{{s, true}};
  std::vector<State> out{s};
  for (std::size_t i = 0; i < out.size(); ++i)
    for (const auto& a : d.actions()) {
      if (!a.pre.is_subset_of(out[i])) continue;
      State next = (out[i] - a.del) | a.add;
      if (seen.try_emplace(next, true).second) out.push_back(next);
    }
  return out;
}

}  // namespace covert::testing
