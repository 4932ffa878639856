#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "covert/belief.hpp"
#include "covert/distances.hpp"
#include "covert/errors.hpp"
#include "covert/model_io.hpp"
#include "covert/observation.hpp"
#include "covert/plangraph.hpp"
#include "covert/search.hpp"
#include "covert/strips.hpp"

namespace covert {

enum class SubsetStrategy { lex, farthest_first };

inline std::string_view to_string(SubsetStrategy s) { return s == SubsetStrategy::lex ? "lex" : "farthest-first"; }

inline SubsetStrategy parse_subset_strategy(std::string_view name) {
  if (name == "lex") return SubsetStrategy::lex;
  if (name == "farthest-first") return SubsetStrategy::farthest_first;
  throw BadParameter("unknown subset strategy '" + std::string(name) + "' (expected lex or farthest-first)");
}

struct VariantConfig {
  Variant variant = Variant::k_ambiguous;
  int k = VariantParameters::kDefaultK;
  int j = VariantParameters::kDefaultJ;
  int l = VariantParameters::kDefaultL;
  int m = VariantParameters::kDefaultM;
  // Decoy indices (into the candidate set, 1-based since 0 is the true goal)
  // to commit to; when unset every subset is tried in strategy order.
  std::optional<std::vector<std::size_t>> subset;
  SubsetStrategy subset_strategy = SubsetStrategy::lex;
  DistanceKind distance = DistanceKind::action;
  std::optional<Rational> d;  // variant default when unset
  std::optional<Rational> cost_bound;
  std::size_t delta_max = 1;
  bool noops = false;
  std::size_t belief_cap = kDefaultBeliefCap;
  std::size_t plan_set_cap = kDefaultPlanSetCap;
  // Chain budget for the exact plan-set re-check of a truncated plan set.
  std::size_t exact_plan_set_cap = 1u << 16;
  // Finite stand-in for unreachable belief goals in the legibility heuristic.
  std::optional<double> clamp;
  std::optional<std::uint64_t> noise_seed;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  std::function<void(const GeneratedNode&)> on_generate;

  Rational threshold() const {
    if (d) return *d;
    return variant == Variant::m_similar ? Rational(1, 2) : Rational(1, 4);
  }

  SearchConfig search() const {
    SearchConfig c;
    c.cost_bound = cost_bound;
    c.noise_seed = noise_seed;
    c.belief_cap = belief_cap;
    c.plan_set_cap = plan_set_cap;
    c.deadline = deadline;
    c.on_generate = on_generate;
    return c;
  }
};

// Variant settings from problem-file/command-line parameters.
inline VariantConfig make_variant_config(const VariantParameters& p, Variant fallback = Variant::k_ambiguous) {
  VariantConfig c;
  c.variant = p.variant.value_or(fallback);
  c.k = p.k_or_default();
  c.j = p.j_or_default();
  c.l = p.l_or_default();
  c.m = p.m_or_default();
  c.d = p.d_or_default(c.variant);
  c.distance = p.distance_or_default();
  c.cost_bound = p.cost_bound;
  return c;
}

namespace detail {

inline double level_value(Level l) { return static_cast<double>(l); }

inline bool belief_satisfies(const Belief& b, const GoalCondition& g) {
  return std::any_of(b.begin(), b.end(), [&](const State& s) { return satisfies(s, g); });
}

inline std::vector<std::size_t> satisfied_indices(const Belief& b, const CandidateGoalSet& goals) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < goals.size(); ++i)
    if (belief_satisfies(b, goals[i])) out.push_back(i);
  return out;
}

// All r-subsets of {1..n-1} in lexicographic order.
inline std::vector<std::vector<std::size_t>> decoy_subsets(std::size_t n, std::size_t r) {
  std::vector<std::vector<std::size_t>> out;
  if (n == 0 || r > n - 1) return out;
  std::vector<std::size_t> cur(r);
  std::iota(cur.begin(), cur.end(), std::size_t{1});
  while (true) {
    out.push_back(cur);
    std::size_t i = r;
    while (i > 0 && cur[i - 1] == n - 1 - (r - i)) --i;
    if (i == 0) break;
    ++cur[i - 1];
    for (std::size_t t = i; t < r; ++t) cur[t] = cur[t - 1] + 1;
  }
  return out;
}

// Farthest-first: subsets whose decoys are jointly farthest from s0 (sum of
// initial set-levels, unreachable counted as the clamp) come first.
inline void order_subsets(std::vector<std::vector<std::size_t>>& subsets, SubsetStrategy strategy,
                          SetLevelCache& cache, const State& s0, const CandidateGoalSet& goals, double clamp) {
  if (strategy == SubsetStrategy::lex) return;
  std::vector<double> spread(goals.size());
  for (std::size_t i = 0; i < goals.size(); ++i) {
    Level l = cache.level(s0, goals[i]);
    spread[i] = l == kInfiniteLevel ? clamp : level_value(l);
  }
  auto score = [&](const std::vector<std::size_t>& s) {
    double total = 0;
    for (std::size_t i : s) total += spread[i];
    return total;
  };
  std::stable_sort(subsets.begin(), subsets.end(),
                   [&](const auto& a, const auto& b) { return score(a) > score(b); });
}

inline std::vector<std::vector<std::size_t>> subsets_for(const VariantConfig& config, std::size_t n, std::size_t r,
                                                          SetLevelCache& cache, const State& s0,
                                                          const CandidateGoalSet& goals, double clamp) {
  if (config.subset) {
    const auto& s = *config.subset;
    if (s.size() != r) throw BadParameter("goal subset must name exactly " + std::to_string(r) + " decoys");
    for (std::size_t i : s)
      if (i == 0 || i >= n) throw BadParameter("goal subset index " + std::to_string(i) + " out of range");
    return {s};
  }
  auto subsets = decoy_subsets(n, r);
  order_subsets(subsets, config.subset_strategy, cache, s0, goals, clamp);
  return subsets;
}

inline std::string subset_label(const std::vector<std::size_t>& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "}";
}

}  // namespace detail

// 2 x the number of layers after which any planning graph has leveled off.
inline double default_clamp(const GroundedDomain& domain) {
  double f = static_cast<double>(domain.num_fluents());
  return 2.0 * (f + f * (f - 1) / 2 + 1);
}

// Default cost bound for plan-set variants: 4 x the set-level of the goal.
inline Rational default_cost_bound(SetLevelCache& cache, const State& s0, const GoalCondition& goal) {
  Level l = cache.level(s0, goal);
  if (l == kInfiniteLevel) return Rational(0);
  return Rational(4 * std::max<std::int64_t>(1, l));
}

inline SearchResult plan_classical(const GroundedDomain& domain, const ObservationModel& model, const State& s0,
                                   const GoalCondition& goal, const VariantConfig& config = {}) {
  SetLevelCache cache(domain);
  auto goal_test = [&](const NodeView& v) { return satisfies(v.state(), goal); };
  auto heuristic = [&](const NodeView& v) -> std::optional<HeuristicKey> {
    Level l = cache.level(v.state(), goal);
    if (l == kInfiniteLevel) return std::nullopt;
    return HeuristicKey::scalar(detail::level_value(l));
  };
  try {
    SearchResult r = delta_loop(domain, model, s0, goal_test, heuristic, config.search(), config.delta_max);
    r.satisfied_goals = {0};
    return r;
  } catch (const SearchTimeout&) {
    throw;
  } catch (const NoPlan& e) {
    throw NoClassicalPlan(std::string("no plan achieves the goal: ") + e.what());
  }
}

inline SearchResult plan_k_ambiguous(const GroundedDomain& domain, const ObservationModel& model, const State& s0,
                                     const CandidateGoalSet& goals, const VariantConfig& config = {}) {
  const std::size_t n = goals.size();
  if (config.k < 1 || static_cast<std::size_t>(config.k) > n)
    throw BadParameter("k = " + std::to_string(config.k) + " must lie in [1, " + std::to_string(n) + "]");
  SetLevelCache cache(domain);
  const double clamp = config.clamp.value_or(default_clamp(domain));
  const GoalCondition& true_goal = goals.true_goal;
  std::string failures;
  for (const auto& subset : detail::subsets_for(config, n, config.k - 1, cache, s0, goals, clamp)) {
    auto goal_test = [&](const NodeView& v) {
      if (!satisfies(v.state(), true_goal)) return false;
      return std::all_of(subset.begin(), subset.end(),
                         [&](std::size_t i) { return detail::belief_satisfies(v.belief(), goals[i]); });
    };
    auto heuristic = [&](const NodeView& v) -> std::optional<HeuristicKey> {
      Level own = cache.level(v.state(), true_goal);
      if (own == kInfiniteLevel) return std::nullopt;
      double worst = 0;
      for (std::size_t i : subset) {
        Level l = cache.level(v.belief(), goals[i]);
        if (l == kInfiniteLevel) return std::nullopt;
        worst = std::max(worst, detail::level_value(l));
      }
      return HeuristicKey::scalar(detail::level_value(own) + worst);
    };
    try {
      SearchResult r = delta_loop(domain, model, s0, goal_test, heuristic, config.search(), config.delta_max);
      r.satisfied_goals = detail::satisfied_indices(r.final_belief, goals);
      return r;
    } catch (const CostBoundExceeded& e) {
      failures += " " + detail::subset_label(subset) + ": " + e.what() + ";";
    } catch (const Exhausted& e) {
      failures += " " + detail::subset_label(subset) + ": " + e.what() + ";";
    }
  }
  throw NoKAmbiguousPlan("no " + std::to_string(config.k) + "-ambiguous plan;" + failures);
}

inline SearchResult plan_j_legible(const GroundedDomain& domain, const ObservationModel& model, const State& s0,
                                   const CandidateGoalSet& goals, const VariantConfig& config = {}) {
  const std::size_t n = goals.size();
  if (config.j < 1 || static_cast<std::size_t>(config.j) > n)
    throw BadParameter("j = " + std::to_string(config.j) + " must lie in [1, " + std::to_string(n) + "]");
  SetLevelCache cache(domain);
  const double clamp = config.clamp.value_or(default_clamp(domain));
  const GoalCondition& true_goal = goals.true_goal;
  auto clamped = [&](Level l) { return l == kInfiniteLevel ? clamp : detail::level_value(l); };
  std::string failures;
  for (const auto& chosen : detail::subsets_for(config, n, config.j - 1, cache, s0, goals, clamp)) {
    std::vector<std::size_t> absent;
    for (std::size_t i = 1; i < n; ++i)
      if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) absent.push_back(i);
    auto goal_test = [&](const NodeView& v) {
      if (!satisfies(v.state(), true_goal)) return false;
      return std::none_of(absent.begin(), absent.end(),
                          [&](std::size_t i) { return detail::belief_satisfies(v.belief(), goals[i]); });
    };
    auto heuristic = [&](const NodeView& v) -> std::optional<HeuristicKey> {
      Level own = cache.level(v.state(), true_goal);
      if (own == kInfiniteLevel) return std::nullopt;
      double near = 0;
      for (std::size_t i : chosen) near = std::max(near, clamped(cache.level(v.belief(), goals[i])));
      double far = 0;
      if (!absent.empty()) {
        far = clamp;
        for (std::size_t i : absent) far = std::min(far, clamped(cache.level(v.belief(), goals[i])));
      }
      return HeuristicKey::scalar(detail::level_value(own) + near - far);
    };
    try {
      SearchResult r = delta_loop(domain, model, s0, goal_test, heuristic, config.search(), config.delta_max);
      r.satisfied_goals = detail::satisfied_indices(r.final_belief, goals);
      return r;
    } catch (const CostBoundExceeded& e) {
      failures += " " + detail::subset_label(chosen) + ": " + e.what() + ";";
    } catch (const Exhausted& e) {
      failures += " " + detail::subset_label(chosen) + ": " + e.what() + ";";
    }
  }
  throw NoJLegiblePlan("no " + std::to_string(config.j) + "-legible plan;" + failures);
}

namespace detail {

// Shared driver for the plan-set variants. `diverse` selects between the
// minimum-distance (diverse) and maximum-distance (similar) objective.
template <typename Failure>
SearchResult plan_with_plan_set(const GroundedDomain& domain, const ObservationModel& model, const State& s0,
                                const GoalCondition& goal, const VariantConfig& config, std::size_t count,
                                bool diverse) {
  SetLevelCache cache(domain);
  const Rational threshold = config.threshold();
  const DistanceKind kind = config.distance;
  SearchConfig sc = config.search();
  sc.track_plan_set = true;
  sc.cost_bound = config.cost_bound ? *config.cost_bound : default_cost_bound(cache, s0, goal);
  const std::string what = diverse ? "-diverse" : "-similar";
  if (*sc.cost_bound <= 0) throw Failure("goal unreachable from the initial state");

  auto qualifies = [&](const BeliefPlanSet& bps) {
    std::vector<DistanceProfile> reaching;
    for (std::size_t i = 0; i < bps.size(); ++i)
      if (satisfies(bps.last_state(i), goal)) reaching.push_back(make_profile(domain, bps.trajectory(i)));
    if (reaching.size() < count) return false;
    if (diverse) return d_min(kind, reaching) >= threshold;
    return d_max(kind, reaching) <= threshold;
  };

  auto goal_test = [&](const NodeView& v) {
    if (!satisfies(v.state(), goal)) return false;
    const BeliefPlanSet& bps = *v.plan_set();
    if (!qualifies(bps)) return false;
    if (!bps.truncated()) return true;
    BeliefPlanSet exact = belief_plan_set(domain, model, s0, v.plan(), config.exact_plan_set_cap, config.belief_cap);
    return !exact.truncated() && qualifies(exact);
  };

  auto heuristic = [&](const NodeView& v) -> std::optional<HeuristicKey> {
    Level own = cache.level(v.state(), goal);
    if (own == kInfiniteLevel) return std::nullopt;
    const BeliefPlanSet& bps = *v.plan_set();
    std::vector<DistanceProfile> counted;
    for (std::size_t i = 0; i < bps.size(); ++i)
      if (cache.level(bps.last_state(i), goal) == own) counted.push_back(make_profile(domain, bps.trajectory(i)));
    double spread;
    if (counted.size() >= 2)
      spread = to_double(diverse ? d_min(kind, counted) : d_max(kind, counted));
    else
      spread = diverse ? 0.0 : 1.0;
    double size = -static_cast<double>(counted.size());
    return HeuristicKey{{diverse ? -spread : spread, size, level_value(own)}};
  };

  try {
    SearchResult r = delta_loop(domain, model, s0, goal_test, heuristic, sc, config.delta_max);
    r.satisfied_goals = {0};
    return r;
  } catch (const CostBoundExceeded& e) {
    throw Failure("no " + std::to_string(count) + what + " plan within cost bound " + to_string(*sc.cost_bound) +
                  " (cost-bound-exceeded): " + e.what());
  } catch (const Exhausted& e) {
    throw Failure("no " + std::to_string(count) + what + " plan (exhausted): " + e.what());
  }
}

}  // namespace detail

inline SearchResult plan_l_diverse(const GroundedDomain& domain, const ObservationModel& model, const State& s0,
                                   const GoalCondition& goal, const VariantConfig& config = {}) {
  if (config.l < 2) throw BadParameter("l must be at least 2");
  return detail::plan_with_plan_set<NoLDiversePlan>(domain, model, s0, goal, config, config.l, true);
}

inline SearchResult plan_m_similar(const GroundedDomain& domain, const ObservationModel& model, const State& s0,
                                   const GoalCondition& goal, const VariantConfig& config = {}) {
  if (config.m < 2) throw BadParameter("m must be at least 2");
  return detail::plan_with_plan_set<NoMSimilarPlan>(domain, model, s0, goal, config, config.m, false);
}

// A plan together with the names needed to report it. With noops enabled the
// search runs on the compiled domain and names refer to it.
struct Solution {
  SearchResult result;
  std::vector<std::string> steps;
  std::vector<std::string> trace;
  Variant variant;
  Rational cost{0};

  PlanRecord record() const {
    PlanRecord r;
    r.steps = steps;
    r.trace = trace;
    r.variant = std::string(to_string(variant));
    r.achieved_goal_indices = result.satisfied_goals;
    r.metrics["cost"] = to_double(cost);
    r.metrics["expanded"] = static_cast<double>(result.stats.expanded);
    r.metrics["generated"] = static_cast<double>(result.stats.generated);
    r.metrics["duplicates"] = static_cast<double>(result.stats.duplicates);
    r.metrics["reopened"] = static_cast<double>(result.stats.reopened);
    r.metrics["final_belief_size"] = static_cast<double>(result.final_belief.size());
    r.metrics["seconds"] = result.stats.seconds;
    r.metrics["delta"] = static_cast<double>(result.stats.delta);
    if (result.plan_set) r.metrics["plan_set_size"] = static_cast<double>(result.plan_set->size());
    return r;
  }
};

inline Solution solve(const GroundedDomain& domain, const ObservationModel& model, const State& s0,
                      const CandidateGoalSet& goals, const VariantConfig& config) {
  std::optional<CompiledModel> compiled;
  if (config.noops) compiled.emplace(compile_noops(domain, model));
  const GroundedDomain& d = compiled ? compiled->domain : domain;
  const ObservationModel& o = compiled ? compiled->model : model;

  Solution sol;
  sol.variant = config.variant;
  switch (config.variant) {
    case Variant::classical: sol.result = plan_classical(d, o, s0, goals.true_goal, config); break;
    case Variant::k_ambiguous: sol.result = plan_k_ambiguous(d, o, s0, goals, config); break;
    case Variant::j_legible: sol.result = plan_j_legible(d, o, s0, goals, config); break;
    case Variant::l_diverse: sol.result = plan_l_diverse(d, o, s0, goals.true_goal, config); break;
    case Variant::m_similar: sol.result = plan_m_similar(d, o, s0, goals.true_goal, config); break;
  }
  sol.cost = plan_cost(d, sol.result.plan);
  sol.steps = d.names_of(sol.result.plan);
  sol.trace = token_names(o, sol.result.trace);
  return sol;
}

}  // namespace covert
