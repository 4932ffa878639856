#pragma once

// Observer-side verification. Everything here is recomputed from the
// transition and observation functions alone: beliefs are replayed with a
// plain std::set and plan sets are enumerated by an uncapped forward DFS,
// so the planner's belief/plan-set machinery is never trusted.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "covert/distances.hpp"
#include "covert/errors.hpp"
#include "covert/model_io.hpp"
#include "covert/observation.hpp"
#include "covert/rational.hpp"
#include "covert/strips.hpp"

namespace covert::oracle {

inline constexpr std::size_t kDefaultNodeBudget = 2'000'000;

using StateSet = std::set<State>;

enum class Verdict { pass, fail, inconclusive };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct VerificationReport {
  std::string property;
  Verdict verdict = Verdict::fail;
  std::string reason;
  bool goal_achieved = false;
  std::vector<std::size_t> satisfied_goals;
  std::vector<std::size_t> absent_goals;
  std::size_t final_belief_size = 0;
  std::optional<std::size_t> plan_set_size;
  std::optional<std::size_t> goal_reaching_plans;
  std::optional<Rational> achieved_distance;
  std::vector<std::string> trace;

  bool pass() const noexcept { return verdict == Verdict::pass; }
};

inline nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json doc;
  doc["property"] = r.property;
  doc["verdict"] = std::string(to_string(r.verdict));
  doc["reason"] = r.reason;
  doc["goal_achieved"] = r.goal_achieved;
  doc["satisfied_goal_indices"] = r.satisfied_goals;
  doc["absent_goal_indices"] = r.absent_goals;
  doc["final_belief_size"] = r.final_belief_size;
  doc["trace"] = r.trace;
  if (r.plan_set_size) doc["plan_set_size"] = *r.plan_set_size;
  if (r.goal_reaching_plans) doc["goal_reaching_plans"] = *r.goal_reaching_plans;
  if (r.achieved_distance) doc["achieved_distance"] = covert::to_string(*r.achieved_distance);
  return doc;
}

// b_0 = {s0}; b_{i+1} = { ŝ' = Γ(ŝ, â) : ŝ ∈ b_i, â applicable, O(â, ŝ') = o_{i+1} }.
inline std::vector<StateSet> replay_beliefs(const GroundedDomain& domain, const ObservationModel& model,
                                            const State& s0, const std::vector<TokenId>& tokens) {
  std::vector<StateSet> out{StateSet{s0}};
  for (TokenId o : tokens) {
    StateSet next;
    for (const State& s : out.back())
      for (ActionId a = 0; a < domain.num_actions(); ++a) {
        const GroundedAction& act = domain.action(a);
        if (!act.pre.is_subset_of(s)) continue;
        State t = (s - act.del) | act.add;
        if (model.observe(a, t) == o) next.insert(std::move(t));
      }
    out.push_back(std::move(next));
  }
  return out;
}

// Tokens emitted by executing `plan`; throws InapplicableAction.
inline std::vector<TokenId> observe_plan(const GroundedDomain& domain, const ObservationModel& model,
                                         const State& s0, const Plan& plan) {
  std::vector<TokenId> tokens;
  State s = s0;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const GroundedAction& act = domain.action(plan.steps[i]);
    if (!act.pre.is_subset_of(s)) throw InapplicableAction(act.name, i);
    s = (s - act.del) | act.add;
    tokens.push_back(model.observe(plan.steps[i], s));
  }
  return tokens;
}

struct EnumeratedPlan {
  std::vector<ActionId> actions;
  std::vector<State> states;  // states[0] = s0
};

// Every action sequence from s0 that emits exactly `tokens`.
inline std::vector<EnumeratedPlan> enumerate_plan_set(const GroundedDomain& domain, const ObservationModel& model,
                                                      const State& s0, const std::vector<TokenId>& tokens,
                                                      std::size_t node_budget = kDefaultNodeBudget) {
  std::vector<EnumeratedPlan> out;
  EnumeratedPlan cur;
  cur.states.push_back(s0);
  std::size_t nodes = 0;
  auto dfs = [&](auto&& self) -> void {
    if (++nodes > node_budget)
      throw EnumerationBudgetExceeded("plan-set enumeration exceeded " + std::to_string(node_budget) + " nodes");
    std::size_t depth = cur.actions.size();
    if (depth == tokens.size()) {
      out.push_back(cur);
      return;
    }
    const State s = cur.states.back();
    for (ActionId a = 0; a < domain.num_actions(); ++a) {
      const GroundedAction& act = domain.action(a);
      if (!act.pre.is_subset_of(s)) continue;
      State t = (s - act.del) | act.add;
      if (model.observe(a, t) != tokens[depth]) continue;
      cur.actions.push_back(a);
      cur.states.push_back(std::move(t));
      self(self);
      cur.actions.pop_back();
      cur.states.pop_back();
    }
  };
  dfs(dfs);
  return out;
}

namespace detail {

inline bool any_satisfies(const StateSet& b, const GoalCondition& g) {
  for (const State& s : b)
    if (g.literals.is_subset_of(s)) return true;
  return false;
}

struct Replay {
  bool executable = false;
  std::string failure;
  std::vector<TokenId> tokens;
  State final_state;
  StateSet final_belief;
};

inline Replay replay(const GroundedDomain& domain, const ObservationModel& model, const State& s0,
                     const Plan& plan) {
  Replay r;
  try {
    r.tokens = observe_plan(domain, model, s0, plan);
  } catch (const InapplicableAction& e) {
    r.failure = e.what();
    return r;
  }
  r.executable = true;
  r.final_state = s0;
  for (ActionId a : plan.steps) r.final_state = (r.final_state - domain.action(a).del) | domain.action(a).add;
  r.final_belief = replay_beliefs(domain, model, s0, r.tokens).back();
  return r;
}

inline VerificationReport goal_report(const char* property, const GroundedDomain& domain,
                                      const ObservationModel& model, const State& s0, const CandidateGoalSet& goals,
                                      const Plan& plan, Replay& replayed) {
  VerificationReport rep;
  rep.property = property;
  replayed = replay(domain, model, s0, plan);
  if (!replayed.executable) {
    rep.reason = "plan is not executable: " + replayed.failure;
    return rep;
  }
  rep.trace = token_names(model, replayed.tokens);
  rep.goal_achieved = goals.true_goal.literals.is_subset_of(replayed.final_state);
  rep.final_belief_size = replayed.final_belief.size();
  for (std::size_t i = 0; i < goals.size(); ++i)
    (any_satisfies(replayed.final_belief, goals[i]) ? rep.satisfied_goals : rep.absent_goals).push_back(i);
  return rep;
}

}  // namespace detail

inline VerificationReport verify_classical(const GroundedDomain& domain, const ObservationModel& model,
                                           const State& s0, const GoalCondition& goal, const Plan& plan) {
  detail::Replay replayed;
  CandidateGoalSet single{goal, {}};
  VerificationReport rep = detail::goal_report("classical", domain, model, s0, single, plan, replayed);
  if (!replayed.executable) return rep;
  if (rep.goal_achieved) {
    rep.verdict = Verdict::pass;
    rep.reason = "goal achieved";
  } else {
    rep.reason = "goal not achieved in the final state";
  }
  return rep;
}

inline VerificationReport verify_k_ambiguous(const GroundedDomain& domain, const ObservationModel& model,
                                             const State& s0, const CandidateGoalSet& goals, const Plan& plan,
                                             int k) {
  detail::Replay replayed;
  VerificationReport rep = detail::goal_report("k-ambiguous", domain, model, s0, goals, plan, replayed);
  if (!replayed.executable) return rep;
  const std::size_t count = rep.satisfied_goals.size();
  if (!rep.goal_achieved)
    rep.reason = "true goal not achieved in the final state";
  else if (count < static_cast<std::size_t>(std::max(k, 0)))
    rep.reason = std::to_string(count) + " candidate goals in the final belief, need at least " + std::to_string(k);
  else {
    rep.verdict = Verdict::pass;
    rep.reason = std::to_string(count) + " candidate goals in the final belief";
  }
  return rep;
}

inline VerificationReport verify_j_legible(const GroundedDomain& domain, const ObservationModel& model,
                                           const State& s0, const CandidateGoalSet& goals, const Plan& plan, int j) {
  detail::Replay replayed;
  VerificationReport rep = detail::goal_report("j-legible", domain, model, s0, goals, plan, replayed);
  if (!replayed.executable) return rep;
  const std::size_t count = rep.satisfied_goals.size();
  if (!rep.goal_achieved)
    rep.reason = "true goal not achieved in the final state";
  else if (j < 0 || count > static_cast<std::size_t>(j))
    rep.reason = std::to_string(count) + " candidate goals in the final belief, allowed at most " + std::to_string(j);
  else {
    rep.verdict = Verdict::pass;
    rep.reason = std::to_string(rep.absent_goals.size()) + " candidate goals absent from the final belief";
  }
  return rep;
}

namespace detail {

inline VerificationReport verify_plan_set(const char* property, bool diverse, const GroundedDomain& domain,
                                          const ObservationModel& model, const State& s0, const GoalCondition& goal,
                                          const Plan& plan, int count, DistanceKind kind, const Rational& threshold,
                                          std::size_t node_budget) {
  CandidateGoalSet single{goal, {}};
  Replay replayed;
  VerificationReport rep = goal_report(property, domain, model, s0, single, plan, replayed);
  if (!replayed.executable) return rep;
  auto plans = enumerate_plan_set(domain, model, s0, replayed.tokens, node_budget);
  std::vector<DistanceProfile> reaching;
  for (const auto& p : plans)
    if (goal.literals.is_subset_of(p.states.back()))
      reaching.push_back(make_profile(domain, Trajectory{p.actions, p.states}));
  rep.plan_set_size = plans.size();
  rep.goal_reaching_plans = reaching.size();
  if (reaching.size() >= 2) rep.achieved_distance = diverse ? d_min(kind, reaching) : d_max(kind, reaching);

  const std::string bound = covert::to_string(threshold);
  if (!rep.goal_achieved)
    rep.reason = "goal not achieved in the final state";
  else if (reaching.size() < static_cast<std::size_t>(std::max(count, 0)))
    rep.reason = std::to_string(reaching.size()) + " goal-reaching plans in the plan set, need at least " +
                 std::to_string(count);
  else if (!rep.achieved_distance)
    rep.reason = "fewer than two goal-reaching plans";
  else if (diverse && *rep.achieved_distance < threshold)
    rep.reason = "d-min " + covert::to_string(*rep.achieved_distance) + " below " + bound;
  else if (!diverse && *rep.achieved_distance > threshold)
    rep.reason = "d-max " + covert::to_string(*rep.achieved_distance) + " above " + bound;
  else {
    rep.verdict = Verdict::pass;
    rep.reason = std::string(diverse ? "d-min " : "d-max ") + covert::to_string(*rep.achieved_distance) + " over " +
                 std::to_string(reaching.size()) + " goal-reaching plans";
  }
  return rep;
}

}  // namespace detail

inline VerificationReport verify_l_diverse(const GroundedDomain& domain, const ObservationModel& model,
                                           const State& s0, const GoalCondition& goal, const Plan& plan, int l,
                                           DistanceKind kind, const Rational& d_min_required,
                                           std::size_t node_budget = kDefaultNodeBudget) {
  return detail::verify_plan_set("l-diverse", true, domain, model, s0, goal, plan, l, kind, d_min_required,
                                 node_budget);
}

inline VerificationReport verify_m_similar(const GroundedDomain& domain, const ObservationModel& model,
                                           const State& s0, const GoalCondition& goal, const Plan& plan, int m,
                                           DistanceKind kind, const Rational& d_max_allowed,
                                           std::size_t node_budget = kDefaultNodeBudget) {
  return detail::verify_plan_set("m-similar", false, domain, model, s0, goal, plan, m, kind, d_max_allowed,
                                 node_budget);
}

}  // namespace covert::oracle
