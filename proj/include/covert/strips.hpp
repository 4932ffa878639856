#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "covert/errors.hpp"
#include "covert/fluent_set.hpp"
#include "covert/rational.hpp"

namespace covert {

using ActionId = std::uint32_t;
using State = FluentSet;

struct GroundedAction {
  std::string name;
  FluentSet pre;
  FluentSet add;
  FluentSet del;
  Rational cost{1};
};

// Conjunction of positive literals.
struct GoalCondition {
  FluentSet literals;

  friend bool operator==(const GoalCondition&, const GoalCondition&) = default;
};

// The true goal plus the ordered decoy/confounding goals. Index 0 always
// refers to the true goal, index i > 0 to others[i - 1].
struct CandidateGoalSet {
  GoalCondition true_goal;
  std::vector<GoalCondition> others;

  std::size_t size() const noexcept { return 1 + others.size(); }
  const GoalCondition& operator[](std::size_t i) const { return i == 0 ? true_goal : others.at(i - 1); }
};

struct Plan {
  std::vector<ActionId> steps;

  std::size_t size() const noexcept { return steps.size(); }
  bool empty() const noexcept { return steps.empty(); }
  friend bool operator==(const Plan&, const Plan&) = default;
};

// Grounded planning domain: fluent universe, actions and initial state.
// Fluents must all be declared before the first action is added so that
// every set shares one universe size.
class GroundedDomain {
 public:
  std::string name;

  FluentId add_fluent(const std::string& fluent) {
    if (!actions_.empty() || !initial_.empty())
      throw std::logic_error("fluents must be declared before actions");
    if (fluent_index_.contains(fluent)) throw InputError("duplicate fluent '" + fluent + "'");
    auto id = static_cast<FluentId>(fluents_.size());
    fluents_.push_back(fluent);
    fluent_index_.emplace(fluent, id);
    initial_ = State(fluents_.size());
    return id;
  }

  // Validates and stores an action. Atoms both added and deleted are kept
  // as adds, following the usual STRIPS add-after-delete reading.
  ActionId add_action(GroundedAction action) {
    if (action_index_.contains(action.name)) throw DuplicateAction("duplicate action '" + action.name + "'");
    for (const FluentSet* set : {&action.pre, &action.add, &action.del})
      if (set->universe() != fluents_.size())
        throw InputError("action '" + action.name + "' uses a fluent set of the wrong universe");
    if (action.cost < 0) throw BadParameter("action '" + action.name + "' has negative cost");
    action.del -= action.add;
    auto id = static_cast<ActionId>(actions_.size());
    action_index_.emplace(action.name, id);
    actions_.push_back(std::move(action));
    return id;
  }

  void set_initial(State state) {
    if (state.universe() != fluents_.size()) throw InputError("initial state has the wrong universe");
    initial_ = std::move(state);
  }

  std::size_t num_fluents() const noexcept { return fluents_.size(); }
  std::size_t num_actions() const noexcept { return actions_.size(); }
  const std::vector<std::string>& fluents() const noexcept { return fluents_; }
  const std::vector<GroundedAction>& actions() const noexcept { return actions_; }
  const GroundedAction& action(ActionId id) const { return actions_.at(id); }
  const std::string& fluent_name(FluentId id) const { return fluents_.at(id); }
  const State& initial() const noexcept { return initial_; }

  std::optional<FluentId> find_fluent(std::string_view fluent) const {
    auto it = fluent_index_.find(std::string(fluent));
    if (it == fluent_index_.end()) return std::nullopt;
    return it->second;
  }
  FluentId fluent_id(std::string_view fluent) const {
    if (auto id = find_fluent(fluent)) return *id;
    throw UnknownFluent("unknown fluent '" + std::string(fluent) + "'");
  }
  std::optional<ActionId> find_action(std::string_view action) const {
    auto it = action_index_.find(std::string(action));
    if (it == action_index_.end()) return std::nullopt;
    return it->second;
  }
  ActionId action_id(std::string_view action) const {
    if (auto id = find_action(action)) return *id;
    throw UnknownAction("unknown action '" + std::string(action) + "'");
  }

  FluentSet empty_set() const { return FluentSet(fluents_.size()); }
  FluentSet make_set(const std::vector<std::string>& names) const {
    FluentSet out = empty_set();
    for (const auto& n : names) out.insert(fluent_id(n));
    return out;
  }
  std::vector<std::string> names_of(const FluentSet& set) const {
    std::vector<std::string> out;
    for (FluentId id : set.ids()) out.push_back(fluents_[id]);
    return out;
  }
  Plan make_plan(const std::vector<std::string>& names) const {
    Plan plan;
    for (const auto& n : names) plan.steps.push_back(action_id(n));
    return plan;
  }
  std::vector<std::string> names_of(const Plan& plan) const {
    std::vector<std::string> out;
    for (ActionId id : plan.steps) out.push_back(actions_.at(id).name);
    return out;
  }

 private:
  std::vector<std::string> fluents_;
  std::unordered_map<std::string, FluentId> fluent_index_;
  std::vector<GroundedAction> actions_;
  std::unordered_map<std::string, ActionId> action_index_;
  State initial_;
};

inline bool applicable(const State& s, const GroundedAction& a) noexcept {
  return a.pre.is_subset_of(s);
}

// Successor without the precondition check; callers guarantee applicability.
inline State successor(const State& s, const GroundedAction& a) {
  State next = s;
  next -= a.del;
  next |= a.add;
  return next;
}

inline State apply(const State& s, const GroundedAction& a) {
  if (!applicable(s, a)) throw InapplicableAction(a.name, 0);
  return successor(s, a);
}

inline State execute(const GroundedDomain& domain, const State& s0, const Plan& plan) {
  State s = s0;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& a = domain.action(plan.steps[i]);
    if (!applicable(s, a)) throw InapplicableAction(a.name, i);
    s = successor(s, a);
  }
  return s;
}

// States visited by a plan, s0 first.
inline std::vector<State> state_sequence(const GroundedDomain& domain, const State& s0, const Plan& plan) {
  std::vector<State> states{s0};
  states.reserve(plan.size() + 1);
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& a = domain.action(plan.steps[i]);
    if (!applicable(states.back(), a)) throw InapplicableAction(a.name, i);
    states.push_back(successor(states.back(), a));
  }
  return states;
}

inline bool satisfies(const State& s, const GoalCondition& g) noexcept {
  return g.literals.is_subset_of(s);
}

inline Rational plan_cost(const GroundedDomain& domain, const Plan& plan) {
  Rational total{0};
  for (ActionId id : plan.steps) total += domain.action(id).cost;
  return total;
}

}  // namespace covert
