#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <vector>

#include "covert/errors.hpp"
#include "covert/observation.hpp"
#include "covert/strips.hpp"

namespace covert {

inline constexpr std::size_t kDefaultBeliefCap = 10000;
inline constexpr std::size_t kDefaultPlanSetCap = 256;

// Set of states the observer considers possible, stored sorted and
// deduplicated so that equal beliefs compare and hash equal.
class Belief {
 public:
  Belief() = default;
  explicit Belief(std::vector<State> states) : states_(std::move(states)) {
    std::sort(states_.begin(), states_.end());
    states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
    hash_ = 0xcbf29ce484222325ull;
    for (const auto& s : states_) hash_ = (hash_ ^ s.hash()) * 0x100000001b3ull;
  }

  std::size_t size() const noexcept { return states_.size(); }
  bool empty() const noexcept { return states_.empty(); }
  const std::vector<State>& states() const noexcept { return states_; }
  auto begin() const noexcept { return states_.begin(); }
  auto end() const noexcept { return states_.end(); }
  bool contains(const State& s) const { return std::binary_search(states_.begin(), states_.end(), s); }
  std::size_t hash() const noexcept { return hash_; }

  friend bool operator==(const Belief& a, const Belief& b) {
    return a.hash_ == b.hash_ && a.states_ == b.states_;
  }

 private:
  std::vector<State> states_;
  std::size_t hash_ = 0;
};

struct BeliefHash {
  std::size_t operator()(const Belief& b) const noexcept { return b.hash(); }
};

// The observer is assumed to know the start state.
inline Belief initial_belief(const State& s0) { return Belief({s0}); }

// All states reachable from some state of `b` by one action that emits `o`.
inline Belief belief_update(const GroundedDomain& domain, const ObservationModel& model, const Belief& b, TokenId o,
                            std::size_t max_states = kDefaultBeliefCap) {
  std::vector<State> next;
  for (const State& s : b) {
    for (ActionId a = 0; a < domain.num_actions(); ++a) {
      const auto& action = domain.action(a);
      if (!applicable(s, action)) continue;
      State succ = successor(s, action);
      if (model.observe(a, succ) == o) next.push_back(std::move(succ));
    }
  }
  Belief result(std::move(next));
  if (result.empty())
    throw EmptyBelief("observation '" + model.token_name(o) + "' is inconsistent with the current belief");
  if (result.size() > max_states)
    throw BeliefOverflow("belief grew to " + std::to_string(result.size()) + " states (cap " +
                         std::to_string(max_states) + ")");
  return result;
}

struct BeliefSequence {
  std::vector<Belief> beliefs;  // b_0 .. b_n
  std::vector<TokenId> tokens;  // o_1 .. o_n
};

inline BeliefSequence belief_sequence(const GroundedDomain& domain, const ObservationModel& model, const State& s0,
                                      const Plan& plan, std::size_t max_states = kDefaultBeliefCap) {
  BeliefSequence seq;
  seq.tokens = trace(model, domain, s0, plan);
  seq.beliefs.push_back(initial_belief(s0));
  for (TokenId o : seq.tokens) seq.beliefs.push_back(belief_update(domain, model, seq.beliefs.back(), o, max_states));
  return seq;
}

// ---------------------------------------------------------------------------
// Belief plan sets
// ---------------------------------------------------------------------------

// One step of a hypothesized state/action chain. Chains share prefixes.
struct ChainLink {
  ActionId action;
  State state;
  std::shared_ptr<const ChainLink> prev;
  std::size_t length;
};
using ChainPtr = std::shared_ptr<const ChainLink>;

// Materialized chain: states[0] is the start state, states[i + 1] the state
// after actions[i].
struct Trajectory {
  std::vector<ActionId> actions;
  std::vector<State> states;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

inline ChainPtr extend(const ChainPtr& chain, ActionId action, State state) {
  std::size_t length = chain ? chain->length + 1 : 1;
  return std::make_shared<const ChainLink>(ChainLink{action, std::move(state), chain, length});
}

inline Trajectory materialize(const State& root, const ChainPtr& chain) {
  Trajectory t;
  std::size_t n = chain ? chain->length : 0;
  t.actions.resize(n);
  t.states.resize(n + 1);
  t.states[0] = root;
  for (const ChainLink* link = chain.get(); link; link = link->prev.get()) {
    t.actions[link->length - 1] = link->action;
    t.states[link->length] = link->state;
  }
  return t;
}

// Causally consistent chains threading a belief sequence. The chain of the
// plan that induced the set is always element 0.
class BeliefPlanSet {
 public:
  BeliefPlanSet() = default;
  BeliefPlanSet(State root, std::vector<ChainPtr> chains, bool truncated)
      : root_(std::move(root)), chains_(std::move(chains)), truncated_(truncated) {}

  // The set induced by the empty plan.
  static BeliefPlanSet singleton(const State& s0) { return BeliefPlanSet(s0, {nullptr}, false); }

  std::size_t size() const noexcept { return chains_.size(); }
  bool truncated() const noexcept { return truncated_; }
  const State& root() const noexcept { return root_; }
  const std::vector<ChainPtr>& chains() const noexcept { return chains_; }
  const State& last_state(std::size_t i) const { return chains_.at(i) ? chains_[i]->state : root_; }
  Trajectory trajectory(std::size_t i) const { return materialize(root_, chains_.at(i)); }
  std::vector<Trajectory> trajectories() const {
    std::vector<Trajectory> out;
    out.reserve(chains_.size());
    for (std::size_t i = 0; i < chains_.size(); ++i) out.push_back(trajectory(i));
    return out;
  }

 private:
  State root_;
  std::vector<ChainPtr> chains_;
  bool truncated_ = false;
};

// Child set after the agent takes `taken` (reaching `taken_state`, emitting
// `o`): every chain is extended by every action consistent with `o`.
inline BeliefPlanSet extend_plan_set(const GroundedDomain& domain, const ObservationModel& model,
                                     const BeliefPlanSet& parent, ActionId taken, const State& taken_state,
                                     TokenId o, std::size_t cap = kDefaultPlanSetCap) {
  std::vector<ChainPtr> chains;
  chains.push_back(extend(parent.chains().front(), taken, taken_state));
  bool truncated = parent.truncated();
  for (std::size_t c = 0; c < parent.size() && !(truncated && chains.size() >= cap); ++c) {
    const State& s = parent.last_state(c);
    for (ActionId a = 0; a < domain.num_actions(); ++a) {
      if (c == 0 && a == taken) continue;
      const auto& action = domain.action(a);
      if (!applicable(s, action)) continue;
      State succ = successor(s, action);
      if (model.observe(a, succ) != o) continue;
      if (chains.size() >= cap) {
        truncated = true;
        break;
      }
      chains.push_back(extend(parent.chains()[c], a, std::move(succ)));
    }
  }
  return BeliefPlanSet(parent.root(), std::move(chains), truncated);
}

// Enumerates the chains of BPS(plan, s0) depth-first, stopping after `cap`
// complete chains. States that cannot reach the end of the trace are pruned
// beforehand, so every explored prefix completes.
inline BeliefPlanSet belief_plan_set(const GroundedDomain& domain, const ObservationModel& model, const State& s0,
                                     const Plan& plan, std::size_t cap = kDefaultPlanSetCap,
                                     std::size_t max_states = kDefaultBeliefCap) {
  if (cap == 0) throw BadParameter("plan-set cap must be positive");
  BeliefSequence seq = belief_sequence(domain, model, s0, plan, max_states);
  const std::size_t n = plan.size();

  // alive[i]: states of b_i from which the remaining tokens can be emitted.
  std::vector<std::vector<State>> alive(n + 1);
  alive[n] = seq.beliefs[n].states();
  for (std::size_t i = n; i-- > 0;) {
    for (const State& s : seq.beliefs[i]) {
      for (ActionId a = 0; a < domain.num_actions(); ++a) {
        const auto& action = domain.action(a);
        if (!applicable(s, action)) continue;
        State succ = successor(s, action);
        if (model.observe(a, succ) == seq.tokens[i] &&
            std::binary_search(alive[i + 1].begin(), alive[i + 1].end(), succ)) {
          alive[i].push_back(s);
          break;
        }
      }
    }
  }

  std::vector<ChainPtr> chains;
  ChainPtr own;
  {
    State s = s0;
    for (ActionId a : plan.steps) {
      s = successor(s, domain.action(a));
      own = extend(own, a, s);
    }
  }
  chains.push_back(own);
  bool truncated = false;

  // Depth-first over chain prefixes; `on_plan` tracks whether the prefix
  // still equals the plan's own prefix so the own chain is not duplicated.
  auto dfs = [&](auto&& self, const ChainPtr& prefix, const State& s, std::size_t depth, bool on_plan) -> void {
    if (truncated) return;
    if (depth == n) {
      if (on_plan) return;
      if (chains.size() >= cap) {
        truncated = true;
        return;
      }
      chains.push_back(prefix);
      return;
    }
    for (ActionId a = 0; a < domain.num_actions() && !truncated; ++a) {
      const auto& action = domain.action(a);
      if (!applicable(s, action)) continue;
      State succ = successor(s, action);
      if (model.observe(a, succ) != seq.tokens[depth]) continue;
      if (!std::binary_search(alive[depth + 1].begin(), alive[depth + 1].end(), succ)) continue;
      self(self, extend(prefix, a, succ), succ, depth + 1, on_plan && plan.steps[depth] == a);
    }
  };
  dfs(dfs, nullptr, s0, 0, true);
  return BeliefPlanSet(s0, std::move(chains), truncated);
}

}  // namespace covert
