#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "covert/belief.hpp"
#include "covert/errors.hpp"
#include "covert/observation.hpp"
#include "covert/strips.hpp"

namespace covert {

// Lexicographic heuristic value; scalar heuristics use only the first slot.
struct HeuristicKey {
  std::array<double, 3> value{};

  static HeuristicKey scalar(double v) { return HeuristicKey{{v, 0.0, 0.0}}; }
  friend bool operator==(const HeuristicKey&, const HeuristicKey&) = default;
  friend auto operator<=>(const HeuristicKey& a, const HeuristicKey& b) { return a.value <=> b.value; }
};

struct SearchStatistics {
  std::size_t expanded = 0;
  std::size_t generated = 0;
  std::size_t duplicates = 0;
  std::size_t reopened = 0;
  std::size_t dead_ends = 0;
  std::size_t cost_pruned = 0;
  std::size_t delta = 1;
  double seconds = 0.0;
};

// Passed to the node-generation hook: the full path of a freshly generated
// node together with the belief the search computed for it.
struct GeneratedNode {
  const Plan& path;
  const std::vector<TokenId>& tokens;
  const State& state;
  const Belief& belief;
};

struct SearchConfig {
  std::optional<Rational> cost_bound;
  std::optional<std::uint64_t> noise_seed;
  std::size_t belief_cap = kDefaultBeliefCap;
  bool track_plan_set = false;
  std::size_t plan_set_cap = kDefaultPlanSetCap;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  std::function<void(const GeneratedNode&)> on_generate;
};

struct SearchResult {
  Plan plan;
  std::vector<TokenId> trace;
  Belief final_belief;
  std::optional<BeliefPlanSet> plan_set;
  std::vector<std::size_t> satisfied_goals;
  SearchStatistics stats;
};

namespace detail {

struct SearchNode {
  std::vector<State> tracked;  // tracked[0] is the agent's true state
  const Belief* belief = nullptr;
  std::shared_ptr<const BeliefPlanSet> plan_set;
  std::size_t parent = 0;
  ActionId action = 0;
  TokenId token = 0;
  Rational g{0};
  std::size_t depth = 0;
};

}  // namespace detail

// What goal tests and heuristics see of a search node.
class NodeView {
 public:
  NodeView(const detail::SearchNode& node, const std::vector<detail::SearchNode>& arena,
           const std::vector<ActionId>* pending = nullptr)
      : node_(&node), arena_(&arena), pending_(pending) {}

  const State& state() const noexcept { return node_->tracked.front(); }
  std::span<const State> tracked() const noexcept { return node_->tracked; }
  const Belief& belief() const noexcept { return *node_->belief; }
  const BeliefPlanSet* plan_set() const noexcept { return node_->plan_set.get(); }
  const Rational& g() const noexcept { return node_->g; }
  std::size_t depth() const noexcept { return node_->depth; }

  // Path from the root to this node.
  Plan plan() const {
    Plan p;
    if (pending_) {
      p.steps = *pending_;
      return p;
    }
    p.steps.resize(node_->depth);
    const detail::SearchNode* n = node_;
    for (std::size_t i = node_->depth; i > 0; --i) {
      p.steps[i - 1] = n->action;
      n = &(*arena_)[n->parent];
    }
    return p;
  }

 private:
  const detail::SearchNode* node_;
  const std::vector<detail::SearchNode>* arena_;
  const std::vector<ActionId>* pending_;
};

namespace detail {

struct ClosedKey {
  std::vector<State> tracked;  // sorted
  const Belief* belief;
  friend bool operator==(const ClosedKey&, const ClosedKey&) = default;
};
struct ClosedKeyHash {
  std::size_t operator()(const ClosedKey& k) const noexcept {
    std::size_t h = std::hash<const void*>{}(k.belief);
    for (const auto& s : k.tracked) h = h * 1099511628211ull ^ s.hash();
    return h;
  }
};

inline ClosedKey closed_key(const SearchNode& n) {
  ClosedKey k{n.tracked, n.belief};
  std::sort(k.tracked.begin(), k.tracked.end());
  return k;
}

struct OpenEntry {
  HeuristicKey h;
  std::uint64_t seq;
  std::size_t node;
  // std::priority_queue is a max-heap: invert for ascending h, FIFO ties.
  bool operator<(const OpenEntry& o) const {
    if (h != o.h) return h > o.h;
    return seq > o.seq;
  }
};

}  // namespace detail

// Greedy best-first search over (tracked states, belief) nodes.
//
// Nodes are expanded in ascending heuristic order with FIFO tie-breaking.
// A node whose key was seen before is re-queued only when its heuristic
// strictly improves (reopening closed nodes if necessary). A heuristic
// returning nullopt marks a dead end. With `delta` > 1 each popped node
// first absorbs belief states into its tracked set until it holds `delta`
// states; absorbed states follow the agent's actions when they emit the
// same token and are dropped otherwise.
template <typename GoalTest, typename Heuristic>
SearchResult gbfs(const GroundedDomain& domain, const ObservationModel& model, const State& s0, GoalTest&& goal_test,
                  Heuristic&& heuristic, const SearchConfig& config = {}, std::size_t delta = 1) {
  using detail::SearchNode;
  const auto started = std::chrono::steady_clock::now();
  SearchStatistics stats;
  stats.delta = delta;

  std::unordered_set<Belief, BeliefHash> beliefs;
  auto intern = [&](Belief b) { return &*beliefs.insert(std::move(b)).first; };
  struct UpdateKey {
    const Belief* belief;
    TokenId token;
    bool operator==(const UpdateKey&) const = default;
  };
  struct UpdateKeyHash {
    std::size_t operator()(const UpdateKey& k) const noexcept {
      return std::hash<const void*>{}(k.belief) * 31 + k.token;
    }
  };
  std::unordered_map<UpdateKey, const Belief*, UpdateKeyHash> updates;
  auto update = [&](const Belief* b, TokenId o) {
    auto [it, fresh] = updates.try_emplace(UpdateKey{b, o}, nullptr);
    if (fresh) it->second = intern(belief_update(domain, model, *b, o, config.belief_cap));
    return it->second;
  };

  std::optional<std::mt19937_64> rng;
  if (config.noise_seed) rng.emplace(*config.noise_seed);
  std::uniform_real_distribution<double> jitter(0.0, 0.5);

  std::vector<SearchNode> arena;
  std::priority_queue<detail::OpenEntry> open;
  struct Record {
    HeuristicKey best;
    bool expanded = false;
  };
  std::unordered_map<detail::ClosedKey, Record, detail::ClosedKeyHash> records;
  std::uint64_t seq = 0;

  auto finish = [&](const SearchNode& node) {
    SearchResult r;
    NodeView view(node, arena);
    r.plan = view.plan();
    r.trace.resize(node.depth);
    const SearchNode* n = &node;
    for (std::size_t i = node.depth; i > 0; --i) {
      r.trace[i - 1] = n->token;
      n = &arena[n->parent];
    }
    r.final_belief = *node.belief;
    if (node.plan_set) r.plan_set = *node.plan_set;
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    r.stats = stats;
    return r;
  };

  auto evaluate = [&](const NodeView& view) -> std::optional<HeuristicKey> {
    std::optional<HeuristicKey> h = heuristic(view);
    if (h && rng) h->value[0] += jitter(*rng);
    return h;
  };

  {
    SearchNode root;
    root.tracked = {s0};
    root.belief = intern(initial_belief(s0));
    if (config.track_plan_set) root.plan_set = std::make_shared<const BeliefPlanSet>(BeliefPlanSet::singleton(s0));
    auto h = evaluate(NodeView(root, arena));
    if (!h) throw Exhausted("initial state is a dead end");
    records.emplace(detail::closed_key(root), Record{*h, false});
    arena.push_back(std::move(root));
    open.push({*h, seq++, 0});
  }

  while (!open.empty()) {
    detail::OpenEntry entry = open.top();
    open.pop();
    {
      const Record& rec = records.at(detail::closed_key(arena[entry.node]));
      if (entry.h > rec.best) continue;  // superseded by a better path
    }
    if (config.deadline && std::chrono::steady_clock::now() > *config.deadline)
      throw SearchTimeout("search exceeded its time limit after " + std::to_string(stats.expanded) + " expansions");

    if (arena[entry.node].tracked.size() < delta) {
      SearchNode& n = arena[entry.node];
      for (const State& s : *n.belief) {
        if (n.tracked.size() >= delta) break;
        if (std::find(n.tracked.begin(), n.tracked.end(), s) == n.tracked.end()) n.tracked.push_back(s);
      }
      auto [it, fresh] = records.try_emplace(detail::closed_key(n), Record{entry.h, false});
      if (!fresh) {
        if (it->second.expanded && !(entry.h < it->second.best)) continue;
        it->second.best = std::min(it->second.best, entry.h);
      }
    }
    {
      Record& rec = records.at(detail::closed_key(arena[entry.node]));
      rec.expanded = true;
    }
    ++stats.expanded;

    if (goal_test(NodeView(arena[entry.node], arena))) return finish(arena[entry.node]);

    const std::size_t parent_index = entry.node;
    for (ActionId a = 0; a < domain.num_actions(); ++a) {
      const SearchNode& parent = arena[parent_index];
      const auto& action = domain.action(a);
      if (!applicable(parent.tracked.front(), action)) continue;

      SearchNode child;
      child.parent = parent_index;
      child.action = a;
      child.depth = parent.depth + 1;
      child.g = parent.g + action.cost;
      if (config.cost_bound && child.g > *config.cost_bound) {
        ++stats.cost_pruned;
        continue;
      }
      State next = successor(parent.tracked.front(), action);
      child.token = model.observe(a, next);
      child.tracked.push_back(next);
      for (std::size_t t = 1; t < parent.tracked.size(); ++t) {
        const State& s = parent.tracked[t];
        if (!applicable(s, action)) continue;
        State moved = successor(s, action);
        if (model.observe(a, moved) != child.token) continue;
        if (std::find(child.tracked.begin(), child.tracked.end(), moved) == child.tracked.end())
          child.tracked.push_back(std::move(moved));
      }
      child.belief = update(parent.belief, child.token);
      if (config.track_plan_set)
        child.plan_set = std::make_shared<const BeliefPlanSet>(
            extend_plan_set(domain, model, *parent.plan_set, a, next, child.token, config.plan_set_cap));
      ++stats.generated;

      if (config.on_generate) {
        NodeView pv(parent, arena);
        Plan path = pv.plan();
        path.steps.push_back(a);
        std::vector<TokenId> tokens(child.depth);
        tokens[child.depth - 1] = child.token;
        const SearchNode* n = &parent;
        for (std::size_t i = parent.depth; i > 0; --i) {
          tokens[i - 1] = n->token;
          n = &arena[n->parent];
        }
        config.on_generate(GeneratedNode{path, tokens, next, *child.belief});
      }

      std::vector<ActionId> pending;
      {
        NodeView pv(parent, arena);
        pending = pv.plan().steps;
        pending.push_back(a);
      }
      auto h = evaluate(NodeView(child, arena, &pending));
      if (!h) {
        ++stats.dead_ends;
        continue;
      }
      auto key = detail::closed_key(child);
      auto [it, fresh] = records.try_emplace(std::move(key), Record{*h, false});
      if (!fresh) {
        if (!(*h < it->second.best)) {
          ++stats.duplicates;
          continue;
        }
        if (it->second.expanded) ++stats.reopened;
        it->second.best = *h;
        it->second.expanded = false;
      }
      arena.push_back(std::move(child));
      open.push({*h, seq++, arena.size() - 1});
    }
  }

  if (stats.cost_pruned > 0)
    throw CostBoundExceeded("no solution within the cost bound (" + std::to_string(stats.expanded) +
                            " expansions, " + std::to_string(stats.cost_pruned) + " successors over the bound)");
  throw Exhausted("search space exhausted after " + std::to_string(stats.expanded) + " expansions");
}

// Runs gbfs with delta = 1 .. delta_max and returns the first success.
// Timeouts and belief overflows abort immediately.
template <typename GoalTest, typename Heuristic>
SearchResult delta_loop(const GroundedDomain& domain, const ObservationModel& model, const State& s0,
                        GoalTest&& goal_test, Heuristic&& heuristic, const SearchConfig& config,
                        std::size_t delta_max = 1) {
  if (delta_max < 1) throw BadParameter("delta-max must be at least 1");
  std::string failures;
  bool all_cost_bound = true;
  for (std::size_t delta = 1; delta <= delta_max; ++delta) {
    try {
      return gbfs(domain, model, s0, goal_test, heuristic, config, delta);
    } catch (const CostBoundExceeded& e) {
      failures += (failures.empty() ? "" : "; ") + std::string("delta ") + std::to_string(delta) + ": " + e.what();
    } catch (const Exhausted& e) {
      all_cost_bound = false;
      failures += (failures.empty() ? "" : "; ") + std::string("delta ") + std::to_string(delta) + ": " + e.what();
    }
  }
  if (all_cost_bound) throw CostBoundExceeded(failures);
  throw Exhausted(failures);
}

}  // namespace covert
