#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "covert/belief.hpp"
#include "covert/strips.hpp"

namespace covert {

using Level = std::uint32_t;
inline constexpr Level kInfiniteLevel = std::numeric_limits<Level>::max();

// Layered Graphplan structure with binary mutexes, expanded to level-off.
//
// Action nodes in a layer are identified by "node ids": ids below the
// domain's action count are real actions, id |A| + f is the maintenance
// (noop) action for fluent f.
class PlanGraph {
 public:
  struct PropositionLayer {
    FluentSet props;
    std::vector<FluentSet> mutex;  // mutex[f] = fluents mutex with f
  };
  struct ActionLayer {
    std::vector<std::uint32_t> nodes;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> mutex;  // node ids, first < second
  };

  PlanGraph(const GroundedDomain& domain, const State& s) : num_actions_(domain.num_actions()) {
    const std::size_t nf = domain.num_fluents();
    props_.push_back({s, std::vector<FluentSet>(nf, FluentSet(nf))});
    if (domain.num_actions() == 0) {
      leveled_off_ = true;
      return;
    }
    for (;;) {
      const PropositionLayer& cur = props_.back();
      // Nodes whose preconditions are present and pairwise mutex-free.
      std::vector<std::uint32_t> nodes;
      std::vector<const FluentSet*> pre, add, del;
      std::vector<FluentSet> noop_sets;
      noop_sets.reserve(nf);
      const FluentSet empty(nf);
      for (ActionId a = 0; a < domain.num_actions(); ++a) {
        const auto& act = domain.action(a);
        if (!act.pre.is_subset_of(cur.props)) continue;
        bool ok = true;
        for (FluentId p : act.pre.ids())
          if (cur.mutex[p].intersects(act.pre)) {
            ok = false;
            break;
          }
        if (!ok) continue;
        nodes.push_back(a);
        pre.push_back(&act.pre);
        add.push_back(&act.add);
        del.push_back(&act.del);
      }
      for (FluentId f : cur.props.ids()) {
        noop_sets.emplace_back(nf, std::initializer_list<FluentId>{f});
        nodes.push_back(static_cast<std::uint32_t>(domain.num_actions() + f));
      }
      for (std::size_t i = pre.size(), f = 0; i < nodes.size(); ++i, ++f) {
        pre.push_back(&noop_sets[f]);
        add.push_back(&noop_sets[f]);
        del.push_back(&empty);
      }

      // Action mutexes: interference/inconsistent effects and competing needs.
      const std::size_t k = nodes.size();
      std::vector<FluentSet> needs_mutex(k, FluentSet(nf));
      for (std::size_t x = 0; x < k; ++x)
        for (FluentId p : pre[x]->ids()) needs_mutex[x] |= cur.mutex[p];
      std::vector<FluentSet> amutex(k, FluentSet(k));
      ActionLayer layer;
      layer.nodes = nodes;
      for (std::size_t x = 0; x < k; ++x) {
        for (std::size_t y = x + 1; y < k; ++y) {
          bool m = del[x]->intersects(*pre[y]) || del[x]->intersects(*add[y]) || del[y]->intersects(*pre[x]) ||
                   del[y]->intersects(*add[x]) || needs_mutex[x].intersects(*pre[y]);
          if (m) {
            amutex[x].insert(static_cast<FluentId>(y));
            amutex[y].insert(static_cast<FluentId>(x));
            layer.mutex.emplace_back(nodes[x], nodes[y]);
          }
        }
      }

      // Next proposition layer and its mutexes: p, q are mutex when every
      // pair of their achievers is mutex.
      PropositionLayer next{FluentSet(nf), std::vector<FluentSet>(nf, FluentSet(nf))};
      std::vector<FluentSet> achievers(nf, FluentSet(k));
      for (std::size_t x = 0; x < k; ++x) {
        next.props |= *add[x];
        for (FluentId p : add[x]->ids()) achievers[p].insert(static_cast<FluentId>(x));
      }
      auto present = next.props.ids();
      for (std::size_t i = 0; i < present.size(); ++i) {
        for (std::size_t j = i + 1; j < present.size(); ++j) {
          FluentId p = present[i], q = present[j];
          bool supported = false;
          for (FluentId x : achievers[p].ids()) {
            if ((achievers[q] - amutex[x]).empty()) continue;
            supported = true;
            break;
          }
          if (!supported) {
            next.mutex[p].insert(q);
            next.mutex[q].insert(p);
          }
        }
      }

      actions_.push_back(std::move(layer));
      bool same = next.props == cur.props && next.mutex == cur.mutex;
      props_.push_back(std::move(next));
      if (same) {
        leveled_off_ = true;
        break;
      }
    }
  }

  std::size_t num_layers() const noexcept { return props_.size(); }
  const std::vector<PropositionLayer>& proposition_layers() const noexcept { return props_; }
  const std::vector<ActionLayer>& action_layers() const noexcept { return actions_; }
  bool leveled_off() const noexcept { return leveled_off_; }
  bool is_noop(std::uint32_t node) const noexcept { return node >= num_actions_; }

  bool mutex_free(std::size_t layer, const FluentSet& goal) const {
    const auto& L = props_.at(layer);
    if (!goal.is_subset_of(L.props)) return false;
    for (FluentId g : goal.ids())
      if (L.mutex[g].intersects(goal)) return false;
    return true;
  }

  // First layer holding every goal literal with no pair mutex.
  Level set_level(const GoalCondition& goal) const {
    for (std::size_t i = 0; i < props_.size(); ++i)
      if (mutex_free(i, goal.literals)) return static_cast<Level>(i);
    return kInfiniteLevel;
  }

 private:
  std::size_t num_actions_;
  std::vector<PropositionLayer> props_;
  std::vector<ActionLayer> actions_;
  bool leveled_off_ = false;
};

inline PlanGraph build_plangraph(const GroundedDomain& domain, const State& s) { return PlanGraph(domain, s); }

inline Level set_level(const PlanGraph& graph, const GoalCondition& goal) { return graph.set_level(goal); }

// Memo of set-levels per (state, goal). Safe for concurrent use.
class SetLevelCache {
 public:
  explicit SetLevelCache(const GroundedDomain& domain) : domain_(&domain) {}

  Level level(const State& s, const GoalCondition& goal) {
    Key key{s, goal.literals};
    {
      std::shared_lock lock(mutex_);
      if (auto it = levels_.find(key); it != levels_.end()) return it->second;
    }
    std::shared_ptr<const PlanGraph> graph = graph_for(s);
    Level l = graph->set_level(goal);
    std::unique_lock lock(mutex_);
    levels_.try_emplace(std::move(key), l);
    return l;
  }

  // Minimum over the states of a belief.
  Level level(const Belief& b, const GoalCondition& goal) {
    Level best = kInfiniteLevel;
    for (const State& s : b) {
      best = std::min(best, level(s, goal));
      if (best == 0) break;
    }
    return best;
  }

  std::size_t graphs_built() const {
    std::shared_lock lock(mutex_);
    return graphs_.size();
  }

 private:
  struct Key {
    State state;
    FluentSet goal;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept { return k.state.hash() * 31 + k.goal.hash(); }
  };

  std::shared_ptr<const PlanGraph> graph_for(const State& s) {
    {
      std::shared_lock lock(mutex_);
      if (auto it = graphs_.find(s); it != graphs_.end()) return it->second;
    }
    auto built = std::make_shared<const PlanGraph>(*domain_, s);
    std::unique_lock lock(mutex_);
    return graphs_.try_emplace(s, std::move(built)).first->second;
  }

  const GroundedDomain* domain_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<State, std::shared_ptr<const PlanGraph>, FluentSetHash> graphs_;
  std::unordered_map<Key, Level, KeyHash> levels_;
};

inline Level set_level_from_belief(const GroundedDomain& domain, const Belief& b, const GoalCondition& goal) {
  Level best = kInfiniteLevel;
  for (const State& s : b) best = std::min(best, PlanGraph(domain, s).set_level(goal));
  return best;
}

inline Level set_level_from_belief(SetLevelCache& cache, const Belief& b, const GoalCondition& goal) {
  return cache.level(b, goal);
}

}  // namespace covert
