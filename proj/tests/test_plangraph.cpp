#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace covert;
using covert::testing::toy_domain;

namespace {

GroundedDomain two_blocks() {
  return toy_domain(
      {"on-A-B", "on-B-A", "ontable-A", "ontable-B", "clear-A", "clear-B", "holding-A", "holding-B", "handempty"},
      {{"pickup-A", {"ontable-A", "clear-A", "handempty"}, {"holding-A"}, {"ontable-A", "clear-A", "handempty"}},
       {"pickup-B", {"ontable-B", "clear-B", "handempty"}, {"holding-B"}, {"ontable-B", "clear-B", "handempty"}},
       {"putdown-A", {"holding-A"}, {"ontable-A", "clear-A", "handempty"}, {"holding-A"}},
       {"putdown-B", {"holding-B"}, {"ontable-B", "clear-B", "handempty"}, {"holding-B"}},
       {"stack-A-B", {"holding-A", "clear-B"}, {"on-A-B", "clear-A", "handempty"}, {"holding-A", "clear-B"}},
       {"stack-B-A", {"holding-B", "clear-A"}, {"on-B-A", "clear-B", "handempty"}, {"holding-B", "clear-A"}},
       {"unstack-A-B", {"on-A-B", "clear-A", "handempty"}, {"holding-A", "clear-B"}, {"on-A-B", "clear-A", "handempty"}},
       {"unstack-B-A", {"on-B-A", "clear-B", "handempty"}, {"holding-B", "clear-A"}, {"on-B-A", "clear-B", "handempty"}}});
}

GoalCondition goal(const GroundedDomain& d, std::initializer_list<std::string> lits) {
  return GoalCondition{d.make_set(std::vector<std::string>(lits))};
}

}  // namespace

TEST(PlanGraph, NoActionsLevelsOffImmediately) {
  auto d = toy_domain({"p", "q"}, {});
  PlanGraph g(d, d.make_set({"p"}));
  EXPECT_TRUE(g.leveled_off());
  EXPECT_EQ(g.num_layers(), 1u);
  EXPECT_EQ(g.proposition_layers()[0].props, d.make_set({"p"}));
  EXPECT_EQ(g.set_level(goal(d, {"q"})), kInfiniteLevel);
}

TEST(PlanGraph, OneActionDomainLevelsOffAtLayerTwo) {
  // P0 = {p}; a and noop-p give P1 = {p, q} without mutexes; P2 repeats P1.
  auto d = toy_domain({"p", "q"}, {{"a", {"p"}, {"q"}, {}}});
  PlanGraph g(d, d.make_set({"p"}));
  EXPECT_TRUE(g.leveled_off());
  EXPECT_EQ(g.num_layers(), 3u);
  EXPECT_EQ(g.proposition_layers()[1].props, d.make_set({"p", "q"}));
  EXPECT_EQ(g.proposition_layers()[2].props, d.make_set({"p", "q"}));
  EXPECT_EQ(g.set_level(goal(d, {"q"})), 1u);
}

TEST(PlanGraph, LayersGrowMonotonically) {
  auto p = covert::testing::four_blocks();
  PlanGraph g(p.domain, p.spec.initial);
  const auto& layers = g.proposition_layers();
  for (std::size_t i = 1; i < layers.size(); ++i) {
    EXPECT_TRUE(layers[i - 1].props.is_subset_of(layers[i].props));
    for (FluentId f : layers[i - 1].props.ids())
      EXPECT_TRUE(layers[i].mutex[f].is_subset_of(layers[i - 1].mutex[f] | (layers[i].props - layers[i - 1].props)))
          << "mutex appeared between persisting fluents at layer " << i;
  }
  for (const auto& layer : g.action_layers())
    for (auto [x, y] : layer.mutex) EXPECT_LT(x, y);
}

TEST(SetLevel, GoalAlreadyTrue) {
  auto d = two_blocks();
  EXPECT_EQ(set_level(PlanGraph(d, d.make_set({"ontable-A", "clear-A"})), goal(d, {"clear-A"})), 0u);
}

TEST(SetLevel, TwoBlockHolding) {
  auto d = two_blocks();
  State s = d.make_set({"on-A-B", "clear-A", "handempty", "ontable-B"});
  GoalCondition g = goal(d, {"holding-A"});
  EXPECT_EQ(covert::testing::bfs_optimal_length(d, s, g), std::optional<std::size_t>(1));
  EXPECT_EQ(set_level(PlanGraph(d, s), g), 1u);
}

TEST(SetLevel, MutexGoalsNeverCoexist) {
  auto d = two_blocks();
  State s = d.make_set({"ontable-A", "ontable-B", "clear-A", "clear-B", "handempty"});
  PlanGraph g(d, s);
  EXPECT_EQ(g.set_level(goal(d, {"holding-A"})), 1u);
  EXPECT_EQ(g.set_level(goal(d, {"holding-A", "holding-B"})), kInfiniteLevel);
  EXPECT_EQ(g.set_level(goal(d, {"on-A-B", "on-B-A"})), kInfiniteLevel);
  EXPECT_EQ(g.set_level(goal(d, {"on-A-B"})), 2u);
}

TEST(SetLevel, UnreachableFluent) {
  auto d = toy_domain({"p", "q", "r"}, {{"a", {"p"}, {"q"}, {}}});
  EXPECT_EQ(set_level(PlanGraph(d, d.make_set({"p"})), goal(d, {"r"})), kInfiniteLevel);
}

TEST(SetLevelFromBelief, MinimumOverStates) {
  // s1 = {p} reaches nothing; s2 = {q} needs q->r->g, two steps.
  auto d = toy_domain({"p", "q", "r", "g"}, {{"a1", {"q"}, {"r"}, {}}, {"a2", {"r"}, {"g"}, {}}});
  State s1 = d.make_set({"p"}), s2 = d.make_set({"q"});
  GoalCondition g = goal(d, {"g"});
  EXPECT_EQ(covert::testing::bfs_optimal_length(d, s1, g), std::nullopt);
  EXPECT_EQ(covert::testing::bfs_optimal_length(d, s2, g), std::optional<std::size_t>(2));
  EXPECT_EQ(set_level_from_belief(d, Belief({s1, s2}), g), 2u);
  SetLevelCache cache(d);
  EXPECT_EQ(set_level_from_belief(cache, Belief({s1, s2}), g), 2u);
  EXPECT_EQ(set_level_from_belief(cache, Belief({s2}), g), set_level(PlanGraph(d, s2), g));
  EXPECT_EQ(set_level_from_belief(cache, Belief({s1, d.make_set({"g"})}), g), 0u);
}

TEST(SetLevel, NeverExceedsOptimalPlanLength) {
  std::mt19937_64 rng(99);
  std::size_t checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto inst = covert::testing::random_instance(rng);
    const auto& d = inst.domain;
    SetLevelCache cache(d);
    for (const State& s : covert::testing::reachable_states(d, inst.s0)) {
      for (FluentId f = 0; f < d.num_fluents(); ++f) {
        GoalCondition g{d.empty_set()};
        g.literals.insert(f);
        g.literals.insert((f + 1) % d.num_fluents());
        auto opt = covert::testing::bfs_optimal_length(d, s, g);
        if (!opt) continue;
        ++checked;
        ASSERT_LE(cache.level(s, g), *opt);
      }
    }
  }
  EXPECT_GT(checked, 100u);
}

TEST(SetLevelCache, MatchesUncachedGraphs) {
  auto p = covert::testing::four_blocks();
  SetLevelCache cache(p.domain);
  for (const State& s : covert::testing::reachable_states(p.domain, p.spec.initial)) {
    for (std::size_t i = 0; i < p.spec.goals.size(); ++i)
      ASSERT_EQ(cache.level(s, p.spec.goals[i]), set_level(PlanGraph(p.domain, s), p.spec.goals[i]));
  }
  EXPECT_GT(cache.graphs_built(), 1u);
}
