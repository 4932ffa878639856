#include <gtest/gtest.h>

#include <deque>
#include <map>
#include <random>
#include <set>

#include "support.hpp"

using namespace covert;
using covert::testing::constant_model;
using covert::testing::toy_domain;

namespace {

auto set_level_heuristic(SetLevelCache& cache, const GoalCondition& g) {
  return [&cache, &g](const NodeView& v) -> std::optional<HeuristicKey> {
    Level l = cache.level(v.state(), g);
    if (l == kInfiniteLevel) return std::nullopt;
    return HeuristicKey::scalar(l);
  };
}

// Found by random search over 4-fluent domains and confirmed by brute-force
// enumeration of all plans of cost <= 4: 2-diverse plans exist (a0 a2 a1 is
// one), yet merging nodes on (state, belief) alone loses them.
struct DeltaInstance {
  GroundedDomain domain = toy_domain({"p", "q", "r", "g"}, {{"a0", {}, {"r", "g"}, {"q"}},
                                                            {"a1", {"q"}, {}, {"p"}},
                                                            {"a2", {"g"}, {"q"}, {}},
                                                            {"a3", {}, {}, {"p"}},
                                                            {"a4", {"g"}, {"q"}, {"p"}}});
  ObservationModel model = parse_observation_model(
      "obs t0 t1\nrule t0 action=a1\nrule t1 action=*\n", domain);
  State s0 = domain.make_set({"p"});
  GoalCondition goal{domain.make_set({"g"})};

  VariantConfig config(std::size_t delta_max) const {
    VariantConfig c;
    c.variant = Variant::l_diverse;
    c.l = 2;
    c.d = Rational(1, 2);
    c.cost_bound = Rational(4);
    c.delta_max = delta_max;
    return c;
  }
};

}  // namespace

TEST(Gbfs, GoalAtRootGivesEmptyPlan) {
  auto d = toy_domain({"p"}, {{"a", {}, {"p"}, {}}});
  auto m = constant_model(d);
  auto r = gbfs(d, m, d.make_set({"p"}), [](const NodeView&) { return true; },
                [](const NodeView&) { return std::optional(HeuristicKey{}); });
  EXPECT_TRUE(r.plan.empty());
  EXPECT_TRUE(r.trace.empty());
  EXPECT_EQ(r.stats.expanded, 1u);
}

TEST(Gbfs, ClassicalFourBlocksFindsSixStepPlan) {
  auto p = covert::testing::four_blocks("obs-o2.txt");
  auto m = one_to_one_model(p.domain);
  SetLevelCache cache(p.domain);
  const GoalCondition& g = p.spec.goals.true_goal;
  auto r = gbfs(p.domain, m, p.spec.initial, [&](const NodeView& v) { return satisfies(v.state(), g); },
                set_level_heuristic(cache, g));
  EXPECT_EQ(r.plan.size(), 6u);
  EXPECT_TRUE(satisfies(execute(p.domain, p.spec.initial, r.plan), g));
  EXPECT_EQ(covert::testing::bfs_optimal_length(p.domain, p.spec.initial, g), std::optional<std::size_t>(6));
}

TEST(Gbfs, UnreachableGoalExhausts) {
  auto d = toy_domain({"p", "q", "g"}, {{"a", {"p"}, {"q"}, {"p"}}, {"b", {"q"}, {"p"}, {"q"}}});
  auto m = constant_model(d);
  GoalCondition g{d.make_set({"g"})};
  EXPECT_THROW(gbfs(d, m, d.make_set({"p"}), [&](const NodeView& v) { return satisfies(v.state(), g); },
                    [](const NodeView&) { return std::optional(HeuristicKey{}); }),
               Exhausted);
  SetLevelCache cache(d);
  EXPECT_THROW(gbfs(d, m, d.make_set({"p"}), [&](const NodeView& v) { return satisfies(v.state(), g); },
                    set_level_heuristic(cache, g)),
               Exhausted);
}

TEST(Gbfs, TiesBreakInInsertionOrder) {
  // All successors tie; FIFO order means the first applicable action wins.
  auto d = toy_domain({"p", "q", "g"}, {{"x", {}, {"p"}, {}}, {"y", {}, {"q"}, {}}, {"z", {"p"}, {"g"}, {}},
                                        {"w", {"q"}, {"g"}, {}}});
  auto m = one_to_one_model(d);
  GoalCondition g{d.make_set({"g"})};
  auto r = gbfs(d, m, d.make_set({}), [&](const NodeView& v) { return satisfies(v.state(), g); },
                [](const NodeView&) { return std::optional(HeuristicKey{}); });
  EXPECT_EQ(d.names_of(r.plan), (std::vector<std::string>{"x", "z"}));
}

TEST(Gbfs, ReopenCounterIncrements) {
  auto d = toy_domain({"x", "y", "g"}, {{"a1", {}, {"x"}, {}}, {"a2", {}, {"y"}, {}}, {"a3", {"x"}, {"y"}, {}},
                                        {"a4", {"y"}, {"x"}, {}}, {"fin", {"x", "y"}, {"g"}, {}}});
  auto m = constant_model(d);
  const ActionId a1 = d.action_id("a1");
  std::size_t pops = 0;
  auto h = [&](const NodeView& v) -> std::optional<HeuristicKey> {
    if (v.depth() == 0) return HeuristicKey::scalar(0);
    Plan p = v.plan();
    if (v.depth() == 1) return HeuristicKey::scalar(p.steps[0] == a1 ? 1 : 2);
    if (satisfies(v.state(), GoalCondition{d.make_set({"g"})})) return HeuristicKey::scalar(p.steps[0] == a1 ? 5 : 4);
    return HeuristicKey::scalar(p.steps[0] == a1 ? 0 : -1);
  };
  // Goal: a node reached through a2 that has g; it only appears after the
  // a2 branch reopens nodes first expanded through a1.
  auto goal = [&](const NodeView& v) {
    ++pops;
    if (!satisfies(v.state(), GoalCondition{d.make_set({"g"})})) return false;
    return v.plan().steps[0] != a1;
  };
  auto r = gbfs(d, m, d.make_set({}), goal, h);
  EXPECT_GT(r.stats.reopened, 0u);
  EXPECT_NE(r.plan.steps[0], a1);
}

TEST(Gbfs, DeadlineRaisesTimeout) {
  auto p = covert::testing::four_blocks();
  SearchConfig c;
  c.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  EXPECT_THROW(gbfs(p.domain, p.model, p.spec.initial, [](const NodeView&) { return false; },
                    [](const NodeView&) { return std::optional(HeuristicKey{}); }, c),
               SearchTimeout);
}

TEST(Gbfs, NoiseIsSeeded) {
  auto p = covert::testing::four_blocks();
  VariantConfig c;
  c.variant = Variant::k_ambiguous;
  c.k = 3;
  c.noise_seed = 11;
  auto a = plan_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, c);
  auto b = plan_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, c);
  EXPECT_EQ(a.plan.steps, b.plan.steps);
  EXPECT_TRUE(oracle::verify_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, a.plan, 3).pass());
}

TEST(Gbfs, BeliefAtEveryNodeMatchesReplay) {
  auto p = covert::testing::four_blocks();
  SearchConfig c;
  std::size_t checked = 0;
  c.on_generate = [&](const GeneratedNode& n) {
    auto replayed = oracle::replay_beliefs(p.domain, p.model, p.spec.initial, n.tokens).back();
    ASSERT_EQ(std::vector<State>(replayed.begin(), replayed.end()), n.belief.states());
    ++checked;
  };
  VariantConfig vc;
  vc.k = 3;
  vc.on_generate = c.on_generate;
  plan_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, vc);
  EXPECT_GT(checked, 10u);
}

TEST(DeltaLoop, SecondIterationSolvesMergedInstance) {
  DeltaInstance inst;
  EXPECT_THROW(plan_l_diverse(inst.domain, inst.model, inst.s0, inst.goal, inst.config(1)), NoLDiversePlan);
  auto r = plan_l_diverse(inst.domain, inst.model, inst.s0, inst.goal, inst.config(2));
  EXPECT_EQ(r.stats.delta, 2u);
  auto rep = oracle::verify_l_diverse(inst.domain, inst.model, inst.s0, inst.goal, r.plan, 2, DistanceKind::action,
                                      Rational(1, 2));
  EXPECT_TRUE(rep.pass()) << rep.reason;
  EXPECT_LE(plan_cost(inst.domain, r.plan), Rational(4));
}

TEST(DeltaLoop, FirstSuccessShortCircuits) {
  auto p = covert::testing::four_blocks();
  VariantConfig c;
  c.k = 3;
  auto one = plan_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, c);
  c.delta_max = 3;
  auto three = plan_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, c);
  EXPECT_EQ(one.plan.steps, three.plan.steps);
  EXPECT_EQ(three.stats.delta, 1u);
  c.delta_max = 0;
  EXPECT_THROW(plan_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, c), BadParameter);
}

TEST(KAmbiguous, FourBlocksK3UnderO1) {
  auto p = covert::testing::four_blocks();
  VariantConfig c;
  c.k = 3;
  auto r = plan_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, c);
  EXPECT_TRUE(satisfies(execute(p.domain, p.spec.initial, r.plan), p.spec.goals.true_goal));
  EXPECT_EQ(r.satisfied_goals, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(oracle::verify_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, r.plan, 3).pass());
}

TEST(KAmbiguous, KOneIsClassical) {
  auto p = covert::testing::four_blocks();
  VariantConfig c;
  c.k = 1;
  auto r = plan_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, c);
  EXPECT_EQ(r.plan.size(), 6u);
  EXPECT_TRUE(satisfies(execute(p.domain, p.spec.initial, r.plan), p.spec.goals.true_goal));
}

TEST(KAmbiguous, UnreachableDecoy) {
  auto d = toy_domain({"g", "h"}, {{"a", {}, {"g"}, {}}});
  auto m = constant_model(d);
  CandidateGoalSet goals{GoalCondition{d.make_set({"g"})}, {GoalCondition{d.make_set({"h"})}}};
  VariantConfig c;
  c.k = 2;
  EXPECT_THROW(plan_k_ambiguous(d, m, d.make_set({}), goals, c), NoKAmbiguousPlan);
  c.k = 3;
  EXPECT_THROW(plan_k_ambiguous(d, m, d.make_set({}), goals, c), BadParameter);
}

// Under the block-identifying model no plan covers all three goals: an
// exhaustive sweep over every reachable (state, belief) pair finds none.
TEST(KAmbiguous, FourBlocksK3UnderO2IsInfeasible) {
  auto p = covert::testing::four_blocks("obs-o2.txt");
  VariantConfig c;
  c.k = 3;
  EXPECT_THROW(plan_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, c), NoKAmbiguousPlan);

  using Node = std::pair<State, std::set<State>>;
  std::set<Node> seen{{p.spec.initial, {p.spec.initial}}};
  std::deque<Node> queue(seen.begin(), seen.end());
  std::size_t witnesses = 0;
  while (!queue.empty()) {
    auto [s, b] = queue.front();
    queue.pop_front();
    bool all = satisfies(s, p.spec.goals.true_goal);
    for (std::size_t i = 1; i < 3 && all; ++i)
      all = std::any_of(b.begin(), b.end(), [&](const State& x) { return satisfies(x, p.spec.goals[i]); });
    witnesses += all;
    for (ActionId a = 0; a < p.domain.num_actions(); ++a) {
      if (!applicable(s, p.domain.action(a))) continue;
      State t = successor(s, p.domain.action(a));
      TokenId o = p.model.observe(a, t);
      std::vector<TokenId> one{o};
      std::set<State> nb;
      for (const State& x : b) {
        auto r = oracle::replay_beliefs(p.domain, p.model, x, one).back();
        nb.insert(r.begin(), r.end());
      }
      if (seen.insert({t, nb}).second) queue.push_back({t, nb});
    }
  }
  EXPECT_EQ(witnesses, 0u);
  EXPECT_GT(seen.size(), 100u);
}

TEST(JLegible, FourBlocksJ2UnderO1) {
  auto p = covert::testing::four_blocks();
  VariantConfig c;
  c.variant = Variant::j_legible;
  c.j = 2;
  c.subset = std::vector<std::size_t>{1};
  auto r = plan_j_legible(p.domain, p.model, p.spec.initial, p.spec.goals, c);
  auto rep = oracle::verify_j_legible(p.domain, p.model, p.spec.initial, p.spec.goals, r.plan, 2);
  EXPECT_TRUE(rep.pass()) << rep.reason;
  EXPECT_EQ(rep.absent_goals, std::vector<std::size_t>{2});
}

TEST(JLegible, JEqualsNIsAnyPlan) {
  auto p = covert::testing::four_blocks();
  VariantConfig c;
  c.j = 3;
  auto r = plan_j_legible(p.domain, p.model, p.spec.initial, p.spec.goals, c);
  EXPECT_EQ(r.plan.size(), 6u);
}

TEST(JLegible, IndistinguishableDecoy) {
  auto d = toy_domain({"g", "h"}, {{"a", {}, {"g"}, {}}, {"b", {}, {"h"}, {}}});
  auto m = constant_model(d);
  CandidateGoalSet goals{GoalCondition{d.make_set({"g"})}, {GoalCondition{d.make_set({"h"})}}};
  VariantConfig c;
  c.j = 1;
  EXPECT_THROW(plan_j_legible(d, m, d.make_set({}), goals, c), NoJLegiblePlan);
}

TEST(LDiverse, SameTokenToySolvedAtDepthOne) {
  auto d = toy_domain({"g", "p", "q"}, {{"a1", {}, {"g", "p"}, {}}, {"a2", {}, {"g", "q"}, {}}});
  auto m = constant_model(d);
  GoalCondition g{d.make_set({"g"})};
  VariantConfig c;
  c.variant = Variant::l_diverse;
  c.l = 2;
  c.d = Rational(1);
  auto r = plan_l_diverse(d, m, d.make_set({}), g, c);
  EXPECT_EQ(r.plan.size(), 1u);
  ASSERT_TRUE(r.plan_set);
  EXPECT_EQ(r.plan_set->size(), 2u);
}

TEST(LDiverse, OneToOneModelCannotDiversify) {
  auto p = covert::testing::four_blocks();
  auto m = one_to_one_model(p.domain);
  VariantConfig c;
  c.variant = Variant::l_diverse;
  c.l = 2;
  EXPECT_THROW(plan_l_diverse(p.domain, m, p.spec.initial, p.spec.goals.true_goal, c), NoLDiversePlan);
}

TEST(LDiverse, FourBlocksL2ActionDistance) {
  auto p = covert::testing::four_blocks();
  VariantConfig c;
  c.variant = Variant::l_diverse;
  c.l = 2;
  c.d = Rational(1, 4);
  auto r = plan_l_diverse(p.domain, p.model, p.spec.initial, p.spec.goals.true_goal, c);
  auto rep = oracle::verify_l_diverse(p.domain, p.model, p.spec.initial, p.spec.goals.true_goal, r.plan, 2,
                                      DistanceKind::action, Rational(1, 4));
  EXPECT_TRUE(rep.pass()) << rep.reason;
}

TEST(LDiverse, CostBoundIsReported) {
  auto p = covert::testing::four_blocks();
  VariantConfig c;
  c.variant = Variant::l_diverse;
  c.l = 2;
  c.cost_bound = Rational(3);
  try {
    plan_l_diverse(p.domain, p.model, p.spec.initial, p.spec.goals.true_goal, c);
    FAIL() << "expected NoLDiversePlan";
  } catch (const NoLDiversePlan& e) {
    EXPECT_NE(std::string(e.what()).find("cost-bound-exceeded"), std::string::npos);
  }
}

TEST(MSimilar, IdenticalEffectsAreTriviallySimilar) {
  auto d = toy_domain({"g"}, {{"a1", {}, {"g"}, {}}, {"a2", {}, {"g"}, {}}});
  auto m = constant_model(d);
  GoalCondition g{d.make_set({"g"})};
  VariantConfig c;
  c.variant = Variant::m_similar;
  c.m = 2;
  c.d = Rational(0);
  c.distance = DistanceKind::state_sequence;
  auto r = plan_m_similar(d, m, d.make_set({}), g, c);
  EXPECT_EQ(r.plan.size(), 1u);
  EXPECT_EQ(d_max(d, *r.plan_set, DistanceKind::state_sequence), Rational(0));
}

TEST(MSimilar, TooManyPlansRequested) {
  auto d = toy_domain({"g"}, {{"a1", {}, {"g"}, {}}, {"a2", {}, {"g"}, {}}});
  ObservationModel m(d, {"t1", "t2"}, {ObservationRule{0, "a1", d.empty_set()}, ObservationRule{1, "a2", d.empty_set()}},
                     "init");
  VariantConfig c;
  c.variant = Variant::m_similar;
  c.m = 3;
  EXPECT_THROW(plan_m_similar(d, m, d.make_set({}), GoalCondition{d.make_set({"g"})}, c), NoMSimilarPlan);
}

TEST(MSimilar, FourBlocksM3UnderO1) {
  auto p = covert::testing::four_blocks();
  VariantConfig c;
  c.variant = Variant::m_similar;
  c.m = 3;
  auto r = plan_m_similar(p.domain, p.model, p.spec.initial, p.spec.goals.true_goal, c);
  auto rep = oracle::verify_m_similar(p.domain, p.model, p.spec.initial, p.spec.goals.true_goal, r.plan, 3,
                                      DistanceKind::action, Rational(1, 2));
  EXPECT_TRUE(rep.pass()) << rep.reason;
}

TEST(Subsets, LexicographicEnumeration) {
  EXPECT_EQ(detail::decoy_subsets(4, 2),
            (std::vector<std::vector<std::size_t>>{{1, 2}, {1, 3}, {2, 3}}));
  EXPECT_EQ(detail::decoy_subsets(4, 0), (std::vector<std::vector<std::size_t>>{{}}));
  EXPECT_TRUE(detail::decoy_subsets(3, 3).empty());
}

TEST(Subsets, FarthestFirstAndExplicitSubset) {
  auto p = covert::testing::four_blocks();
  VariantConfig c;
  c.k = 2;
  c.subset_strategy = SubsetStrategy::farthest_first;
  auto r = plan_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, c);
  EXPECT_TRUE(oracle::verify_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, r.plan, 2).pass());
  // on-D-C (index 2) is farther from the start than on-B-C, which holds there.
  SetLevelCache cache(p.domain);
  auto subsets = detail::decoy_subsets(3, 1);
  detail::order_subsets(subsets, SubsetStrategy::farthest_first, cache, p.spec.initial, p.spec.goals, 100);
  EXPECT_EQ(subsets.front(), std::vector<std::size_t>{2});
  c.subset = std::vector<std::size_t>{2};
  r = plan_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, c);
  EXPECT_NE(std::find(r.satisfied_goals.begin(), r.satisfied_goals.end(), 2u), r.satisfied_goals.end());
  c.subset = std::vector<std::size_t>{0};
  EXPECT_THROW(plan_k_ambiguous(p.domain, p.model, p.spec.initial, p.spec.goals, c), BadParameter);
}

TEST(Solve, NoopsCompileAwayAndVerify) {
  auto p = covert::testing::four_blocks();
  VariantConfig c;
  c.k = 3;
  c.noops = true;
  Solution sol = solve(p.domain, p.model, p.spec.initial, p.spec.goals, c);
  CompiledModel compiled = compile_noops(p.domain, p.model);
  Plan plan = compiled.domain.make_plan(sol.steps);
  EXPECT_TRUE(oracle::verify_k_ambiguous(compiled.domain, compiled.model, p.spec.initial, p.spec.goals, plan, 3).pass());
  EXPECT_EQ(sol.record().variant, "kamb");
}

TEST(Solve, DeterministicAcrossRuns) {
  auto p = covert::testing::four_blocks();
  for (Variant v : {Variant::k_ambiguous, Variant::j_legible, Variant::l_diverse, Variant::m_similar}) {
    VariantConfig c;
    c.variant = v;
    c.k = 3;
    c.j = 2;
    c.l = 2;
    auto a = solve(p.domain, p.model, p.spec.initial, p.spec.goals, c);
    auto b = solve(p.domain, p.model, p.spec.initial, p.spec.goals, c);
    EXPECT_EQ(a.steps, b.steps) << to_string(v);
  }
}

// Every plan the planner returns passes the matching oracle check, and
// k/j results stay valid for every weaker parameter.
TEST(Soundness, RandomInstancesAgreeWithOracle) {
  std::mt19937_64 rng(31337);
  std::map<std::string, int> solved;
  for (int trial = 0; trial < 150; ++trial) {
    auto inst = covert::testing::random_instance(rng, 6, 6);
    const auto& d = inst.domain;
    auto reach = covert::testing::reachable_states(d, inst.s0);
    if (reach.size() < 3) continue;
    CandidateGoalSet goals;
    std::set<FluentSet> used;
    for (int i = 0; i < 3; ++i) {
      const State& s = reach[rng() % reach.size()];
      GoalCondition g{d.empty_set()};
      for (FluentId f : s.ids())
        if (rng() % 2) g.literals.insert(f);
      if (g.literals.empty() || !used.insert(g.literals).second) continue;
      if (i == 0) goals.true_goal = g;
      else goals.others.push_back(g);
    }
    if (goals.true_goal.literals.universe() == 0 || goals.others.empty()) continue;
    const int n = static_cast<int>(goals.size());
    VariantConfig c;
    c.k = n;
    c.j = 1;
    c.l = 2;
    c.m = 2;
    c.exact_plan_set_cap = 1u << 20;
    try {
      auto r = plan_k_ambiguous(d, inst.model, inst.s0, goals, c);
      for (int k = 1; k <= n; ++k)
        ASSERT_TRUE(oracle::verify_k_ambiguous(d, inst.model, inst.s0, goals, r.plan, k).pass());
      ++solved["kamb"];
    } catch (const NoKAmbiguousPlan&) {
    }
    try {
      auto r = plan_j_legible(d, inst.model, inst.s0, goals, c);
      for (int j = 1; j <= n; ++j)
        ASSERT_TRUE(oracle::verify_j_legible(d, inst.model, inst.s0, goals, r.plan, j).pass());
      ++solved["jleg"];
    } catch (const NoJLegiblePlan&) {
    }
    for (DistanceKind kind : {DistanceKind::action, DistanceKind::causal_link, DistanceKind::state_sequence}) {
      c.distance = kind;
      try {
        auto r = plan_l_diverse(d, inst.model, inst.s0, goals.true_goal, c);
        auto rep = oracle::verify_l_diverse(d, inst.model, inst.s0, goals.true_goal, r.plan, 2, kind, c.threshold());
        ASSERT_TRUE(rep.pass()) << rep.reason;
        ++solved["ldiv"];
      } catch (const NoLDiversePlan&) {
      }
      c.variant = Variant::m_similar;
      try {
        auto r = plan_m_similar(d, inst.model, inst.s0, goals.true_goal, c);
        auto rep = oracle::verify_m_similar(d, inst.model, inst.s0, goals.true_goal, r.plan, 2, kind, c.threshold());
        ASSERT_TRUE(rep.pass()) << rep.reason;
        ++solved["msim"];
      } catch (const NoMSimilarPlan&) {
      }
      c.variant = Variant::k_ambiguous;
    }
  }
  for (const char* v : {"kamb", "jleg", "ldiv", "msim"}) EXPECT_GT(solved[v], 5) << v;
}
