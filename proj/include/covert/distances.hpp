#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "covert/belief.hpp"
#include "covert/errors.hpp"
#include "covert/model_io.hpp"
#include "covert/rational.hpp"
#include "covert/strips.hpp"

namespace covert {

inline constexpr std::int64_t kInitProducer = -1;

// (producer, fluent, consumer); producer kInitProducer is the virtual
// action that establishes the start state.
struct CausalLink {
  std::int64_t producer;
  FluentId fluent;
  ActionId consumer;

  friend auto operator<=>(const CausalLink&, const CausalLink&) = default;
};

namespace detail {

template <typename T>
Rational jaccard_distance(const std::vector<T>& a, const std::vector<T>& b) {
  std::size_t common = 0;
  for (auto i = a.begin(), j = b.begin(); i != a.end() && j != b.end();) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else {
      ++common;
      ++i;
      ++j;
    }
  }
  std::size_t total = a.size() + b.size() - common;
  if (total == 0) throw UndefinedDistance("distance between two empty sets");
  return Rational(1) - Rational(static_cast<std::int64_t>(common), static_cast<std::int64_t>(total));
}

template <typename T>
std::vector<T> sorted_unique(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace detail

// Links of a linear plan: each precondition is supported by the latest
// earlier step adding it, else by the start state.
inline std::vector<CausalLink> causal_links(const GroundedDomain& domain, const Trajectory& t) {
  std::vector<CausalLink> links;
  std::vector<std::int64_t> producer(domain.num_fluents(), kInitProducer);
  for (std::size_t i = 0; i < t.actions.size(); ++i) {
    const auto& a = domain.action(t.actions[i]);
    for (FluentId f : a.pre.ids()) links.push_back({producer[f], f, t.actions[i]});
    for (FluentId f : a.add.ids()) producer[f] = t.actions[i];
  }
  return detail::sorted_unique(std::move(links));
}

inline Trajectory trajectory_of(const GroundedDomain& domain, const State& s0, const Plan& plan) {
  return Trajectory{plan.steps, state_sequence(domain, s0, plan)};
}

inline std::vector<CausalLink> causal_links(const GroundedDomain& domain, const State& s0, const Plan& plan) {
  return causal_links(domain, trajectory_of(domain, s0, plan));
}

inline Rational state_distance(const State& a, const State& b) {
  std::size_t u = a.union_size(b);
  if (u == 0) return Rational(0);
  return Rational(1) - Rational(static_cast<std::int64_t>(a.intersection_size(b)), static_cast<std::int64_t>(u));
}

// Everything the three measures need from one plan, computed once.
struct DistanceProfile {
  std::vector<ActionId> actions;   // unique
  std::vector<CausalLink> links;   // unique
  std::vector<State> states;       // states after each step (start excluded)
};

inline DistanceProfile make_profile(const GroundedDomain& domain, const Trajectory& t) {
  DistanceProfile p;
  p.actions = detail::sorted_unique(t.actions);
  p.links = causal_links(domain, t);
  p.states.assign(t.states.begin() + (t.states.empty() ? 0 : 1), t.states.end());
  return p;
}

inline Rational action_distance(const DistanceProfile& a, const DistanceProfile& b) {
  return detail::jaccard_distance(a.actions, b.actions);
}

inline Rational causal_link_distance(const DistanceProfile& a, const DistanceProfile& b) {
  return detail::jaccard_distance(a.links, b.links);
}

// Positions beyond the shorter sequence count as maximally distant.
inline Rational state_sequence_distance(const DistanceProfile& a, const DistanceProfile& b) {
  const auto& longer = a.states.size() >= b.states.size() ? a.states : b.states;
  const auto& shorter = a.states.size() >= b.states.size() ? b.states : a.states;
  const auto n = static_cast<std::int64_t>(longer.size());
  const auto n2 = static_cast<std::int64_t>(shorter.size());
  if (n == 0) return Rational(0);
  Rational sum(n - n2);
  for (std::size_t k = 0; k < shorter.size(); ++k) sum += state_distance(longer[k], shorter[k]);
  return sum / n;
}

inline Rational distance(DistanceKind kind, const DistanceProfile& a, const DistanceProfile& b) {
  switch (kind) {
    case DistanceKind::action: return action_distance(a, b);
    case DistanceKind::causal_link: return causal_link_distance(a, b);
    case DistanceKind::state_sequence: return state_sequence_distance(a, b);
  }
  throw std::logic_error("unknown distance kind");
}

inline Rational action_distance(const Plan& p1, const Plan& p2) {
  return detail::jaccard_distance(detail::sorted_unique(p1.steps), detail::sorted_unique(p2.steps));
}

inline Rational causal_link_distance(const GroundedDomain& domain, const State& s0, const Plan& p1, const Plan& p2) {
  return detail::jaccard_distance(causal_links(domain, s0, p1), causal_links(domain, s0, p2));
}

inline Rational state_sequence_distance(const GroundedDomain& domain, const State& s0, const Plan& p1,
                                        const Plan& p2) {
  return state_sequence_distance(make_profile(domain, trajectory_of(domain, s0, p1)),
                                 make_profile(domain, trajectory_of(domain, s0, p2)));
}

inline Rational distance(DistanceKind kind, const GroundedDomain& domain, const State& s0, const Plan& p1,
                         const Plan& p2) {
  return distance(kind, make_profile(domain, trajectory_of(domain, s0, p1)),
                  make_profile(domain, trajectory_of(domain, s0, p2)));
}

namespace detail {

// Pairs on which a measure is undefined (both plans empty under it) are
// indistinguishable and count as distance 0.
inline Rational pair_distance(DistanceKind kind, const DistanceProfile& a, const DistanceProfile& b) {
  try {
    return distance(kind, a, b);
  } catch (const UndefinedDistance&) {
    return Rational(0);
  }
}

template <typename Better>
Rational extreme_pair(DistanceKind kind, std::span<const DistanceProfile> plans, Better better) {
  if (plans.size() < 2) throw SingletonSet("need at least two plans, got " + std::to_string(plans.size()));
  Rational best = pair_distance(kind, plans[0], plans[1]);
  for (std::size_t i = 0; i < plans.size(); ++i)
    for (std::size_t j = i + 1; j < plans.size(); ++j) {
      if (i == 0 && j == 1) continue;
      Rational d = pair_distance(kind, plans[i], plans[j]);
      if (better(d, best)) best = d;
    }
  return best;
}

}  // namespace detail

inline Rational d_min(DistanceKind kind, std::span<const DistanceProfile> plans) {
  return detail::extreme_pair(kind, plans, std::less<Rational>{});
}

inline Rational d_max(DistanceKind kind, std::span<const DistanceProfile> plans) {
  return detail::extreme_pair(kind, plans, std::greater<Rational>{});
}

inline std::vector<DistanceProfile> profiles(const GroundedDomain& domain, const BeliefPlanSet& bps) {
  std::vector<DistanceProfile> out;
  out.reserve(bps.size());
  for (std::size_t i = 0; i < bps.size(); ++i) out.push_back(make_profile(domain, bps.trajectory(i)));
  return out;
}

inline Rational d_min(const GroundedDomain& domain, const BeliefPlanSet& bps, DistanceKind kind) {
  return d_min(kind, profiles(domain, bps));
}

inline Rational d_max(const GroundedDomain& domain, const BeliefPlanSet& bps, DistanceKind kind) {
  return d_max(kind, profiles(domain, bps));
}

}  // namespace covert
