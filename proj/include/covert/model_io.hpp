#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "covert/errors.hpp"
#include "covert/rational.hpp"
#include "covert/sexpr.hpp"
#include "covert/strips.hpp"

namespace covert {

// ---------------------------------------------------------------------------
// Grounded PDDL domains
// ---------------------------------------------------------------------------

namespace detail {

using sexpr::Node;

// "(on A B)" and "(on-A-B)" both name the ground atom "on-A-B".
inline std::string atom_name(const Node& atom) {
  if (!atom.is_list || atom.children.empty()) sexpr::fail(atom, "expected an atom like (p a b)");
  std::string name;
  for (const auto& part : atom.children) {
    if (part.is_list) sexpr::fail(part, "nested list inside an atom");
    if (!part.atom.empty() && part.atom.front() == '?')
      throw UnsupportedFeature("lifted parameter '" + part.atom + "' at " + std::to_string(part.line) + ":" +
                               std::to_string(part.column) + "; only ground atoms are supported");
    if (!name.empty()) name += '-';
    name += part.atom;
  }
  return name;
}

inline bool is_connective(std::string_view head) {
  for (std::string_view c : {"or", "imply", "exists", "forall", "when", "=", "not", "and", "increase",
                             "decrease", "assign", "scale-up", "scale-down", "at", "over"})
    if (Node::iequals(head, c)) return true;
  return false;
}

[[noreturn]] inline void unsupported(const Node& at, const std::string& what) {
  throw UnsupportedFeature(what + " at " + std::to_string(at.line) + ":" + std::to_string(at.column) +
                           " is outside the STRIPS fragment");
}

inline FluentId declared(const GroundedDomain& domain, const Node& atom) {
  std::string name = atom_name(atom);
  if (auto id = domain.find_fluent(name)) return *id;
  sexpr::fail(atom, "undeclared predicate '" + name + "'");
}

inline void parse_precondition(const GroundedDomain& domain, const Node& expr, FluentSet& pre) {
  if (!expr.is_list) sexpr::fail(expr, "expected a precondition list");
  std::string_view head = expr.head();
  if (Node::iequals(head, "and")) {
    for (std::size_t i = 1; i < expr.children.size(); ++i) parse_precondition(domain, expr.children[i], pre);
    return;
  }
  if (Node::iequals(head, "not")) unsupported(expr, "negative precondition");
  if (is_connective(head)) unsupported(expr, "'" + std::string(head) + "' in a precondition");
  pre.insert(declared(domain, expr));
}

inline void parse_effect(const GroundedDomain& domain, const Node& expr, GroundedAction& action, bool& cost_seen,
                         std::size_t& literal_count) {
  if (!expr.is_list) sexpr::fail(expr, "expected an effect list");
  std::string_view head = expr.head();
  if (Node::iequals(head, "and")) {
    for (std::size_t i = 1; i < expr.children.size(); ++i)
      parse_effect(domain, expr.children[i], action, cost_seen, literal_count);
    return;
  }
  if (Node::iequals(head, "not")) {
    if (expr.children.size() != 2) sexpr::fail(expr, "'not' takes exactly one atom");
    const Node& inner = expr.children[1];
    if (inner.is_list && is_connective(inner.head())) unsupported(inner, "complex negated effect");
    action.del.insert(declared(domain, inner));
    ++literal_count;
    return;
  }
  if (Node::iequals(head, "increase")) {
    if (expr.children.size() != 3 || !expr.children[1].is_list || expr.children[1].head() != "total-cost" ||
        expr.children[2].is_list)
      unsupported(expr, "numeric effect other than (increase (total-cost) <number>)");
    if (cost_seen) sexpr::fail(expr, "duplicate cost effect");
    cost_seen = true;
    Rational cost = parse_rational(expr.children[2].atom);
    if (cost < 0) sexpr::fail(expr.children[2], "action cost must be non-negative");
    action.cost = cost;
    ++literal_count;
    return;
  }
  if (is_connective(head)) unsupported(expr, "'" + std::string(head) + "' in an effect");
  action.add.insert(declared(domain, expr));
  ++literal_count;
}

inline void parse_action(GroundedDomain& domain, const Node& block) {
  if (block.children.size() < 2 || block.children[1].is_list) sexpr::fail(block, ":action needs a name");
  GroundedAction action{block.children[1].atom, domain.empty_set(), domain.empty_set(), domain.empty_set(), Rational{1}};
  bool have_effect = false;
  for (std::size_t i = 2; i < block.children.size(); i += 2) {
    const Node& key = block.children[i];
    if (key.is_list || i + 1 >= block.children.size()) sexpr::fail(key, "expected ':keyword value' pairs in action");
    const Node& value = block.children[i + 1];
    if (key.is_atom(":parameters")) {
      if (!value.is_list) sexpr::fail(value, ":parameters expects a list");
      if (!value.children.empty()) unsupported(value, "action parameters (lifted action)");
    } else if (key.is_atom(":precondition")) {
      parse_precondition(domain, value, action.pre);
    } else if (key.is_atom(":effect")) {
      bool cost_seen = false;
      std::size_t literals = 0;
      parse_effect(domain, value, action, cost_seen, literals);
      if (literals == 0) sexpr::fail(value, "empty effect in action '" + action.name + "'");
      have_effect = true;
    } else {
      unsupported(key, "action key '" + key.atom + "'");
    }
  }
  if (!have_effect) sexpr::fail(block, "action '" + action.name + "' has no :effect");
  if (domain.find_action(action.name)) throw DuplicateAction("duplicate action '" + action.name + "'");
  domain.add_action(std::move(action));
}

}  // namespace detail

// Parses the grounded STRIPS subset of PDDL (with action costs). The
// returned domain has an empty initial state; problems supply it.
inline GroundedDomain parse_domain(std::string_view text) {
  using detail::Node;
  Node root = sexpr::parse(text);
  if (!root.is_list || !Node::iequals(root.head(), "define")) sexpr::fail(root, "expected (define ...)");
  GroundedDomain domain;
  bool have_predicates = false;
  for (std::size_t i = 1; i < root.children.size(); ++i) {
    const Node& section = root.children[i];
    if (!section.is_list || section.children.empty()) sexpr::fail(section, "expected a section list");
    std::string_view head = section.head();
    if (Node::iequals(head, "domain")) {
      if (section.children.size() != 2 || section.children[1].is_list) sexpr::fail(section, "bad domain name");
      domain.name = section.children[1].atom;
    } else if (Node::iequals(head, ":requirements")) {
      for (std::size_t r = 1; r < section.children.size(); ++r) {
        const Node& req = section.children[r];
        if (!(req.is_atom(":strips") || req.is_atom(":action-costs") || req.is_atom(":typing")))
          detail::unsupported(req, "requirement '" + req.atom + "'");
      }
    } else if (Node::iequals(head, ":types") || Node::iequals(head, ":constants")) {
      // Irrelevant once everything is ground.
    } else if (Node::iequals(head, ":predicates")) {
      if (have_predicates) sexpr::fail(section, "duplicate :predicates section");
      have_predicates = true;
      for (std::size_t p = 1; p < section.children.size(); ++p) {
        std::string name = detail::atom_name(section.children[p]);
        if (domain.find_fluent(name)) sexpr::fail(section.children[p], "duplicate predicate '" + name + "'");
        domain.add_fluent(name);
      }
    } else if (Node::iequals(head, ":functions")) {
      for (std::size_t f = 1; f < section.children.size(); ++f) {
        const Node& fn = section.children[f];
        if (fn.is_atom("-") || fn.is_atom("number")) continue;
        if (!fn.is_list || fn.head() != "total-cost" || fn.children.size() != 1)
          detail::unsupported(fn, "numeric function");
      }
    } else if (Node::iequals(head, ":action")) {
      detail::parse_action(domain, section);
    } else {
      detail::unsupported(section, "section '" + std::string(head) + "'");
    }
  }
  return domain;
}

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

enum class Variant { classical, k_ambiguous, j_legible, l_diverse, m_similar };
enum class DistanceKind { action, causal_link, state_sequence };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::classical: return "classical";
    case Variant::k_ambiguous: return "kamb";
    case Variant::j_legible: return "jleg";
    case Variant::l_diverse: return "ldiv";
    case Variant::m_similar: return "msim";
  }
  return "?";
}

inline Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::classical, Variant::k_ambiguous, Variant::j_legible, Variant::l_diverse,
                    Variant::m_similar})
    if (to_string(v) == name) return v;
  throw BadParameter("unknown variant '" + std::string(name) + "' (expected kamb, jleg, ldiv, msim or classical)");
}

inline std::string_view to_string(DistanceKind d) {
  switch (d) {
    case DistanceKind::action: return "action";
    case DistanceKind::causal_link: return "causal";
    case DistanceKind::state_sequence: return "state";
  }
  return "?";
}

inline DistanceKind parse_distance_kind(std::string_view name) {
  for (DistanceKind d : {DistanceKind::action, DistanceKind::causal_link, DistanceKind::state_sequence})
    if (to_string(d) == name) return d;
  throw BadParameter("unknown distance '" + std::string(name) + "' (expected action, causal or state)");
}

// Variant parameters. Unset values fall back to the defaults below.
struct VariantParameters {
  std::optional<Variant> variant;
  std::optional<int> k, j, l, m;
  std::optional<Rational> d;
  std::optional<DistanceKind> distance;
  std::optional<Rational> cost_bound;

  static constexpr int kDefaultK = 5;
  static constexpr int kDefaultJ = 3;
  static constexpr int kDefaultL = 3;
  static constexpr int kDefaultM = 3;

  int k_or_default() const { return k.value_or(kDefaultK); }
  int j_or_default() const { return j.value_or(kDefaultJ); }
  int l_or_default() const { return l.value_or(kDefaultL); }
  int m_or_default() const { return m.value_or(kDefaultM); }
  DistanceKind distance_or_default() const { return distance.value_or(DistanceKind::action); }
  Rational d_or_default(Variant v) const {
    if (d) return *d;
    return v == Variant::m_similar ? Rational(1, 2) : Rational(1, 4);
  }

  // Values set in `overrides` win.
  void merge(const VariantParameters& overrides) {
    if (overrides.variant) variant = overrides.variant;
    if (overrides.k) k = overrides.k;
    if (overrides.j) j = overrides.j;
    if (overrides.l) l = overrides.l;
    if (overrides.m) m = overrides.m;
    if (overrides.d) d = overrides.d;
    if (overrides.distance) distance = overrides.distance;
    if (overrides.cost_bound) cost_bound = overrides.cost_bound;
  }

  // Checks every explicitly set value against the goal count n.
  void validate(std::size_t n) const {
    auto in_range = [&](const char* key, const std::optional<int>& v) {
      if (v && (*v < 1 || static_cast<std::size_t>(*v) > n))
        throw BadParameter(std::string(key) + " = " + std::to_string(*v) + " must lie in [1, " +
                           std::to_string(n) + "]");
    };
    in_range("k", k);
    in_range("j", j);
    if (l && *l < 2) throw BadParameter("l must be at least 2");
    if (m && *m < 2) throw BadParameter("m must be at least 2");
    if (d && (*d < 0 || *d > 1)) throw BadParameter("d must lie in [0, 1]");
    if (cost_bound && *cost_bound <= 0) throw BadParameter("cost-bound must be positive");
  }
};

// Problem file contents before fluent names are resolved.
struct RawProblem {
  std::string domain_path;
  std::string observation_path;
  std::optional<std::vector<std::string>> init;
  std::optional<std::vector<std::string>> true_goal;
  std::vector<std::vector<std::string>> goals;
  VariantParameters parameters;
};

struct ProblemSpec {
  RawProblem raw;
  State initial;
  CandidateGoalSet goals;

  const VariantParameters& parameters() const noexcept { return raw.parameters; }
};

namespace detail {

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_literals(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline int parse_int_param(const std::string& key, const std::string& value, std::size_t line) {
  try {
    std::size_t used = 0;
    int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParseError("'" + key + "' expects an integer, got '" + value + "'", line, 1);
  }
}

}  // namespace detail

// Keyword/value problem format:
//   domain: <path>      obs: <path>
//   init: lit, lit ...  true-goal: lit ...  goal: lit ...   (goal repeats)
//   variant: kamb|jleg|ldiv|msim|classical
//   k: j: l: m: d: distance: cost-bound:
inline RawProblem parse_problem_text(std::string_view text) {
  RawProblem raw;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    auto colon = trimmed.find(':');
    if (colon == std::string::npos) throw ParseError("expected 'key: value'", line_no, 1);
    std::string key = detail::trim(std::string_view(trimmed).substr(0, colon));
    std::string value = detail::trim(std::string_view(trimmed).substr(colon + 1));
    if (key != "goal" && !seen.insert(key).second) throw ParseError("duplicate key '" + key + "'", line_no, 1);
    auto& p = raw.parameters;
    try {
      if (key == "domain") raw.domain_path = value;
      else if (key == "obs") raw.observation_path = value;
      else if (key == "init") raw.init = detail::split_literals(value);
      else if (key == "true-goal") raw.true_goal = detail::split_literals(value);
      else if (key == "goal") raw.goals.push_back(detail::split_literals(value));
      else if (key == "variant") p.variant = parse_variant(value);
      else if (key == "k") p.k = detail::parse_int_param(key, value, line_no);
      else if (key == "j") p.j = detail::parse_int_param(key, value, line_no);
      else if (key == "l") p.l = detail::parse_int_param(key, value, line_no);
      else if (key == "m") p.m = detail::parse_int_param(key, value, line_no);
      else if (key == "d") p.d = parse_rational(value);
      else if (key == "distance") p.distance = parse_distance_kind(value);
      else if (key == "cost-bound") p.cost_bound = parse_rational(value);
      else throw ParseError("unknown key '" + key + "'", line_no, 1);
    } catch (const BadParameter& e) {
      throw BadParameter("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!raw.init) throw ParseError("missing 'init:' section");
  if (!raw.true_goal) throw ParseError("missing 'true-goal:' section");
  return raw;
}

inline ProblemSpec resolve_problem(RawProblem raw, const GroundedDomain& domain) {
  ProblemSpec spec;
  spec.initial = domain.make_set(*raw.init);
  auto to_goal = [&](const std::vector<std::string>& lits, const char* what) {
    if (lits.empty()) throw BadParameter(std::string(what) + " must not be empty");
    return GoalCondition{domain.make_set(lits)};
  };
  spec.goals.true_goal = to_goal(*raw.true_goal, "true-goal");
  for (const auto& g : raw.goals) spec.goals.others.push_back(to_goal(g, "goal"));
  for (std::size_t a = 0; a < spec.goals.size(); ++a)
    for (std::size_t b = a + 1; b < spec.goals.size(); ++b)
      if (spec.goals[a] == spec.goals[b])
        throw BadParameter("candidate goals " + std::to_string(a) + " and " + std::to_string(b) + " are identical");
  raw.parameters.validate(spec.goals.size());
  spec.raw = std::move(raw);
  return spec;
}

inline ProblemSpec parse_problem(std::string_view text, const GroundedDomain& domain) {
  return resolve_problem(parse_problem_text(text), domain);
}

// ---------------------------------------------------------------------------
// Plan records and canonical text
// ---------------------------------------------------------------------------

// Canonical structured text: JSON with lexicographically sorted keys, two
// space indentation and a trailing newline.
inline std::string emit_canonical(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

struct PlanRecord {
  std::vector<std::string> steps;
  std::vector<std::string> trace;
  std::string variant;
  std::vector<std::size_t> achieved_goal_indices;
  std::map<std::string, double> metrics;

  friend bool operator==(const PlanRecord&, const PlanRecord&) = default;
};

inline nlohmann::json to_json(const PlanRecord& r) {
  nlohmann::json doc;
  doc["steps"] = r.steps;
  doc["trace"] = r.trace;
  doc["variant"] = r.variant;
  doc["achieved_goal_indices"] = r.achieved_goal_indices;
  doc["metrics"] = nlohmann::json::object();
  for (const auto& [k, v] : r.metrics) doc["metrics"][k] = v;
  return doc;
}

inline std::string emit_plan_record(const PlanRecord& r) { return emit_canonical(to_json(r)); }

inline PlanRecord parse_plan_record(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("plan record: ") + e.what());
  }
  PlanRecord r;
  try {
    if (!doc.is_object()) throw ParseError("plan record must be an object");
    r.steps = doc.at("steps").get<std::vector<std::string>>();
    r.trace = doc.at("trace").get<std::vector<std::string>>();
    r.variant = doc.at("variant").get<std::string>();
    r.achieved_goal_indices = doc.at("achieved_goal_indices").get<std::vector<std::size_t>>();
    for (const auto& [k, v] : doc.at("metrics").items()) r.metrics[k] = v.get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("plan record: ") + e.what());
  }
  if (r.trace.size() != r.steps.size()) throw ParseError("plan record: trace and steps differ in length");
  return r;
}

// Plain plan files: one action per line, optional surrounding parentheses,
// ';' comments (the format classical planners write).
inline std::vector<std::string> parse_plan_lines(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto c = line.find(';'); c != std::string::npos) line.erase(c);
    std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '(') {
      if (t.back() != ')') throw ParseError("unbalanced parentheses in plan line '" + t + "'");
      t = detail::trim(std::string_view(t).substr(1, t.size() - 2));
      auto words = detail::split_literals(t);
      t.clear();
      for (const auto& w : words) t += (t.empty() ? "" : "-") + w;
    }
    out.push_back(t);
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace covert
