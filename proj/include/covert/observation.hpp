#pragma once

#include <fnmatch.h>

#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "covert/errors.hpp"
#include "covert/model_io.hpp"
#include "covert/strips.hpp"

namespace covert {

using TokenId = std::uint32_t;

struct ObservationRule {
  TokenId token;
  std::string action_pattern;  // glob, '*' matches any run of characters
  FluentSet when;              // tested against the state reached by the action
};

// Deterministic many-to-one observation function over (action, next state)
// pairs, realized as an ordered rule list with first-match semantics. The
// model is bound to one domain: rule globs are resolved per action up front.
class ObservationModel {
 public:
  ObservationModel() = default;

  ObservationModel(const GroundedDomain& domain, std::vector<std::string> alphabet,
                   std::vector<ObservationRule> rules, std::string initial_token)
      : alphabet_(std::move(alphabet)), rules_(std::move(rules)), initial_token_(std::move(initial_token)) {
    for (std::size_t i = 0; i < alphabet_.size(); ++i)
      if (!token_index_.emplace(alphabet_[i], static_cast<TokenId>(i)).second)
        throw InputError("duplicate observation token '" + alphabet_[i] + "'");
    for (const auto& r : rules_)
      if (r.token >= alphabet_.size()) throw InputError("rule refers to an undeclared token");
    action_names_.reserve(domain.num_actions());
    candidates_.resize(domain.num_actions());
    for (ActionId a = 0; a < domain.num_actions(); ++a) {
      action_names_.push_back(domain.action(a).name);
      for (std::size_t r = 0; r < rules_.size(); ++r)
        if (glob_match(rules_[r].action_pattern, action_names_.back()))
          candidates_[a].push_back(static_cast<std::uint32_t>(r));
    }
    fluent_names_ = domain.fluents();
  }

  const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
  const std::vector<ObservationRule>& rules() const noexcept { return rules_; }
  const std::string& initial_token() const noexcept { return initial_token_; }
  const std::string& token_name(TokenId t) const { return alphabet_.at(t); }
  std::size_t num_actions() const noexcept { return candidates_.size(); }

  std::optional<TokenId> find_token(std::string_view name) const {
    auto it = token_index_.find(std::string(name));
    if (it == token_index_.end()) return std::nullopt;
    return it->second;
  }

  // Token of the first rule whose pattern matches the action and whose
  // `when` literals hold in `next`.
  TokenId observe(ActionId action, const State& next) const {
    for (std::uint32_t r : candidates_.at(action))
      if (rules_[r].when.is_subset_of(next)) return rules_[r].token;
    std::ostringstream msg;
    msg << "no observation rule matches action '" << action_names_[action] << "' reaching {";
    bool first = true;
    for (FluentId f : next.ids()) {
      msg << (first ? "" : ", ") << fluent_names_.at(f);
      first = false;
    }
    msg << "}";
    throw NoMatchingRule(msg.str());
  }

  static bool glob_match(const std::string& pattern, const std::string& name) {
    return ::fnmatch(pattern.c_str(), name.c_str(), 0) == 0;
  }

 private:
  std::vector<std::string> alphabet_;
  std::unordered_map<std::string, TokenId> token_index_;
  std::vector<ObservationRule> rules_;
  std::string initial_token_;
  std::vector<std::vector<std::uint32_t>> candidates_;
  std::vector<std::string> action_names_;
  std::vector<std::string> fluent_names_;
};

inline TokenId observe(const ObservationModel& model, ActionId action, const State& next) {
  return model.observe(action, next);
}

// Line-oriented rule file:
//   obs <token> [<token> ...]
//   init-obs <token>
//   rule <token> action=<glob> [when <lit>,<lit>...]
// Rules are kept in file order; '#' starts a comment.
inline ObservationModel parse_observation_model(std::string_view text, const GroundedDomain& domain) {
  std::vector<std::string> alphabet;
  std::unordered_map<std::string, TokenId> index;
  std::vector<ObservationRule> rules;
  std::string initial = "init";
  bool have_initial = false;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::string directive;
    if (!(words >> directive)) continue;
    if (directive == "obs") {
      std::string token;
      bool any = false;
      while (words >> token) {
        any = true;
        if (index.contains(token)) throw ParseError("duplicate token '" + token + "'", line_no, 1);
        index.emplace(token, static_cast<TokenId>(alphabet.size()));
        alphabet.push_back(token);
      }
      if (!any) throw ParseError("'obs' needs at least one token", line_no, 1);
    } else if (directive == "init-obs") {
      if (have_initial) throw ParseError("duplicate 'init-obs'", line_no, 1);
      if (!(words >> initial)) throw ParseError("'init-obs' needs a token", line_no, 1);
      have_initial = true;
    } else if (directive == "rule") {
      std::string token, action;
      if (!(words >> token >> action)) throw ParseError("expected 'rule <token> action=<glob>'", line_no, 1);
      auto it = index.find(token);
      if (it == index.end()) throw ParseError("rule uses undeclared token '" + token + "'", line_no, 1);
      if (action.rfind("action=", 0) != 0 || action.size() == 7)
        throw ParseError("expected 'action=<glob>' after the token", line_no, 1);
      ObservationRule rule{it->second, action.substr(7), domain.empty_set()};
      std::string keyword;
      if (words >> keyword) {
        if (keyword != "when") throw ParseError("expected 'when' before rule literals", line_no, 1);
        std::string rest, chunk;
        while (words >> chunk) rest += chunk + " ";
        auto lits = detail::split_literals(rest);
        if (lits.empty()) throw ParseError("'when' needs at least one literal", line_no, 1);
        for (const auto& lit : lits) rule.when.insert(domain.fluent_id(lit));
      }
      rules.push_back(std::move(rule));
    } else {
      throw ParseError("unknown directive '" + directive + "'", line_no, 1);
    }
  }
  return ObservationModel(domain, std::move(alphabet), std::move(rules), std::move(initial));
}

// Observation tokens emitted along a plan; the initial token is not included.
inline std::vector<TokenId> trace(const ObservationModel& model, const GroundedDomain& domain, const State& s0,
                                  const Plan& plan) {
  std::vector<TokenId> tokens;
  tokens.reserve(plan.size());
  State s = s0;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& a = domain.action(plan.steps[i]);
    if (!applicable(s, a)) throw InapplicableAction(a.name, i);
    s = successor(s, a);
    tokens.push_back(model.observe(plan.steps[i], s));
  }
  return tokens;
}

inline std::vector<std::string> token_names(const ObservationModel& model, const std::vector<TokenId>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (TokenId t : tokens) out.push_back(model.token_name(t));
  return out;
}

namespace detail {

inline std::string escape_glob(std::string_view name) {
  std::string pattern;
  for (char c : name) {
    if (c == '*' || c == '?' || c == '[' || c == '\\') pattern += '\\';
    pattern += c;
  }
  return pattern;
}

}  // namespace detail

// Fully observable model: every action emits its own name.
inline ObservationModel one_to_one_model(const GroundedDomain& domain) {
  std::vector<std::string> alphabet;
  std::vector<ObservationRule> rules;
  for (ActionId a = 0; a < domain.num_actions(); ++a) {
    alphabet.push_back(domain.action(a).name);
    rules.push_back(ObservationRule{a, detail::escape_glob(domain.action(a).name), domain.empty_set()});
  }
  return ObservationModel(domain, std::move(alphabet), std::move(rules), "init");
}

struct CompiledModel {
  GroundedDomain domain;
  ObservationModel model;
};

inline constexpr std::string_view kPretendPrefix = "pretend-";

// Adds one zero-effect `pretend-<token>` action per token, each pinned to
// emit its token by a rule placed ahead of the existing ones.
inline CompiledModel compile_noops(const GroundedDomain& domain, const ObservationModel& model) {
  for (const auto& a : domain.actions())
    if (a.name.rfind(kPretendPrefix, 0) == 0)
      throw NameCollision("action '" + a.name + "' already uses the reserved prefix 'pretend-'");
  GroundedDomain extended = domain;
  std::vector<ObservationRule> rules;
  for (TokenId t = 0; t < model.alphabet().size(); ++t) {
    std::string name = std::string(kPretendPrefix) + model.alphabet()[t];
    extended.add_action(
        GroundedAction{name, domain.empty_set(), domain.empty_set(), domain.empty_set(), Rational{1}});
    rules.push_back(ObservationRule{t, detail::escape_glob(name), domain.empty_set()});
  }
  rules.insert(rules.end(), model.rules().begin(), model.rules().end());
  ObservationModel compiled(extended, model.alphabet(), std::move(rules), model.initial_token());
  return {std::move(extended), std::move(compiled)};
}

}  // namespace covert
