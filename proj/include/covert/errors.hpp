#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace covert {

// Base for every error raised by the library. `code()` is a stable
// machine-readable name used by the CLI when reporting failures.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define COVERT_DEFINE_ERROR(Name, Base)                                   \
  class Name : public Base {                                              \
   public:                                                                \
    explicit Name(const std::string& what) : Base(#Name, what) {}         \
                                                                          \
   protected:                                                             \
    Name(std::string code, const std::string& what)                       \
        : Base(std::move(code), what) {}                                  \
  };

// Malformed or inconsistent input files and parameters. The CLI maps this
// family to exit code 1.
COVERT_DEFINE_ERROR(InputError, Error)
COVERT_DEFINE_ERROR(UnsupportedFeature, InputError)
COVERT_DEFINE_ERROR(DuplicateAction, InputError)
COVERT_DEFINE_ERROR(UnknownFluent, InputError)
COVERT_DEFINE_ERROR(UnknownAction, InputError)
COVERT_DEFINE_ERROR(BadParameter, InputError)
COVERT_DEFINE_ERROR(NameCollision, InputError)

class ParseError : public InputError {
 public:
  ParseError(const std::string& message, std::size_t line = 0, std::size_t column = 0)
      : InputError("ParseError", format(message, line, column)),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& message, std::size_t line, std::size_t column) {
    if (line == 0) return message;
    return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  }
  std::size_t line_;
  std::size_t column_;
};

class InapplicableAction : public Error {
 public:
  InapplicableAction(const std::string& action, std::size_t step)
      : Error("InapplicableAction",
              "action '" + action + "' at step " + std::to_string(step) +
                  " is not applicable"),
        action_(action),
        step_(step) {}
  const std::string& action() const noexcept { return action_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::string action_;
  std::size_t step_;
};

// The observation model or belief machinery hit a state it cannot handle.
COVERT_DEFINE_ERROR(NoMatchingRule, Error)
COVERT_DEFINE_ERROR(EmptyBelief, Error)
COVERT_DEFINE_ERROR(BeliefOverflow, Error)
COVERT_DEFINE_ERROR(UndefinedDistance, Error)
COVERT_DEFINE_ERROR(SingletonSet, Error)
COVERT_DEFINE_ERROR(EnumerationBudgetExceeded, Error)

// Search ended without a plan. The CLI maps this family to exit code 2.
COVERT_DEFINE_ERROR(NoPlan, Error)
COVERT_DEFINE_ERROR(Exhausted, NoPlan)
COVERT_DEFINE_ERROR(CostBoundExceeded, NoPlan)
COVERT_DEFINE_ERROR(SearchTimeout, NoPlan)
COVERT_DEFINE_ERROR(NoKAmbiguousPlan, NoPlan)
COVERT_DEFINE_ERROR(NoJLegiblePlan, NoPlan)
COVERT_DEFINE_ERROR(NoLDiversePlan, NoPlan)
COVERT_DEFINE_ERROR(NoMSimilarPlan, NoPlan)
COVERT_DEFINE_ERROR(NoClassicalPlan, NoPlan)

#undef COVERT_DEFINE_ERROR

}  // namespace covert
