#pragma once

#include <stdexcept>
#include <string>

namespace affdim {

/// Raised when an operation is called outside its mathematical domain
/// (empty word passed to the shift, unequal lengths to the metric, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a word enumeration would exceed the configured budget.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(unsigned long long requested, unsigned long long budget)
      : std::runtime_error("budget exceeded: " + std::to_string(requested) +
                           " words requested, budget is " + std::to_string(budget)),
        requested_(requested),
        budget_(budget) {}

  unsigned long long requested() const noexcept { return requested_; }
  unsigned long long budget() const noexcept { return budget_; }

 private:
  unsigned long long requested_;
  unsigned long long budget_;
};

class NumericallySingular : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed IFS document; the message carries the line or map index.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace affdim
