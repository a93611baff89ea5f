#pragma once

#include <stdexcept>
#include <string>

namespace hopex {

// Base class for all library errors so callers can catch one type at the CLI
// boundary and map it to an exit code.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A split plan's parts do not sum back to the source entry.
struct InconsistentPlan : Error {
  using Error::Error;
};

// Merging produced an entry above 1, so the result is not a pseudo-distribution.
struct OverflowedEntry : Error {
  using Error::Error;
};

// A vertex carries mass but belongs to no mixer.
struct UncoveredVertex : Error {
  using Error::Error;
};

// Path enumeration would exceed its budget; shrink the instance or raise it.
struct PathBudgetExceeded : Error {
  using Error::Error;
};

// The greedy cover construction needed more clusterings than allowed.
struct CoverInfeasible : Error {
  using Error::Error;
};

// A documented precondition of an operation does not hold for the inputs.
struct PreconditionViolated : Error {
  using Error::Error;
};

// The certify-or-cut loop ran out of cut budget before certification.
struct BudgetExhausted : Error {
  using Error::Error;
};

// Derived game parameters violate their consistency constraints.
struct InconsistentOverride : Error {
  using Error::Error;
};

// A matching batch is not a union of bijections on the presented cuts.
struct DegreeViolation : Error {
  using Error::Error;
};

// The matching player failed to produce a valid matching for a cut.
struct PlayerRefused : Error {
  using Error::Error;
};

// A cut strategy stopped before the reduction reached a verdict.
struct StrategyExhausted : Error {
  using Error::Error;
};

}  // namespace hopex
