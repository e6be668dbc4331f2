#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fara {

/// Position of an item inside its query's canonical (file) order.
using ItemIndex = std::size_t;

/// One served ranking, best rank first.
using Ranklist = std::vector<ItemIndex>;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input violates a documented domain constraint (grade range, sizes, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Internal state would break an invariant (duplicate ranklist entry, ...).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fara
