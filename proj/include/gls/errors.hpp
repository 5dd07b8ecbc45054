#pragma once

#include <stdexcept>
#include <string>

namespace gls {

// Violated operation precondition (caller error), reported distinctly from
// a negative search result.
class precondition_error : public std::invalid_argument {
 public:
  explicit precondition_error(const std::string& what) : std::invalid_argument(what) {}
};

// Enumeration or memory budget exceeded.
class budget_error : public std::runtime_error {
 public:
  explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gls
