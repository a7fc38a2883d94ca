#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dldl {

/// Argument violates an operation's precondition (shape, sign, range).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Label grid span is not an integral multiple of the step.
class DegenerateGrid : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

/// Log of an exact zero where the target has mass, non-finite loss, etc.
class NumericalDomain : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Statistic undefined on the input (e.g. zero variance).
class DegenerateInput : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

/// Occlusion baseline has zero error, so relative loss is undefined.
class DegenerateBaseline : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string &what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace dldl
