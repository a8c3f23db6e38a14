#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spe {

/// Failure categories surfaced by every module. The HTTP layer and the CLI
/// map these onto status and exit codes.
enum class Errc {
  ParseError,
  SchemaError,
  InvalidModel,
  BudgetExceeded,
  MissingDemand,
  NoClientComponent,
  FrozenElement,
  BadProbabilities,
  UnknownElement,
  InvalidEdit,
  BackwardUnsupportedEdit,
  NothingToBatch,
  NoSuchOccurrence,
  UnknownNode,
  EmptyLedger,
  InvalidArgument,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Malformed document text; line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(Errc::ParseError, what + " (line " + std::to_string(line) + ", column " +
                                    std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed document that does not match a schema. `pointer` is a JSON
/// pointer to the offending value.
class SchemaError : public Error {
 public:
  SchemaError(std::string pointer, const std::string& what)
      : Error(Errc::SchemaError, (pointer.empty() ? std::string("/") : pointer) + ": " + what),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace spe
