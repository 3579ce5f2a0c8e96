#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace weaves {

enum class ErrorCode {
  DuplicateModule,
  InvalidDefinition,
  UnknownModule,
  UnknownBead,
  EmptyWeave,
  UnknownWeave,
  UnknownSymbol,
  LateSharing,
  UnknownFunction,
  SignatureMismatch,
  UnknownEntry,
  UnknownString,
  AllBlocked,
  NotHolder,
  UnknownLock,
  MissingCheckpoint,
  DoubleFree,
  UnknownAddress,
  ScopeMidStep,
  StaleCheckpoint,
  UnknownCheckpoint,
  CorruptImage,
  NoLegalAction,
  NoFeasibleComposition,
  EmptyDatabase,
  InvalidSplit,
  UnknownChannel,
  NotClosed,
  MissingModule,
  RegionOverflow,
  NoConvergence,
  BudgetExceeded,
  StepUnderflow,
  ParseError,
  UnresolvedReference,
  UnknownQuery,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Config parse failure; line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& expected)
      : Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) +
                  ": expected " + expected),
        line_(line),
        column_(column),
        expected_(expected) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string expected_;
};

}  // namespace weaves
