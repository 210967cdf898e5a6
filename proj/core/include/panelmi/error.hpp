#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace panelmi {

/// Base of every exception thrown by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (bad cell address, shape mismatch, ...).
class DataError : public Error {
public:
  using Error::Error;
};

class UnknownCodeError : public DataError {
public:
  UnknownCodeError(const std::string& kind, std::string code)
      : DataError("unknown " + kind + " '" + code + "'"), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

/// CSV / schema parse failure. Row and column are 1-based; 0 means "not applicable".
class ParseError : public DataError {
public:
  ParseError(const std::string& what, std::size_t row, std::string column)
      : DataError(format(what, row, column)), row_(row), column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

private:
  static std::string format(const std::string& what, std::size_t row, const std::string& column) {
    std::string msg = what;
    if (row > 0) msg += " (row " + std::to_string(row);
    if (!column.empty()) msg += (row > 0 ? ", column '" : " (column '") + column + "'";
    if (row > 0 || !column.empty()) msg += ")";
    return msg;
  }
  std::size_t row_;
  std::string column_;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

/// X'X failed the positive-definiteness check.
class CollinearityError : public Error {
public:
  explicit CollinearityError(const std::string& what, std::string target = {})
      : Error(what), target_(std::move(target)) {}
  const std::string& target() const noexcept { return target_; }

private:
  std::string target_;
};

/// Too few rows to fit the requested model.
class InsufficientData : public Error {
public:
  explicit InsufficientData(const std::string& what, std::string target = {})
      : Error(what), target_(std::move(target)) {}
  const std::string& target() const noexcept { return target_; }

private:
  std::string target_;
};

/// A chained-equations step could not be carried out for `code`.
class UnimputableVariable : public Error {
public:
  enum class Cause { Collinearity, InsufficientData };

  UnimputableVariable(std::string code, Cause cause, const std::string& detail)
      : Error("variable '" + code + "' cannot be imputed: " + detail),
        code_(std::move(code)), cause_(cause), detail_(detail) {}
  const std::string& code() const noexcept { return code_; }
  Cause cause() const noexcept { return cause_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  std::string code_;
  Cause cause_;
  std::string detail_;
};

class IncompleteAuxiliary : public DataError {
public:
  explicit IncompleteAuxiliary(std::string code)
      : DataError("auxiliary variable '" + code + "' has missing cells"), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

}  // namespace panelmi
