#pragma once

#include <stdexcept>
#include <string>

namespace tanlars {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroVarianceColumn : public Error {
 public:
  explicit ZeroVarianceColumn(std::size_t column)
      : Error("column " + std::to_string(column) + " is constant"), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

// Coefficients diverged while maximizing the likelihood (perfect or
// quasi-complete separation) and no ridge fallback was allowed.
class Separation : public Error {
 public:
  using Error::Error;
};

class NumericalBreakdown : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tanlars
