#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace formsense {

/// Base of every domain error. `kind()` is the stable tag printed by the CLI
/// and returned by the HTTP service.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, int row = 0)
      : Error("ParseError", row > 0 ? "row " + std::to_string(row) + ": " + what : what),
        row_(row) {}
  int row() const noexcept { return row_; }

 private:
  int row_;
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what, int row = 0)
      : Error("RangeError", row > 0 ? "row " + std::to_string(row) + ": " + what : what),
        row_(row) {}
  int row() const noexcept { return row_; }

 private:
  int row_;
};

class AsymmetryError : public Error {
 public:
  AsymmetryError(int i, int j)
      : Error("AsymmetryError", "cells (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") and (" + std::to_string(j) + "," + std::to_string(i) +
                                    ") disagree"),
        i_(i), j_(j) {}
  int i() const noexcept { return i_; }
  int j() const noexcept { return j_; }

 private:
  int i_, j_;
};

class NonZeroDiagonal : public Error {
 public:
  explicit NonZeroDiagonal(int i)
      : Error("NonZeroDiagonal", "diagonal cell (" + std::to_string(i) + "," + std::to_string(i) +
                                     ") must be 0"),
        i_(i) {}
  int i() const noexcept { return i_; }

 private:
  int i_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error("InvalidInput", what) {}
};

class DegenerateShape : public Error {
 public:
  explicit DegenerateShape(const std::string& what) : Error("DegenerateShape", what) {}
};

class AllDistancesZero : public Error {
 public:
  AllDistancesZero()
      : Error("AllDistancesZero", "every configured distance over observed pairs is zero") {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error("DimensionMismatch", what) {}
};

class RankDeficient : public Error {
 public:
  explicit RankDeficient(const std::string& what) : Error("RankDeficient", what) {}
};

class ZeroVector : public Error {
 public:
  ZeroVector() : Error("ZeroVector", "appeal vector is undefined when a = b = 0") {}
};

class InsufficientVariation : public Error {
 public:
  explicit InsufficientVariation(const std::string& what) : Error("InsufficientVariation", what) {}
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& what) : Error("NotFound", what) {}
};

class AlreadyExists : public Error {
 public:
  explicit AlreadyExists(const std::string& what) : Error("AlreadyExists", what) {}
};

/// A request that violates the staged assessment order.
class StageOrderError : public Error {
 public:
  explicit StageOrderError(const std::string& what) : Error("StageOrderError", what) {}
};

/// Stage 1 cannot be closed while some products have fewer than three comparisons.
class CoverageError : public Error {
 public:
  explicit CoverageError(std::vector<int> under_covered);
  const std::vector<int>& under_covered() const noexcept { return under_covered_; }

 private:
  std::vector<int> under_covered_;
};

}  // namespace formsense
