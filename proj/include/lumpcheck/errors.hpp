#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lumpcheck {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// model_core

class NonStochasticRow : public Error {
  public:
    NonStochasticRow(std::size_t row, double sum)
        : Error("row " + std::to_string(row) + " sums to " + std::to_string(sum) + ", expected 1"),
          row_(row), sum_(sum) {}
    std::size_t row() const noexcept { return row_; }
    double sum() const noexcept { return sum_; }

  private:
    std::size_t row_;
    double sum_;
};

class UnknownState : public Error {
  public:
    explicit UnknownState(const std::string& id) : Error("unknown state '" + id + "'") {}
};

class MissingLabel : public Error {
  public:
    explicit MissingLabel(const std::string& id) : Error("state '" + id + "' has no label") {}
};

class NegativeEntry : public Error {
  public:
    NegativeEntry(std::size_t row, std::size_t col, double value)
        : Error("entry (" + std::to_string(row) + "," + std::to_string(col) + ") = " +
                std::to_string(value) + " is outside [0,1]") {}
};

class InvalidModel : public Error {
  public:
    using Error::Error;
};

class LengthMismatch : public Error {
  public:
    using Error::Error;
};

class BlockOutOfRange : public Error {
  public:
    BlockOutOfRange(std::size_t block, std::size_t count)
        : Error("block index " + std::to_string(block) + " out of range (" + std::to_string(count) +
                " blocks)") {}
};

class InvalidPartition : public Error {
  public:
    using Error::Error;
};

// interval_core

class EmptyInterval : public Error {
  public:
    EmptyInterval() : Error("interval row contains no stochastic vector") {}
};

class DimensionMismatch : public Error {
  public:
    DimensionMismatch(std::size_t expected, std::size_t got)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(got)) {}
};

// abstraction

class IndexOutOfRange : public Error {
  public:
    IndexOutOfRange(std::size_t index, std::size_t count)
        : Error("index " + std::to_string(index) + " out of range (" + std::to_string(count) + ")") {}
};

class NotApplicable : public Error {
  public:
    using Error::Error;
};

class InvalidRepresentative : public Error {
  public:
    using Error::Error;
};

// pctl

class SyntaxError : public Error {
  public:
    SyntaxError(std::size_t column, const std::string& expected)
        : Error("syntax error at column " + std::to_string(column) + ": expected " + expected),
          column_(column) {}
    /// 1-based column of the offending token.
    std::size_t column() const noexcept { return column_; }

  private:
    std::size_t column_;
};

class ThresholdOutOfRange : public Error {
  public:
    explicit ThresholdOutOfRange(double p)
        : Error("probability threshold " + std::to_string(p) + " is outside [0,1]") {}
};

// engine

class NonConvergence : public Error {
  public:
    NonConvergence(std::size_t iterations, double residual)
        : Error("value iteration did not converge after " + std::to_string(iterations) +
                " iterations (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

class UnsupportedFormula : public Error {
  public:
    using Error::Error;
};

} // namespace lumpcheck
