// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gclgcn {

/// Dense row-major double matrix used by every module.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (carries the offending line in the message).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Index or value outside its valid range.
class RangeError : public Error {
 public:
  using Error::Error;
};

class MismatchError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes incompatible for an operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition of an API call.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or value during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace gclgcn
