#pragma once

#include <stdexcept>
#include <string>

namespace ra {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : Error {
  using Error::Error;
};
struct FormatError : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct InvalidRange : Error {
  using Error::Error;
};
struct LevelOutOfRange : Error {
  using Error::Error;
};
struct NegativeFactor : Error {
  using Error::Error;
};
struct SizeOutOfRange : Error {
  using Error::Error;
};
struct InvalidSchedule : Error {
  using Error::Error;
};
struct EmptySubset : Error {
  using Error::Error;
};
struct Overflow : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct EvaluatorFailure : Error {
  using Error::Error;
};
struct InvalidSizeRange : Error {
  using Error::Error;
};
struct InsufficientCoverage : Error {
  using Error::Error;
};
struct DegenerateDataset : Error {
  using Error::Error;
};
struct NonFiniteLoss : Error {
  using Error::Error;
};
struct InvalidParams : Error {
  using Error::Error;
};
struct LabelOutOfRange : Error {
  using Error::Error;
};

}  // namespace ra
