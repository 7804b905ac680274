#pragma once

#include <stdexcept>
#include <string>

namespace rldf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or user input. The CLI exits with status 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Coordinate outside [0, |vocabulary|) or wrong dimensionality.
class EncodingBoundsError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class VocabularyMissError : public ConfigError {
 public:
  VocabularyMissError(std::string axis, std::string term)
      : ConfigError("term '" + term + "' is not in the vocabulary of axis '" + axis + "'"),
        axis_(std::move(axis)),
        term_(std::move(term)) {}

  const std::string& axis() const noexcept { return axis_; }
  const std::string& term() const noexcept { return term_; }

 private:
  std::string axis_;
  std::string term_;
};

/// Feedback backend failure. Carries the raw payload when one was received.
class OracleError : public Error {
 public:
  explicit OracleError(const std::string& what, std::string payload = {})
      : Error(what), payload_(std::move(payload)) {}

  const std::string& payload() const noexcept { return payload_; }

 private:
  std::string payload_;
};

class DegenerateEmbeddingError : public Error {
 public:
  using Error::Error;
};

/// A library invariant did not hold (exit status 4).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace rldf
