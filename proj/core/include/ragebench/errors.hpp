#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ragebench {

// Base of every error the harness raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed structured text. `offset` is the byte position reported by the parser.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed payload that violates a schema rule. `field` is a dotted
/// path such as "grid.chunk_overlaps".
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)), message_(message) {}
  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Dataset rows that could not be turned into records. Row numbers are
/// zero-based data rows (the CSV header is not counted).
class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, std::vector<std::size_t> rows)
      : Error(what), rows_(std::move(rows)) {}
  const std::vector<std::size_t>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::size_t> rows_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  TransportError(const std::string& what, int attempts)
      : Error(what), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

class ProviderContractError : public Error {
 public:
  using Error::Error;
};

class RecommendationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ragebench
