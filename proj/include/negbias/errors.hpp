#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace negbias {

/// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or missing user input (files, flags, formats). CLI exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Artifacts that do not join up. CLI exit code 3.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class MalformedLine : public InputError {
 public:
  MalformedLine(std::size_t line_no, const std::string& detail)
      : InputError("line " + std::to_string(line_no) + ": " + detail), line_no_(line_no) {}
  [[nodiscard]] std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

class DuplicateId : public InputError {
 public:
  explicit DuplicateId(std::string id) : InputError("duplicate id: " + id), id_(std::move(id)) {}
  [[nodiscard]] const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class KindMismatch : public InputError {
 public:
  KindMismatch(std::string id, const std::string& detail)
      : InputError("kind mismatch for " + id + ": " + detail), id_(std::move(id)) {}
  [[nodiscard]] const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class ProviderError : public Error {
 public:
  ProviderError(int status, std::string body)
      : Error("provider error (status " + std::to_string(status) + "): " + body),
        status_(status),
        body_(std::move(body)) {}
  [[nodiscard]] int status() const { return status_; }
  [[nodiscard]] const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

class Timeout : public ProviderError {
 public:
  explicit Timeout(const std::string& detail) : ProviderError(0, "timeout: " + detail) {}
};

class CacheIoError : public Error {
 public:
  using Error::Error;
};

class JudgeParseError : public Error {
 public:
  using Error::Error;
};

class InconsistentProbe : public Error {
 public:
  using Error::Error;
};

class ExhaustedAttempts : public Error {
 public:
  ExhaustedAttempts(const std::string& id, int attempts)
      : Error("no acceptable wrong answer for " + id + " after " + std::to_string(attempts) +
              " attempts"),
        attempts_(attempts) {}
  [[nodiscard]] int attempts() const { return attempts_; }

 private:
  int attempts_;
};

class EmptyPolarity : public Error {
 public:
  explicit EmptyPolarity(const std::string& side)
      : Error("no scorable records on the " + side + " side"), side_(side) {}
  [[nodiscard]] const std::string& side() const { return side_; }

 private:
  std::string side_;
};

class NoScorableRecords : public Error {
 public:
  NoScorableRecords() : Error("no scorable records") {}
};

class MismatchedRuns : public IntegrityError {
 public:
  using IntegrityError::IntegrityError;
};

class OrphanRecord : public IntegrityError {
 public:
  explicit OrphanRecord(std::string item_id)
      : IntegrityError("record refers to unknown item: " + item_id), item_id_(std::move(item_id)) {}
  [[nodiscard]] const std::string& item_id() const { return item_id_; }

 private:
  std::string item_id_;
};

class BadMagic : public InputError {
 public:
  using InputError::InputError;
};

class BadVersion : public InputError {
 public:
  explicit BadVersion(std::uint32_t v)
      : InputError("unsupported dump version " + std::to_string(v)) {}
};

class DimMismatch : public InputError {
 public:
  DimMismatch(std::uint64_t expected, std::uint64_t actual)
      : InputError("expected " + std::to_string(expected) + " bytes, found " +
                   std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}
  [[nodiscard]] std::uint64_t expected() const { return expected_; }
  [[nodiscard]] std::uint64_t actual() const { return actual_; }

 private:
  std::uint64_t expected_;
  std::uint64_t actual_;
};

class InvariantViolation : public InputError {
 public:
  using InputError::InputError;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

}  // namespace negbias
