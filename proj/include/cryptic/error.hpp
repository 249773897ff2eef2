#pragma once

#include <stdexcept>
#include <string>

namespace cryptic {

/// Process exit status per error class.
enum class ExitCode : int {
  kSuccess = 0,
  kConfig = 2,
  kMissingArtifact = 3,
  kDataIntegrity = 4,
  kNumerical = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Malformed input record; message carries file and line.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(ExitCode::kDataIntegrity, source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& what) : Error(ExitCode::kDataIntegrity, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

class MissingArtifactError : public Error {
 public:
  MissingArtifactError(const std::string& artifact, const std::string& producer)
      : Error(ExitCode::kMissingArtifact,
              "missing artifact '" + artifact + "'; run `" + producer + "` first"),
        producer_(producer) {}
  const std::string& producer() const noexcept { return producer_; }

 private:
  std::string producer_;
};

/// Reference to an entity that does not exist.
class LookupError : public Error {
 public:
  explicit LookupError(const std::string& what) : Error(ExitCode::kDataIntegrity, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ExitCode::kNumerical, what) {}
};

/// Raised when a statistic is requested over an empty cohort.
class UndefinedCohortError : public Error {
 public:
  explicit UndefinedCohortError(const std::string& what) : Error(ExitCode::kNumerical, what) {}
};

}  // namespace cryptic
