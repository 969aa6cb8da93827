#pragma once

#include <stdexcept>
#include <string>

namespace heatlocus {

/// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorKind {
  InvalidInput,
  Catalog,
  InvalidStructure,
  Chart,
  IntegrationFailure,
  NotFound,
  Inconsistency,
  Precondition,
  Quadrature,
  FitQuality,
  Domain,
  Unsupported,
  ContinuumFamily,
  Parse,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Catalog: return "catalog";
    case ErrorKind::InvalidStructure: return "invalid-structure";
    case ErrorKind::Chart: return "chart";
    case ErrorKind::IntegrationFailure: return "integration-failure";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Inconsistency: return "inconsistency";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Quadrature: return "quadrature";
    case ErrorKind::FitQuality: return "fit-quality";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::ContinuumFamily: return "continuum-family";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace heatlocus
