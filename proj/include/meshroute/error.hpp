#pragma once

#include <stdexcept>
#include <string>

namespace meshroute {

// Error categories map one-to-one onto CLI exit codes (see tools/meshroute.cpp).

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file does not follow its declared schema (missing column, bad header).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a domain invariant (fraction out of range, duplicate id).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The data cannot support the requested computation (single-class labels,
/// zero-variance targets, empty logs).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required collaborator is absent (e.g. an ML strategy without a bundle).
class MissingDependencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inputs that must describe the same scenarios do not.
class MismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace meshroute
