#pragma once

#include <stdexcept>
#include <string>

namespace otl {

/// Base of every error thrown by the library. The C API maps each subclass
/// onto one status code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Configuration value missing or invalid. `key()` names the offending key.
class ConfigError : public Error {
public:
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

/// Required artifact missing on disk or produced by a different config.
class ArtifactError : public Error {
public:
  using Error::Error;
};

/// Mesh construction failed for the requested parameters.
class MeshError : public Error {
public:
  using Error::Error;
};

/// Ball or point query not admissible for the mesh.
class QueryError : public Error {
public:
  using Error::Error;
};

/// Field and mesh do not belong together.
class StructuralError : public Error {
public:
  using Error::Error;
};

class SolverError : public Error {
public:
  using Error::Error;
};

/// Armijo backtracking exhausted its halvings.
class DivergenceError : public SolverError {
public:
  using SolverError::SolverError;
};

class LinearSolveError : public SolverError {
public:
  using SolverError::SolverError;
};

/// A theorem/lemma precondition does not hold for the supplied instance.
class HypothesisError : public Error {
public:
  using Error::Error;
};

/// The model fails its structure checks and may not be fed to a solver.
class ModelError : public Error {
public:
  using Error::Error;
};

} // namespace otl
