#pragma once

#include <stdexcept>
#include <string>

namespace synlat {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A lattice, interaction or Hamiltonian description violates its invariants.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// A configuration document failed validation; `key_path()` names the
/// offending entry (e.g. "lattice.links[3].rabi_mhz").
class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& what)
      : Error(key_path.empty() ? what : key_path + ": " + what), key_path_(std::move(key_path)) {}
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

/// A numerical procedure failed to reach its requested accuracy.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace synlat
