#pragma once

#include <stdexcept>
#include <string>

namespace mmdim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration. `key()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config error [" + key + "]: " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// A computation would read coordinates that are padding rather than data.
class WindowExhausted : public Error {
 public:
  using Error::Error;
};

// An exhaustive search or enumeration exceeded its configured cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmdim
