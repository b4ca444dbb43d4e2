#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hvns {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape/box mismatch between operands, or coefficient storage that does
/// not match the declared box.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A caller violated an operation precondition (non-orthonormal basis,
/// too few amplitudes, oversized ensemble, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or runaway coefficients during time integration.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, long step, double k_magnitude)
      : Error(what), step_(step), k_magnitude_(k_magnitude) {}

  long step() const noexcept { return step_; }
  double k_magnitude() const noexcept { return k_magnitude_; }

 private:
  long step_;
  double k_magnitude_;
};

/// Configuration errors; carries every offending key, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> problems_;
};

/// File-system and format errors; messages carry the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hvns
