#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flockmeter {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A communication rate violates one of the standing assumptions
/// (positive, bounded by one, Lipschitz, non-increasing).
class RateAssumptionViolated : public InvalidArgument {
 public:
  RateAssumptionViolated(std::string assumption, const std::string& detail)
      : InvalidArgument("communication rate is not " + assumption + ": " + detail),
        assumption_(std::move(assumption)) {}
  const std::string& assumption() const noexcept { return assumption_; }

 private:
  std::string assumption_;
};

/// K is too small for the flocking estimate: no finite x_inf exists.
class FlockingViolated : public Error {
 public:
  using Error::Error;
};

/// Exact transport between sizes n and m needs lcm(n, m) points, which
/// exceeded the configured cap.
class SizeCapExceeded : public Error {
 public:
  SizeCapExceeded(std::size_t lcm, std::size_t cap)
      : Error("lcm of measure sizes is " + std::to_string(lcm) + ", above size cap " +
              std::to_string(cap) + "; subsample or raise the cap"),
        lcm_(lcm), cap_(cap) {}
  std::size_t lcm() const noexcept { return lcm_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t lcm_;
  std::size_t cap_;
};

/// The time integrator produced a non-finite coordinate.
class NumericalBlowUp : public Error {
 public:
  explicit NumericalBlowUp(std::size_t step, const std::string& context = {})
      : Error("numerical blow-up at step " + std::to_string(step) +
              (context.empty() ? std::string{} : " (" + context + ")")),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A configuration value is missing, unknown or out of range.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace flockmeter
