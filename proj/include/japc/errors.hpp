#pragma once

#include <stdexcept>
#include <string>

namespace japc {

/// The requested jitter-clock phase offset would push the nominal crossing
/// off the linear portion of the rising ramp.
class ramp_saturation_error : public std::runtime_error {
 public:
  explicit ramp_saturation_error(const std::string& what) : std::runtime_error(what) {}
};

/// The comparator offset cannot be compensated within the reachable delay-tap range.
class calibration_range_error : public std::runtime_error {
 public:
  explicit calibration_range_error(const std::string& what) : std::runtime_error(what) {}
};

/// Scenario/config file problem (syntax, unknown key, failed validation).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// File I/O failure; the message names the offending path.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace japc
