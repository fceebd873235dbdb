#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mclab {

// Base of every error raised by the toolkit. The kind() string is what the
// command line prints in front of the message.
class error : public std::runtime_error {
public:
  explicit error(std::string const& msg) : std::runtime_error{msg} {}
  virtual char const* kind() const noexcept { return "Error"; }
};

#define MCLAB_DECLARE_ERROR(Name, Kind)                              \
  class Name : public error {                                        \
  public:                                                            \
    explicit Name(std::string const& msg) : error{msg} {}            \
    char const* kind() const noexcept override { return Kind; }      \
  };

MCLAB_DECLARE_ERROR(unrecognized_mode, "UnrecognizedMode")
MCLAB_DECLARE_ERROR(consistency_error, "ConsistencyError")
MCLAB_DECLARE_ERROR(schema_error, "SchemaError")
MCLAB_DECLARE_ERROR(io_error, "IoError")
MCLAB_DECLARE_ERROR(feed_error, "FeedError")
MCLAB_DECLARE_ERROR(key_error, "KeyError")
MCLAB_DECLARE_ERROR(config_error, "ConfigError")
MCLAB_DECLARE_ERROR(data_error, "DataError")
MCLAB_DECLARE_ERROR(numerical_error, "NumericalError")
MCLAB_DECLARE_ERROR(domain_error, "DomainError")
MCLAB_DECLARE_ERROR(stage_error, "StageError")

#undef MCLAB_DECLARE_ERROR

class degenerate_choice_set : public error {
public:
  degenerate_choice_set(std::string const& msg, std::vector<std::string> log)
      : error{msg}, log_{std::move(log)} {}
  char const* kind() const noexcept override { return "DegenerateChoiceSet"; }
  std::vector<std::string> const& log() const noexcept { return log_; }

private:
  std::vector<std::string> log_;
};

class not_converged : public error {
public:
  not_converged(std::string const& msg, std::vector<double> trajectory)
      : error{msg}, trajectory_{std::move(trajectory)} {}
  char const* kind() const noexcept override { return "NotConverged"; }
  // Log-likelihood after every accepted iteration.
  std::vector<double> const& trajectory() const noexcept { return trajectory_; }

private:
  std::vector<double> trajectory_;
};

class identification_error : public error {
public:
  identification_error(std::string const& msg, std::vector<std::string> params)
      : error{msg}, parameters_{std::move(params)} {}
  char const* kind() const noexcept override { return "Identification"; }
  std::vector<std::string> const& parameters() const noexcept {
    return parameters_;
  }

private:
  std::vector<std::string> parameters_;
};

}  // namespace mclab
