#pragma once

#include <stdexcept>
#include <string>

namespace mcfqkd {

// Process exit codes used by the CLI. Library errors map onto these so that
// scripts can distinguish failure classes.
enum class ExitCode : int {
    ok = 0,
    parse_error = 2,
    unknown_key = 3,
    invariant_violation = 4,
    infeasible = 5,
};

// Malformed input text (config or CSV). Carries a 1-based line number when
// the location is known, 0 otherwise.
class ParseError : public std::runtime_error {
  public:
    ParseError(std::string message, int line = 0)
        : std::runtime_error(line > 0 ? message + " (line " + std::to_string(line) + ")"
                                      : message),
          line_(line) {}

    int line() const { return line_; }

  private:
    int line_;
};

// A config key that is not part of the schema. A silent typo in a physics
// parameter is worse than a hard failure.
class UnknownKeyError : public std::runtime_error {
  public:
    explicit UnknownKeyError(const std::string& key)
        : std::runtime_error("unknown config key: " + key), key_(key) {}

    const std::string& key() const { return key_; }

  private:
    std::string key_;
};

// A value that violates a documented model invariant. The message names the
// offending key/field and the constraint.
class InvariantError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Calibration target outside the achievable range of the model.
class InfeasibleError : public std::runtime_error {
  public:
    InfeasibleError(const std::string& target, double lo, double hi,
                    const std::string& detail)
        : std::runtime_error("calibration infeasible: target '" + target +
                             "' outside achievable range [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]; " + detail),
          target_(target), achievable_lo_(lo), achievable_hi_(hi) {}

    const std::string& target() const { return target_; }
    double achievable_lo() const { return achievable_lo_; }
    double achievable_hi() const { return achievable_hi_; }

  private:
    std::string target_;
    double achievable_lo_;
    double achievable_hi_;
};

}  // namespace mcfqkd
