#pragma once

#include <stdexcept>
#include <string>

namespace scbris {

/// Malformed config document (bad syntax, unknown key, unparsable value).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A config that parsed but violates an invariant. Carries the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Non-convergence, non-finite intermediate, or dimension mismatch.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The power allocation cannot support the requested SIC target rates
/// (alpha_v^2 - eps_v * sum_{q>v} alpha_q^2 <= 0); outage is certain.
class InfeasibleRates : public std::runtime_error {
public:
    explicit InfeasibleRates(int user)
        : std::runtime_error("target rates infeasible at SIC stage v=" + std::to_string(user)),
          user_(user) {}

    int user() const noexcept { return user_; }

private:
    int user_;
};

}  // namespace scbris
