#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hetpol {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or inputs (bad horizon, out-of-range index, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A rejection sampler ran out of its attempt budget.
class RejectionBudgetExceeded : public Error {
public:
    RejectionBudgetExceeded(const std::string& what, std::uint64_t attempts)
        : Error(what + " (after " + std::to_string(attempts) + " attempts)"), attempts_(attempts) {}

    std::uint64_t attempts() const noexcept { return attempts_; }

private:
    std::uint64_t attempts_;
};

/// Malformed or inconsistent run configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

#define HETPOL_REQUIRE(cond, msg)                                    \
    do {                                                             \
        if (!(cond)) throw ::hetpol::InvalidArgument(msg);          \
    } while (0)

}  // namespace hetpol
