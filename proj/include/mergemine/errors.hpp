#pragma once

#include <ctime>
#include <stdexcept>
#include <string>

namespace mergemine {

// Exit codes used by the CLI. Errors thrown anywhere in the library map
// onto these in tools/mergemine.cpp.
enum ExitCode {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitInput = 3,
    kExitRepository = 4,
};

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Missing/invalid configuration: bad config file, missing detector binary,
// missing credentials, repository without a default branch.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed input data or a store constraint violation.
struct InputError : Error {
    using Error::Error;
};

struct IntegrityError : InputError {
    using InputError::InputError;
};

// Unreadable or corrupt Git repository.
struct RepoError : Error {
    using Error::Error;
};

struct CredentialError : ConfigError {
    using ConfigError::ConfigError;
};

// Rate-limited by the remote API; carries the advertised reset time.
struct RateLimitError : Error {
    RateLimitError(const std::string& what, std::time_t reset_at)
        : Error(what), reset_at(reset_at) {}
    std::time_t reset_at;
};

struct TransportError : Error {
    using Error::Error;
};

// An operation was called outside its contract (e.g. branch attribution on
// a non-valid merge scenario). Programming error, not an input error.
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace mergemine
