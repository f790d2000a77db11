// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace hintcoach {

/// Base class for every error raised by the framework.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message);

    /// Short machine-readable category, e.g. "validation" or "storage".
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// A record failed one of its type invariants. `field()` names the offending field.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message);
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// I/O failure in the run directory. Distinct from validation so callers can retry.
class StorageError : public Error {
public:
    explicit StorageError(const std::string& message);
};

class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& message);
};

class ConflictError : public Error {
public:
    explicit ConflictError(const std::string& message);
};

class ConfigurationError : public Error {
public:
    explicit ConfigurationError(const std::string& message);
};

} // namespace hintcoach
