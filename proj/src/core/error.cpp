// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/core/error.hpp"

#include <utility>

namespace hintcoach {

Error::Error(std::string code, const std::string& message) : std::runtime_error(message), code_(std::move(code)) {}

ValidationError::ValidationError(std::string field, const std::string& message)
    : Error("validation", field + ": " + message), field_(std::move(field)) {}

StorageError::StorageError(const std::string& message) : Error("storage", message) {}

NotFoundError::NotFoundError(const std::string& message) : Error("not_found", message) {}

ConflictError::ConflictError(const std::string& message) : Error("conflict", message) {}

ConfigurationError::ConfigurationError(const std::string& message) : Error("configuration", message) {}

} // namespace hintcoach
