// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hintcoach/action/ast.hpp"
#include "hintcoach/action/value.hpp"
#include "hintcoach/core/error.hpp"

namespace hintcoach::action {

/// Default observation cap, in characters (UTF-8 code points). Longer observations are cut
/// and suffixed with kTruncationSuffix.
inline constexpr std::size_t kMaxObservationChars = 4096;
inline constexpr std::string_view kTruncationSuffix = "…[truncated]";

enum class ErrorKind { Parse, NameNotFound, TypeMismatch, ToolError, LimitExceeded };

std::string error_kind_label(ErrorKind kind);

struct CellError {
    ErrorKind kind = ErrorKind::Parse;
    std::string message;  // rendered one-line text, as it appears in the observation
    std::string tool_name;
    int line = 0;
};

using Environment = std::map<std::string, Value>;

struct CellResult {
    std::string observation;
    std::optional<CellError> error;
    /// Bindings created or overwritten by this cell, in final form.
    Environment bindings_delta;
    /// True when complete_task (or another halting tool) stopped the cell.
    bool halted = false;
};

/// Raised by tools. The interpreter turns it into a ToolError observation.
class ToolFailure : public Error {
public:
    explicit ToolFailure(const std::string& message) : Error("tool_error", message) {}
};

/// Raised by builtins and operators for wrong argument kinds.
class TypeMismatch : public Error {
public:
    explicit TypeMismatch(const std::string& message) : Error("type_mismatch", message) {}
};

/// Raised when a value would exceed a size limit or become non-finite.
class LimitExceeded : public Error {
public:
    explicit LimitExceeded(const std::string& message) : Error("limit_exceeded", message) {}
};

/// Side channel available to tools while a cell runs.
struct ToolContext {
    std::string output;  // text the tool prints into the observation
    bool halt = false;   // stop executing the cell after this call
};

class ToolRegistry {
public:
    virtual ~ToolRegistry() = default;
    virtual bool has(const std::string& name) const = 0;
    virtual Value call(const std::string& name, const std::vector<Value>& args, ToolContext& ctx) = 0;
};

/// Registry with no tools; useful for pure-expression evaluation.
class EmptyRegistry : public ToolRegistry {
public:
    bool has(const std::string&) const override { return false; }
    Value call(const std::string& name, const std::vector<Value>&, ToolContext&) override;
};

/// Runs one code cell against `env`. Parse errors, unknown names, type mismatches and tool
/// failures never throw: they stop the cell and are reported in the observation. Bindings made
/// by statements that completed before the error are kept.
CellResult execute_cell(const std::string& code, Environment& env, ToolRegistry& tools,
                        std::size_t max_observation_chars = kMaxObservationChars);

/// Same, for an already parsed program.
CellResult execute_program(const Program& program, Environment& env, ToolRegistry& tools,
                           std::size_t max_observation_chars = kMaxObservationChars);

/// Keeps the first `max_chars` code points and appends kTruncationSuffix when anything was cut.
std::string truncate_observation(std::string text, std::size_t max_chars = kMaxObservationChars);
/// Number of UTF-8 code points in `text`.
std::size_t utf8_length(std::string_view text);

} // namespace hintcoach::action
