// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "hintcoach/action/value.hpp"

namespace hintcoach::action {

/// Names of the pure builtins (print is handled by the interpreter but listed here too).
const std::vector<std::string>& builtin_names();
bool is_builtin(const std::string& name);

/// Calls a pure builtin. Throws TypeMismatch or LimitExceeded. `print` is not callable here.
Value call_builtin(const std::string& name, const std::vector<Value>& args);

/// Operators shared by the interpreter and tests.
Value apply_binary(const std::string& op, const Value& lhs, const Value& rhs);
Value apply_negate(const Value& operand);
Value apply_index(const Value& target, const Value& index);

/// Enforces list and text size limits on a freshly built value.
void check_limits(const Value& value);

} // namespace hintcoach::action
