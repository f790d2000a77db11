// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

namespace hintcoach::testkit {

/// Random code cell over literals, arithmetic, comparisons, lists, indexing and the pure builtins.
/// Programs may fail at run time (unknown names, type errors); they never exceed the statement cap.
std::string random_program(std::uint64_t seed);

} // namespace hintcoach::testkit
