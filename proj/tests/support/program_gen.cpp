// SPDX-License-Identifier: Apache-2.0
#include "program_gen.hpp"

#include <vector>

#include <fmt/format.h>

#include "hintcoach/core/text.hpp"

namespace hintcoach::testkit {

namespace {

class Generator {
public:
    explicit Generator(std::uint64_t seed) : rng_(seed) {}

    std::string program() {
        std::string out;
        int statements = 1 + static_cast<int>(rng_.below(12));
        for (int i = 0; i < statements; ++i) {
            switch (rng_.below(4)) {
            case 0:
            case 1: {
                std::string name = fmt::format("v{}", rng_.below(5));
                out += name + " = " + expr(3) + "\n";
                names_.push_back(name);
                break;
            }
            case 2: out += "print(" + expr(3) + ")\n"; break;
            default: out += expr(2) + "\n"; break;
            }
        }
        return out;
    }

private:
    std::string pick(const std::vector<std::string>& options) { return options[rng_.below(options.size())]; }

    std::string literal() {
        switch (rng_.below(5)) {
        case 0: return std::to_string(static_cast<int>(rng_.below(200)) - 100);
        case 1: return fmt::format("{}.{}", rng_.below(50), rng_.below(100));
        case 2: return "'" + pick({"alpha", "Beta", "12", "3.5", "x y", ""}) + "'";
        case 3: return pick({"True", "False"});
        default: return "[" + std::to_string(rng_.below(9)) + ", " + std::to_string(rng_.below(9)) + "]";
        }
    }

    std::string expr(int depth) {
        if (depth == 0) {
            if (!names_.empty() && rng_.below(3) == 0) return pick(names_);
            return literal();
        }
        switch (rng_.below(7)) {
        case 0: return literal();
        case 1: return expr(depth - 1) + " " + pick({"+", "-", "*", "/"}) + " " + expr(depth - 1);
        case 2: return "(" + expr(depth - 1) + " " + pick({"<", "<=", ">", ">=", "==", "!="}) + " " + expr(depth - 1) + ")";
        case 3: return "[" + expr(depth - 1) + ", " + expr(depth - 1) + "]";
        case 4: return expr(depth - 1) + "[" + std::to_string(rng_.below(3)) + "]";
        case 5: {
            std::string fn = pick({"len", "abs", "to_text", "to_number", "sum", "max", "min", "sort", "unique"});
            return fn + "(" + expr(depth - 1) + ")";
        }
        default: {
            std::string fn = pick({"round", "join", "split", "contains"});
            return fn + "(" + expr(depth - 1) + ", " + expr(depth - 1) + ")";
        }
        }
    }

    SplitMix64 rng_;
    std::vector<std::string> names_;
};

} // namespace

std::string random_program(std::uint64_t seed) { return Generator(seed).program(); }

} // namespace hintcoach::testkit
