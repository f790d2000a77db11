// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/action/builtins.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hintcoach/action/interpreter.hpp"

namespace hintcoach::action {

namespace {

std::string kind_of(const Value& v) { return kind_name(v.kind()); }

[[noreturn]] void mismatch(const std::string& where, const std::string& expected, const Value& actual) {
    throw TypeMismatch(fmt::format("{} expects {}, got {}", where, expected, kind_of(actual)));
}

void arity(const std::string& name, const std::vector<Value>& args, std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) {
        std::string range = lo == hi ? std::to_string(lo) : fmt::format("{} to {}", lo, hi);
        throw TypeMismatch(fmt::format("{}() takes {} argument{}, got {}", name, range, hi == 1 ? "" : "s",
                                       args.size()));
    }
}

double need_number(const std::string& where, const Value& v) {
    if (!v.is_number()) mismatch(where, "number", v);
    return v.as_number();
}

const std::string& need_text(const std::string& where, const Value& v) {
    if (!v.is_text()) mismatch(where, "text", v);
    return v.as_text();
}

const List& need_list(const std::string& where, const Value& v) {
    if (!v.is_list()) mismatch(where, "list", v);
    return v.as_list();
}

Value finite(double x, const std::string& what) {
    if (!std::isfinite(x)) throw LimitExceeded(what + " produced a non-finite number");
    return Value::number(x);
}

/// Orders two values of the same comparable kind (number or text).
int compare_same(const Value& a, const Value& b, const std::string& where) {
    if (a.is_number() && b.is_number()) {
        return a.as_number() < b.as_number() ? -1 : (a.as_number() > b.as_number() ? 1 : 0);
    }
    if (a.is_text() && b.is_text()) return a.as_text().compare(b.as_text()) < 0 ? -1 : (a.as_text() == b.as_text() ? 0 : 1);
    throw TypeMismatch(fmt::format("{} cannot order {} and {}", where, kind_of(a), kind_of(b)));
}

void check_homogeneous(const List& items, const std::string& where) {
    if (items.empty()) return;
    Kind k = items.front().kind();
    if (k != Kind::Number && k != Kind::Text) mismatch(where, "numbers or texts", items.front());
    for (const auto& item : items) {
        if (item.kind() != k) {
            throw TypeMismatch(fmt::format("{} cannot order {} and {}", where, kind_name(k), kind_of(item)));
        }
    }
}

Value extreme(const std::string& name, const std::vector<Value>& args, bool want_max) {
    if (args.empty()) throw TypeMismatch(name + "() takes a list or at least two arguments, got 0");
    List items;
    if (args.size() == 1) {
        items = need_list(name + "()", args[0]);
    } else {
        items = args;
    }
    if (items.empty()) throw TypeMismatch(name + "() of an empty list");
    check_homogeneous(items, name + "()");
    const Value* best = &items.front();
    for (const auto& item : items) {
        int c = compare_same(item, *best, name + "()");
        if (want_max ? c > 0 : c < 0) best = &item;
    }
    return *best;
}

Value to_number_of(const Value& v, const std::string& where) {
    if (v.is_number()) return v;
    const std::string& text = need_text(where, v);
    auto parsed = parse_number(text);
    if (!parsed) throw TypeMismatch(fmt::format("{} cannot convert '{}' to a number", where, text));
    return Value::number(*parsed);
}

const std::vector<std::string> kNames = {"abs",     "contains", "join", "len",  "max",       "min",
                                          "print",   "round",    "sort", "split", "sum",      "to_number",
                                          "to_numbers", "to_text", "unique"};

} // namespace

const std::vector<std::string>& builtin_names() { return kNames; }

bool is_builtin(const std::string& name) { return std::find(kNames.begin(), kNames.end(), name) != kNames.end(); }

void check_limits(const Value& value) {
    if (value.is_text() && utf8_length(value.as_text()) > kMaxTextLength) {
        throw LimitExceeded(fmt::format("text longer than {} characters", kMaxTextLength));
    }
    if (value.is_list()) {
        if (value.as_list().size() > kMaxListElements) {
            throw LimitExceeded(fmt::format("list longer than {} elements", kMaxListElements));
        }
    }
    if (value.is_number() && !std::isfinite(value.as_number())) throw LimitExceeded("non-finite number");
}

Value call_builtin(const std::string& name, const std::vector<Value>& args) {
    const std::string where = name + "()";
    Value out;
    if (name == "len") {
        arity(name, args, 1, 1);
        const Value& v = args[0];
        if (v.is_text()) out = Value::number(static_cast<double>(utf8_length(v.as_text())));
        else if (v.is_list()) out = Value::number(static_cast<double>(v.as_list().size()));
        else if (v.kind() == Kind::Table) out = Value::number(static_cast<double>(v.as_table()->rows.size()));
        else mismatch(where, "text, list or table", v);
    } else if (name == "min" || name == "max") {
        out = extreme(name, args, name == "max");
    } else if (name == "sum") {
        arity(name, args, 1, 1);
        double total = 0.0;
        for (const auto& item : need_list(where, args[0])) total += need_number(where + " element", item);
        out = finite(total, where);
    } else if (name == "abs") {
        arity(name, args, 1, 1);
        out = Value::number(std::fabs(need_number(where, args[0])));
    } else if (name == "round") {
        arity(name, args, 1, 2);
        double x = need_number(where, args[0]);
        double nd = args.size() == 2 ? need_number(where + " ndigits", args[1]) : 0.0;
        if (nd != std::floor(nd) || nd < 0 || nd > 15) {
            throw TypeMismatch(fmt::format("round() ndigits must be an integer from 0 to 15, got {}", format_number(nd)));
        }
        out = Value::number(round_decimal(x, static_cast<int>(nd)));
    } else if (name == "split") {
        arity(name, args, 2, 2);
        const std::string& text = need_text(where, args[0]);
        const std::string& sep = need_text(where + " separator", args[1]);
        if (sep.empty()) throw TypeMismatch("split() separator must not be empty");
        List parts;
        std::size_t start = 0;
        while (true) {
            auto pos = text.find(sep, start);
            if (pos == std::string::npos) {
                parts.push_back(Value::text(text.substr(start)));
                break;
            }
            parts.push_back(Value::text(text.substr(start, pos - start)));
            if (parts.size() > kMaxListElements) break;
            start = pos + sep.size();
        }
        out = Value::list(std::move(parts));
    } else if (name == "join") {
        arity(name, args, 2, 2);
        const std::string& sep = need_text(where + " separator", args[0]);
        const List& items = need_list(where, args[1]);
        std::string joined;
        for (std::size_t i = 0; i < items.size(); ++i) {
            const auto& item = items[i];
            if (!item.is_text() && !item.is_number()) mismatch(fmt::format("join() element {}", i), "text or number", item);
            if (i > 0) joined += sep;
            joined += to_display(item);
            if (joined.size() > kMaxTextLength * 4) break;
        }
        out = Value::text(std::move(joined));
    } else if (name == "to_number") {
        arity(name, args, 1, 1);
        out = to_number_of(args[0], where);
    } else if (name == "to_numbers") {
        arity(name, args, 1, 1);
        List numbers;
        const List& items = need_list(where, args[0]);
        for (std::size_t i = 0; i < items.size(); ++i) {
            numbers.push_back(to_number_of(items[i], fmt::format("to_numbers() element at index {}", i)));
        }
        out = Value::list(std::move(numbers));
    } else if (name == "to_text") {
        arity(name, args, 1, 1);
        out = Value::text(to_display(args[0]));
    } else if (name == "contains") {
        arity(name, args, 2, 2);
        if (args[0].is_text()) {
            out = Value::boolean(args[0].as_text().find(need_text(where + " needle", args[1])) != std::string::npos);
        } else if (args[0].is_list()) {
            const List& items = args[0].as_list();
            out = Value::boolean(std::find(items.begin(), items.end(), args[1]) != items.end());
        } else {
            mismatch(where, "text or list", args[0]);
        }
    } else if (name == "unique") {
        arity(name, args, 1, 1);
        List kept;
        for (const auto& item : need_list(where, args[0])) {
            if (std::find(kept.begin(), kept.end(), item) == kept.end()) kept.push_back(item);
        }
        out = Value::list(std::move(kept));
    } else if (name == "sort") {
        arity(name, args, 1, 1);
        List items = need_list(where, args[0]);
        check_homogeneous(items, where);
        std::stable_sort(items.begin(), items.end(),
                         [&](const Value& a, const Value& b) { return compare_same(a, b, where) < 0; });
        out = Value::list(std::move(items));
    } else {
        throw TypeMismatch("'" + name + "' is not a builtin");
    }
    check_limits(out);
    return out;
}

Value apply_binary(const std::string& op, const Value& lhs, const Value& rhs) {
    auto describe_pair = [&] { return fmt::format("'{}' on {} and {}", op, kind_of(lhs), kind_of(rhs)); };
    if (op == "+") {
        Value out;
        if (lhs.is_number() && rhs.is_number()) return finite(lhs.as_number() + rhs.as_number(), "'+'");
        if (lhs.is_text() && rhs.is_text()) out = Value::text(lhs.as_text() + rhs.as_text());
        else if (lhs.is_list() && rhs.is_list()) {
            if (lhs.as_list().size() + rhs.as_list().size() > kMaxListElements) {
                throw LimitExceeded(fmt::format("list longer than {} elements", kMaxListElements));
            }
            List items = lhs.as_list();
            items.insert(items.end(), rhs.as_list().begin(), rhs.as_list().end());
            out = Value::list(std::move(items));
        } else {
            throw TypeMismatch("unsupported operand kinds for " + describe_pair());
        }
        check_limits(out);
        return out;
    }
    if (op == "-" || op == "*" || op == "/") {
        if (!lhs.is_number() || !rhs.is_number()) throw TypeMismatch("unsupported operand kinds for " + describe_pair());
        double a = lhs.as_number();
        double b = rhs.as_number();
        if (op == "-") return finite(a - b, "'-'");
        if (op == "*") return finite(a * b, "'*'");
        if (b == 0.0) throw TypeMismatch("division by zero");
        return finite(a / b, "'/'");
    }
    if (op == "==") return Value::boolean(lhs == rhs);
    if (op == "!=") return Value::boolean(!(lhs == rhs));
    bool comparable = (lhs.is_number() && rhs.is_number()) || (lhs.is_text() && rhs.is_text());
    if (!comparable) throw TypeMismatch("cannot order with " + describe_pair());
    int c = compare_same(lhs, rhs, "'" + op + "'");
    if (op == "<") return Value::boolean(c < 0);
    if (op == "<=") return Value::boolean(c <= 0);
    if (op == ">") return Value::boolean(c > 0);
    if (op == ">=") return Value::boolean(c >= 0);
    throw TypeMismatch("unknown operator '" + op + "'");
}

Value apply_negate(const Value& operand) {
    if (!operand.is_number()) mismatch("unary '-'", "number", operand);
    return Value::number(-operand.as_number());
}

Value apply_index(const Value& target, const Value& index) {
    if (!index.is_number() || index.as_number() != std::floor(index.as_number())) {
        if (!index.is_number()) mismatch("indexing", "an integer index", index);
        throw TypeMismatch(fmt::format("index must be an integer, got {}", format_number(index.as_number())));
    }
    auto i = static_cast<long long>(index.as_number());
    auto pick = [&](long long size) -> std::size_t {
        long long k = i < 0 ? size + i : i;
        if (k < 0 || k >= size) {
            throw TypeMismatch(fmt::format("index {} out of range for length {}", i, size));
        }
        return static_cast<std::size_t>(k);
    };
    if (target.is_list()) {
        const List& items = target.as_list();
        return items[pick(static_cast<long long>(items.size()))];
    }
    if (target.is_text()) {
        // Index by code point so multi-byte characters stay intact.
        const std::string& s = target.as_text();
        std::vector<std::size_t> starts;
        for (std::size_t b = 0; b < s.size(); ++b) {
            if ((static_cast<unsigned char>(s[b]) & 0xC0) != 0x80) starts.push_back(b);
        }
        std::size_t k = pick(static_cast<long long>(starts.size()));
        std::size_t end = k + 1 < starts.size() ? starts[k + 1] : s.size();
        return Value::text(s.substr(starts[k], end - starts[k]));
    }
    mismatch("indexing", "list or text", target);
}

} // namespace hintcoach::action
