// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hintcoach::action {

inline constexpr std::size_t kMaxListElements = 10'000;
inline constexpr std::size_t kMaxTextLength = 100'000;

/// Tabular payload behind a table handle. Every cell is text.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    bool operator==(const Table&) const = default;
};

/// Payload behind a graph handle. Layout is private to whoever provides it.
class OpaqueGraph {
public:
    virtual ~OpaqueGraph() = default;
    virtual std::string describe() const = 0;
};

struct Unit {
    bool operator==(const Unit&) const = default;
};

struct TableRef {
    std::shared_ptr<const Table> table;
};

struct GraphRef {
    std::shared_ptr<const OpaqueGraph> graph;
};

enum class Kind { Unit, Text, Number, Boolean, List, Table, Graph };

std::string kind_name(Kind kind);

class Value;
using List = std::vector<Value>;

class Value {
public:
    Value() = default;

    static Value unit() { return Value(); }
    static Value text(std::string s);
    static Value number(double n);
    static Value boolean(bool b);
    static Value list(List items);
    static Value table(std::shared_ptr<const Table> t);
    static Value graph(std::shared_ptr<const OpaqueGraph> g);

    Kind kind() const;

    bool is_text() const { return kind() == Kind::Text; }
    bool is_number() const { return kind() == Kind::Number; }
    bool is_list() const { return kind() == Kind::List; }

    const std::string& as_text() const { return std::get<std::string>(storage_); }
    double as_number() const { return std::get<double>(storage_); }
    bool as_boolean() const { return std::get<bool>(storage_); }
    const List& as_list() const { return std::get<List>(storage_); }
    const std::shared_ptr<const Table>& as_table() const { return std::get<TableRef>(storage_).table; }
    const std::shared_ptr<const OpaqueGraph>& as_graph() const { return std::get<GraphRef>(storage_).graph; }

    /// Deep structural equality. Tables compare by content, graphs by identity.
    bool operator==(const Value& other) const;

private:
    std::variant<Unit, std::string, double, bool, List, TableRef, GraphRef> storage_;
};

/// Text as shown by print(): texts unquoted, everything else as in repr().
std::string to_display(const Value& value);
/// Literal-like rendering used inside lists: texts quoted.
std::string to_repr(const Value& value);

/// Integral values print without a fractional part; others use the shortest round-trip form.
std::string format_number(double value);
/// Strict decimal parse (optional sign, digits, optional fraction/exponent, surrounding
/// whitespace allowed). Rejects inf/nan, hex and trailing garbage.
std::optional<double> parse_number(std::string_view text);
/// Decimal rounding, half away from zero, applied to the shortest decimal form of `value`.
double round_decimal(double value, int ndigits);

} // namespace hintcoach::action
