// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/action/value.hpp"

#include <charconv>
#include <cmath>
#include <cctype>

namespace hintcoach::action {

std::string kind_name(Kind kind) {
    switch (kind) {
    case Kind::Unit: return "unit";
    case Kind::Text: return "text";
    case Kind::Number: return "number";
    case Kind::Boolean: return "boolean";
    case Kind::List: return "list";
    case Kind::Table: return "table";
    case Kind::Graph: return "graph";
    }
    return "unit";
}

Value Value::text(std::string s) {
    Value v;
    v.storage_ = std::move(s);
    return v;
}

Value Value::number(double n) {
    Value v;
    v.storage_ = n;
    return v;
}

Value Value::boolean(bool b) {
    Value v;
    v.storage_ = b;
    return v;
}

Value Value::list(List items) {
    Value v;
    v.storage_ = std::move(items);
    return v;
}

Value Value::table(std::shared_ptr<const Table> t) {
    Value v;
    v.storage_ = TableRef{std::move(t)};
    return v;
}

Value Value::graph(std::shared_ptr<const OpaqueGraph> g) {
    Value v;
    v.storage_ = GraphRef{std::move(g)};
    return v;
}

Kind Value::kind() const {
    switch (storage_.index()) {
    case 0: return Kind::Unit;
    case 1: return Kind::Text;
    case 2: return Kind::Number;
    case 3: return Kind::Boolean;
    case 4: return Kind::List;
    case 5: return Kind::Table;
    default: return Kind::Graph;
    }
}

bool Value::operator==(const Value& other) const {
    if (kind() != other.kind()) return false;
    switch (kind()) {
    case Kind::Unit: return true;
    case Kind::Text: return as_text() == other.as_text();
    case Kind::Number: return as_number() == other.as_number();
    case Kind::Boolean: return as_boolean() == other.as_boolean();
    case Kind::List: return as_list() == other.as_list();
    case Kind::Table: {
        const auto& a = as_table();
        const auto& b = other.as_table();
        return a == b || (a && b && *a == *b);
    }
    case Kind::Graph: return as_graph() == other.as_graph();
    }
    return false;
}

namespace {

std::string render_table(const Table& table) {
    constexpr std::size_t kPreviewRows = 10;
    std::string out = "Table '" + table.name + "'\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c > 0) out += " | ";
        out += table.columns[c];
    }
    out += "\n";
    for (std::size_t r = 0; r < table.rows.size() && r < kPreviewRows; ++r) {
        for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
            if (c > 0) out += " | ";
            out += table.rows[r][c];
        }
        out += "\n";
    }
    if (table.rows.size() > kPreviewRows) out += "...\n";
    out += "[" + std::to_string(table.rows.size()) + " rows x " + std::to_string(table.columns.size()) + " columns]";
    return out;
}

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

} // namespace

std::string to_repr(const Value& value) {
    switch (value.kind()) {
    case Kind::Unit: return "None";
    case Kind::Text: return quote(value.as_text());
    case Kind::Number: return format_number(value.as_number());
    case Kind::Boolean: return value.as_boolean() ? "True" : "False";
    case Kind::List: {
        std::string out = "[";
        const auto& items = value.as_list();
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i > 0) out += ", ";
            out += to_repr(items[i]);
        }
        return out + "]";
    }
    case Kind::Table: return render_table(*value.as_table());
    case Kind::Graph: return "<graph: " + value.as_graph()->describe() + ">";
    }
    return "None";
}

std::string to_display(const Value& value) {
    if (value.kind() == Kind::Text) return value.as_text();
    return to_repr(value);
}

std::string format_number(double value) {
    if (value == 0.0) return "0";
    if (std::nearbyint(value) == value && std::fabs(value) < 1e15) {
        return std::to_string(static_cast<long long>(value));
    }
    char buf[64];
    auto result = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, result.ptr);
}

std::optional<double> parse_number(std::string_view text) {
    std::size_t b = 0;
    std::size_t e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    auto s = text.substr(b, e - b);
    if (s.empty()) return std::nullopt;

    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') {
        negative = s[i] == '-';
        ++i;
    }
    std::size_t digits_start = i;
    std::size_t int_digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++int_digits;
    std::size_t frac_digits = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++frac_digits;
    }
    if (int_digits + frac_digits == 0) return std::nullopt;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        std::size_t exp_digits = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++exp_digits;
        if (exp_digits == 0) return std::nullopt;
    }
    if (i != s.size()) return std::nullopt;

    auto body = s.substr(digits_start);
    double value = 0.0;
    auto result = std::from_chars(body.data(), body.data() + body.size(), value);
    if (result.ec != std::errc{} || result.ptr != body.data() + body.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return negative ? -value : value;
}

double round_decimal(double value, int ndigits) {
    if (!std::isfinite(value) || std::fabs(value) >= 1e15 || ndigits < 0) return value;
    char buf[400];
    auto result = std::to_chars(buf, buf + sizeof buf, std::fabs(value), std::chars_format::fixed);
    std::string s(buf, result.ptr);
    auto dot = s.find('.');
    std::string int_part = dot == std::string::npos ? s : s.substr(0, dot);
    std::string frac_part = dot == std::string::npos ? "" : s.substr(dot + 1);
    if (frac_part.size() <= static_cast<std::size_t>(ndigits)) return value;

    bool round_up = frac_part[static_cast<std::size_t>(ndigits)] >= '5';
    std::string digits = int_part + frac_part.substr(0, static_cast<std::size_t>(ndigits));
    if (round_up) {
        int i = static_cast<int>(digits.size()) - 1;
        while (i >= 0) {
            if (digits[static_cast<std::size_t>(i)] == '9') {
                digits[static_cast<std::size_t>(i)] = '0';
                --i;
            } else {
                ++digits[static_cast<std::size_t>(i)];
                break;
            }
        }
        if (i < 0) digits.insert(digits.begin(), '1');
    }
    std::string rebuilt = digits;
    if (ndigits > 0) rebuilt.insert(rebuilt.size() - static_cast<std::size_t>(ndigits), ".");
    double out = 0.0;
    std::from_chars(rebuilt.data(), rebuilt.data() + rebuilt.size(), out);
    return value < 0 ? -out : out;
}

} // namespace hintcoach::action
