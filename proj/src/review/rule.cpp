// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/review/rule.hpp"

#include <optional>
#include <regex>
#include <vector>

#include "hintcoach/core/error.hpp"
#include "hintcoach/core/text.hpp"
#include "hintcoach/world/tools.hpp"

namespace hintcoach::review {

struct RulePredicate::Node {
    enum class Type { AnyOf, AllOf, Not, Contains, Regex, Calls, ParseFails };
    Type type = Type::Contains;
    std::vector<std::shared_ptr<const Node>> children;
    std::string target;
    std::string needle;
    std::optional<std::regex> pattern;
    std::string tool;
    std::optional<std::size_t> arg_count;
    std::optional<std::size_t> arg_index;
    std::optional<action::StaticKind> kind_is;
    std::optional<action::StaticKind> kind_is_not;
};

namespace {

using Node = RulePredicate::Node;

[[noreturn]] void bad(const std::string& what, const nlohmann::json& node) {
    throw ConfigurationError("malformed rule: " + what + " in " + node.dump());
}

std::string require_string(const nlohmann::json& node, const char* key) {
    if (!node.contains(key) || !node.at(key).is_string()) bad(std::string("'") + key + "' must be a string", node);
    return node.at(key).get<std::string>();
}

std::size_t require_count(const nlohmann::json& node, const char* key) {
    const auto& v = node.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) bad(std::string("'") + key + "' must be a count", node);
    return v.get<std::size_t>();
}

action::StaticKind require_kind(const nlohmann::json& node, const char* key) {
    try {
        return action::parse_static_kind(require_string(node, key));
    } catch (const ValidationError&) {
        bad(std::string("unknown kind in '") + key + "'", node);
    }
}

std::shared_ptr<const Node> compile_node(const nlohmann::json& j) {
    if (!j.is_object()) bad("predicate must be an object", j);
    auto node = std::make_shared<Node>();

    auto compile_list = [&](const char* key, Node::Type type) {
        const auto& list = j.at(key);
        if (!list.is_array() || list.empty()) bad(std::string("'") + key + "' needs a non-empty list", j);
        node->type = type;
        for (const auto& child : list) node->children.push_back(compile_node(child));
    };

    if (j.contains("any_of")) {
        compile_list("any_of", Node::Type::AnyOf);
    } else if (j.contains("all_of")) {
        compile_list("all_of", Node::Type::AllOf);
    } else if (j.contains("not")) {
        node->type = Node::Type::Not;
        node->children.push_back(compile_node(j.at("not")));
    } else if (j.contains("target")) {
        node->target = require_string(j, "target");
        if (node->target != "monologue" && node->target != "code" && node->target != "observation") {
            bad("target must be monologue, code or observation", j);
        }
        if (j.contains("contains")) {
            node->type = Node::Type::Contains;
            node->needle = require_string(j, "contains");
        } else if (j.contains("regex")) {
            node->type = Node::Type::Regex;
            node->needle = require_string(j, "regex");
            try {
                node->pattern.emplace(node->needle, std::regex::ECMAScript);
            } catch (const std::regex_error& e) {
                bad(std::string("invalid regex (") + e.what() + ")", j);
            }
        } else {
            bad("target needs 'contains' or 'regex'", j);
        }
    } else if (j.contains("calls")) {
        node->type = Node::Type::Calls;
        node->tool = require_string(j, "calls");
        if (j.contains("args")) node->arg_count = require_count(j, "args");
        if (j.contains("kind_is") || j.contains("kind_is_not")) {
            if (!j.contains("arg")) bad("kind checks need 'arg'", j);
            node->arg_index = require_count(j, "arg");
            if (j.contains("kind_is")) node->kind_is = require_kind(j, "kind_is");
            if (j.contains("kind_is_not")) node->kind_is_not = require_kind(j, "kind_is_not");
        } else if (j.contains("arg")) {
            bad("'arg' needs kind_is or kind_is_not", j);
        }
    } else if (j.contains("parse_fails")) {
        if (!j.at("parse_fails").is_boolean() || !j.at("parse_fails").get<bool>()) bad("parse_fails must be true", j);
        node->type = Node::Type::ParseFails;
    } else {
        bad("unknown predicate", j);
    }
    return node;
}

const std::string& target_text(const Node& node, const Step& step) {
    if (node.target == "monologue") return step.monologue;
    if (node.target == "code") return step.code;
    return step.observation;
}

bool call_matches(const Node& node, const action::CallSite& call) {
    if (call.name != node.tool) return false;
    if (node.arg_count && call.args.size() != *node.arg_count) return false;
    if (node.arg_index) {
        if (*node.arg_index >= call.args.size()) return false;
        auto kind = call.args[*node.arg_index];
        if (kind == action::StaticKind::Unknown) return false;
        if (node.kind_is && kind != *node.kind_is) return false;
        if (node.kind_is_not && kind == *node.kind_is_not) return false;
    }
    return true;
}

bool eval(const Node& node, const Step& step, const action::KindMap& prior,
          std::optional<action::StaticSummary>& summary) {
    auto analyzed = [&]() -> const action::StaticSummary& {
        if (!summary) summary = action::analyze_cell(step.code, prior, world::tool_return_kinds());
        return *summary;
    };
    switch (node.type) {
    case Node::Type::AnyOf:
        for (const auto& c : node.children)
            if (eval(*c, step, prior, summary)) return true;
        return false;
    case Node::Type::AllOf:
        for (const auto& c : node.children)
            if (!eval(*c, step, prior, summary)) return false;
        return true;
    case Node::Type::Not: return !eval(*node.children.front(), step, prior, summary);
    case Node::Type::Contains: return contains(target_text(node, step), node.needle);
    case Node::Type::Regex: return std::regex_search(target_text(node, step), *node.pattern);
    case Node::Type::Calls:
        for (const auto& call : analyzed().calls)
            if (call_matches(node, call)) return true;
        return false;
    case Node::Type::ParseFails: return !analyzed().parsed;
    }
    return false;
}

} // namespace

RulePredicate RulePredicate::compile(const nlohmann::json& rule) { return RulePredicate(compile_node(rule)); }

bool RulePredicate::matches(const Step& step, const action::KindMap& prior) const {
    std::optional<action::StaticSummary> summary;
    return eval(*root_, step, prior, summary);
}

} // namespace hintcoach::review
