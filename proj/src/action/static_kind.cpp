// SPDX-License-Identifier: Apache-2.0
#include "hintcoach/action/static_kind.hpp"

#include "hintcoach/action/parser.hpp"
#include "hintcoach/core/error.hpp"

namespace hintcoach::action {

std::string static_kind_name(StaticKind kind) {
    switch (kind) {
    case StaticKind::Unknown: return "unknown";
    case StaticKind::Unit: return "unit";
    case StaticKind::Text: return "text";
    case StaticKind::Number: return "number";
    case StaticKind::Boolean: return "boolean";
    case StaticKind::List: return "list";
    case StaticKind::Table: return "table";
    case StaticKind::Graph: return "graph";
    }
    return "unknown";
}

StaticKind parse_static_kind(const std::string& name) {
    for (auto k : {StaticKind::Unknown, StaticKind::Unit, StaticKind::Text, StaticKind::Number, StaticKind::Boolean,
                   StaticKind::List, StaticKind::Table, StaticKind::Graph}) {
        if (static_kind_name(k) == name) return k;
    }
    throw ValidationError("kind", "unknown value kind '" + name + "'");
}

namespace {

const KindMap kBuiltinReturns = {
    {"print", StaticKind::Unit},       {"len", StaticKind::Number},     {"sum", StaticKind::Number},
    {"abs", StaticKind::Number},       {"round", StaticKind::Number},   {"split", StaticKind::List},
    {"join", StaticKind::Text},        {"to_number", StaticKind::Number}, {"to_numbers", StaticKind::List},
    {"to_text", StaticKind::Text},     {"contains", StaticKind::Boolean}, {"unique", StaticKind::List},
    {"sort", StaticKind::List},
};

class Analyzer {
public:
    Analyzer(KindMap bindings, const KindMap& tools) : bindings_(std::move(bindings)), tools_(tools) {}

    StaticKind infer(const Expr& e) {
        switch (e.kind) {
        case Expr::Kind::Number: return StaticKind::Number;
        case Expr::Kind::String: return StaticKind::Text;
        case Expr::Kind::Boolean: return StaticKind::Boolean;
        case Expr::Kind::Identifier: {
            auto it = bindings_.find(e.text);
            return it == bindings_.end() ? StaticKind::Unknown : it->second;
        }
        case Expr::Kind::List:
            for (const auto& c : e.children) infer(*c);
            return StaticKind::List;
        case Expr::Kind::Index: {
            StaticKind target = infer(*e.children[0]);
            infer(*e.children[1]);
            return target == StaticKind::Text ? StaticKind::Text : StaticKind::Unknown;
        }
        case Expr::Kind::Unary: infer(*e.children[0]); return StaticKind::Number;
        case Expr::Kind::Binary: {
            StaticKind l = infer(*e.children[0]);
            StaticKind r = infer(*e.children[1]);
            const std::string& op = e.text;
            if (op == "+") return l == r ? l : StaticKind::Unknown;
            if (op == "-" || op == "*" || op == "/") return StaticKind::Number;
            return StaticKind::Boolean;
        }
        case Expr::Kind::Call: {
            CallSite site;
            site.name = e.text;
            site.line = e.line;
            for (const auto& c : e.children) site.args.push_back(infer(*c));
            calls.push_back(site);
            if (auto it = kBuiltinReturns.find(e.text); it != kBuiltinReturns.end()) return it->second;
            if ((e.text == "min" || e.text == "max") && site.args.size() >= 2) {
                bool same = true;
                for (auto k : site.args) same = same && k == site.args.front();
                return same ? site.args.front() : StaticKind::Unknown;
            }
            if (auto it = tools_.find(e.text); it != tools_.end()) return it->second;
            return StaticKind::Unknown;
        }
        }
        return StaticKind::Unknown;
    }

    KindMap bindings_;
    std::vector<CallSite> calls;

private:
    const KindMap& tools_;
};

} // namespace

StaticSummary analyze_cell(const std::string& code, const KindMap& prior, const KindMap& tool_returns) {
    StaticSummary summary;
    summary.bindings = prior;
    Program program;
    try {
        program = parse(code);
    } catch (const SyntaxError&) {
        return summary;
    }
    Analyzer analyzer(prior, tool_returns);
    for (const auto& st : program.statements) {
        StaticKind k = analyzer.infer(*st.expr);
        if (st.kind == Statement::Kind::Assignment) analyzer.bindings_[st.name] = k;
    }
    summary.parsed = true;
    summary.calls = std::move(analyzer.calls);
    summary.bindings = std::move(analyzer.bindings_);
    return summary;
}

} // namespace hintcoach::action
