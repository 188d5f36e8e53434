#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psomodes/error.hpp"
#include "psomodes/units.hpp"

namespace psomodes {

/// Right-hand side of key=value, or the value of a param statement.
struct ParamValue {
    enum class Kind { Number, Reference, Text };
    Kind kind = Kind::Number;
    double number = 0.0;                ///< SI value when kind == Number
    Dimension dim = Dimension::None;    ///< unit written in the source; None for bare numbers
    std::string text;                   ///< parameter name (Reference) or literal (Text)
    Location loc;

    bool operator==(const ParamValue& o) const {
        return kind == o.kind && number == o.number && dim == o.dim && text == o.text;
    }
};

/// One netlist line. `args` are positional words; for `param` and `region` they are the name
/// followed by everything after '='.
struct Statement {
    std::string kind;
    std::vector<std::string> args;
    std::vector<std::pair<std::string, ParamValue>> params;
    std::vector<std::string> flags;
    Location loc;

    const ParamValue* find(std::string_view key) const {
        for (const auto& [k, v] : params) {
            if (k == key) return &v;
        }
        return nullptr;
    }

    ParamValue* find(std::string_view key) {
        for (auto& [k, v] : params) {
            if (k == key) return &v;
        }
        return nullptr;
    }

    bool has_flag(std::string_view f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }

    /// Name other statements and parameter paths use to refer to this record ("" if unnamed).
    std::string name() const {
        if (kind == "tap") return args.size() > 1 ? args[1] : "";
        if (kind == "semi_infinite") {
            const auto* p = find("port");
            return p ? p->text : "";
        }
        if (kind == "branch" || kind == "sweep") return "";
        return args.empty() ? "" : args[0];
    }

    bool operator==(const Statement& o) const {
        return kind == o.kind && args == o.args && params == o.params && flags == o.flags;
    }
};

struct Netlist {
    std::vector<Statement> statements;

    bool operator==(const Netlist& o) const { return statements == o.statements; }

    const Statement* find(std::string_view kind, std::string_view name) const {
        for (const auto& s : statements) {
            if (s.kind == kind && s.name() == name) return &s;
        }
        return nullptr;
    }

    std::vector<const Statement*> all(std::string_view kind) const {
        std::vector<const Statement*> out;
        for (const auto& s : statements) {
            if (s.kind == kind) out.push_back(&s);
        }
        return out;
    }
};

namespace detail {

struct KeySpec {
    std::string_view key;
    Dimension dim;
    bool required;
    bool text = false;
};

struct KindSpec {
    std::string_view kind;
    int min_args;
    int max_args;  ///< -1: unbounded (after '=')
    bool equals;   ///< "<kind> <name> = ..." form
    std::vector<KeySpec> keys;
    std::vector<std::string_view> flags;
};

inline const std::vector<KindSpec>& kind_specs() {
    using D = Dimension;
    static const std::vector<KindSpec> specs{
        {"node", 1, 1, false, {}, {}},
        {"branch", 2, 2, false, {{"L", D::Inductance, false}, {"C", D::Capacitance, false}, {"R", D::Resistance, false}}, {}},
        {"port", 3, 3, false, {}, {}},
        {"tline", 3, 3, false,
         {{"len", D::Length, true}, {"z0", D::Resistance, true}, {"v", D::Velocity, true}, {"delta", D::Length, true},
          {"short", D::None, false, true}},
         {}},
        {"tap", 2, 2, false, {{"at", D::Length, true}, {"from", D::None, false, true}}, {}},
        {"semi_infinite", 2, 2, false, {{"z0", D::Resistance, true}, {"port", D::None, false, true}}, {}},
        {"transmon", 3, 3, false, {{"Lj", D::Inductance, true}, {"Cj", D::Capacitance, true}}, {}},
        {"region", 2, -1, true, {}, {}},
        {"sweep", 1, 1, false, {{"from", D::None, true}, {"to", D::None, true}, {"points", D::None, true}}, {"log"}},
        {"param", 1, 1, true, {}, {}},
    };
    return specs;
}

inline const KindSpec* kind_spec(std::string_view kind) {
    for (const auto& s : kind_specs()) {
        if (s.kind == kind) return &s;
    }
    return nullptr;
}

inline bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
}

struct Token {
    std::string text;
    int column;
};

inline std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        out.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
    }
    return out;
}

inline ParamValue parse_value(const std::string& text, Location loc, bool literal) {
    ParamValue v;
    v.loc = loc;
    if (text.empty()) throw Error(ErrorCode::SyntaxError, "missing value", loc);
    if (literal) {
        v.kind = ParamValue::Kind::Text;
        v.text = text;
        return v;
    }
    const char c = text[0];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
        Quantity q;
        std::size_t offset = 0;
        switch (parse_quantity(text, q, offset)) {
        case QuantityStatus::Ok:
            v.kind = ParamValue::Kind::Number;
            v.number = q.value;
            v.dim = q.dim;
            return v;
        case QuantityStatus::UnknownUnit:
            throw Error(ErrorCode::UnknownUnit, "unknown unit '" + text.substr(offset) + "' in '" + text + "'",
                        {loc.line, loc.column + static_cast<int>(offset)});
        case QuantityStatus::NotANumber:
            throw Error(ErrorCode::SyntaxError, "malformed number '" + text + "'", loc);
        }
    }
    if (!is_identifier(text)) throw Error(ErrorCode::SyntaxError, "expected a number or a parameter name, got '" + text + "'", loc);
    v.kind = ParamValue::Kind::Reference;
    v.text = text;
    return v;
}

inline void check_dimension(const ParamValue& v, Dimension expected, std::string_view key) {
    if (v.kind == ParamValue::Kind::Number && v.dim != Dimension::None && expected != Dimension::None &&
        v.dim != expected) {
        throw Error(ErrorCode::UnknownUnit,
                    std::string(key) + " expects a " + to_string(expected) + ", got a " + to_string(v.dim), v.loc);
    }
}

} // namespace detail

/// Parses the line-oriented netlist format. '#' starts a comment. Statement kinds:
///   node <name>
///   branch <n1> <n2> [L=] [C=] [R=]
///   port <name> <n1> <n2>
///   tline <prefix> <n1> <n2> len= z0= v= delta= [short=left|right|both|none]
///   tap <tline> <name> at= [from=left|right]
///   semi_infinite <n1> <n2> z0= [port=<name>]
///   transmon <name> <n1> <n2> Lj= Cj=
///   region <name> = <tline>|<node> ...
///   sweep <param-path> from= to= points= [log]
///   param <name> = <value>
/// Values are numbers with optional unit suffix or names of params.
inline Netlist parse_netlist(std::string_view text) {
    Netlist net;
    std::set<std::string> names, region_names;  // regions have their own namespace
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const auto tokens = detail::tokenize(line);
        if (tokens.empty()) {
            if (eol == text.size()) break;
            continue;
        }

        Statement st;
        st.kind = tokens[0].text;
        st.loc = {line_no, tokens[0].column};
        const auto* spec = detail::kind_spec(st.kind);
        if (!spec) throw Error(ErrorCode::SyntaxError, "unknown statement '" + st.kind + "'", st.loc);

        bool after_equals = false;
        for (std::size_t t = 1; t < tokens.size(); ++t) {
            const auto& tok = tokens[t];
            const Location loc{line_no, tok.column};
            if (spec->equals && tok.text == "=") {
                if (after_equals || st.args.size() != 1) throw Error(ErrorCode::SyntaxError, "misplaced '='", loc);
                after_equals = true;
                continue;
            }
            if (after_equals && st.kind == "param") {
                if (st.params.size() == 1) throw Error(ErrorCode::SyntaxError, "param takes a single value", loc);
                st.params.emplace_back("value", detail::parse_value(tok.text, loc, false));
                continue;
            }
            if (after_equals) {
                std::stringstream members(tok.text);
                std::string item;
                while (std::getline(members, item, ',')) {
                    if (!item.empty()) st.args.push_back(item);
                }
                continue;
            }
            const auto eq = tok.text.find('=');
            if (eq != std::string::npos) {
                const std::string key = tok.text.substr(0, eq);
                const auto key_spec = std::find_if(spec->keys.begin(), spec->keys.end(),
                                                   [&](const detail::KeySpec& k) { return k.key == key; });
                if (key_spec == spec->keys.end()) {
                    throw Error(ErrorCode::SyntaxError, "unknown key '" + key + "' for " + st.kind, loc);
                }
                if (st.find(key)) throw Error(ErrorCode::DuplicateName, "key '" + key + "' given twice", loc);
                const Location vloc{line_no, tok.column + static_cast<int>(eq) + 1};
                auto value = detail::parse_value(tok.text.substr(eq + 1), vloc, key_spec->text);
                detail::check_dimension(value, key_spec->dim, key);
                st.params.emplace_back(key, std::move(value));
                continue;
            }
            if (std::find(spec->flags.begin(), spec->flags.end(), tok.text) != spec->flags.end()) {
                st.flags.push_back(tok.text);
                continue;
            }
            if (!st.params.empty()) {
                throw Error(ErrorCode::SyntaxError, "positional argument '" + tok.text + "' after key=value", loc);
            }
            st.args.push_back(tok.text);
        }

        const int nargs = static_cast<int>(st.args.size());
        if (spec->equals && !after_equals) throw Error(ErrorCode::SyntaxError, st.kind + " needs '<name> = ...'", st.loc);
        if (nargs < spec->min_args || (spec->max_args >= 0 && nargs > spec->max_args)) {
            throw Error(ErrorCode::SyntaxError, st.kind + " takes " + std::to_string(spec->min_args - (spec->equals ? 1 : 0)) +
                                                    " positional argument(s), got " + std::to_string(nargs - (spec->equals ? 1 : 0)),
                        st.loc);
        }
        for (const auto& k : spec->keys) {
            if (k.required && !st.find(k.key)) {
                throw Error(ErrorCode::MissingParameter, st.kind + " requires " + std::string(k.key) + "=", st.loc);
            }
        }
        if (st.kind == "param" && st.params.size() != 1) {
            throw Error(ErrorCode::MissingParameter, "param needs a value after '='", st.loc);
        }
        if (st.kind == "branch" && st.params.empty()) {
            throw Error(ErrorCode::MissingParameter, "branch needs at least one of L=, C=, R=", st.loc);
        }
        for (const auto& [key, v] : st.params) {
            if (v.kind != ParamValue::Kind::Text) continue;
            const bool ok = (key == "short" && (v.text == "left" || v.text == "right" || v.text == "both" || v.text == "none")) ||
                            (key == "from" && (v.text == "left" || v.text == "right")) || key == "port";
            if (!ok) throw Error(ErrorCode::SyntaxError, "invalid value '" + v.text + "' for " + key, v.loc);
        }
        if (st.kind == "sweep") {
            const auto* p = st.find("points");
            if (p->kind != ParamValue::Kind::Number || p->number < 1 || p->number != std::floor(p->number)) {
                throw Error(ErrorCode::SyntaxError, "points must be a positive integer", p->loc);
            }
        }
        const std::string name = st.name();
        auto& scope = st.kind == "region" ? region_names : names;
        if (!name.empty() && !scope.insert(name).second) {
            throw Error(ErrorCode::DuplicateName, "name '" + name + "' is already declared", st.loc);
        }
        net.statements.push_back(std::move(st));
        if (eol == text.size()) break;
    }

    // Every reference must name a param, and dimensions must agree.
    std::map<std::string, const Statement*> params;
    for (const auto& s : net.statements) {
        if (s.kind == "param") params[s.args[0]] = &s;
    }
    for (const auto& s : net.statements) {
        const auto* spec = detail::kind_spec(s.kind);
        for (const auto& [key, v] : s.params) {
            if (v.kind != ParamValue::Kind::Reference) continue;
            auto it = params.find(v.text);
            if (it == params.end()) {
                throw Error(ErrorCode::UnresolvedParameter, "no param named '" + v.text + "'", v.loc);
            }
            Dimension expected = Dimension::None;
            for (const auto& k : spec->keys) {
                if (k.key == key) expected = k.dim;
            }
            ParamValue target = it->second->params[0].second;
            target.loc = v.loc;
            detail::check_dimension(target, expected, key);
        }
    }
    return net;
}

/// Value of a number or (chain of) param reference(s), in SI units.
inline double resolve_value(const Netlist& net, const ParamValue& v) {
    const ParamValue* cur = &v;
    for (int depth = 0; depth < 64; ++depth) {
        if (cur->kind == ParamValue::Kind::Number) return cur->number;
        if (cur->kind == ParamValue::Kind::Text) {
            throw Error(ErrorCode::UnresolvedParameter, "'" + cur->text + "' is not numeric", cur->loc);
        }
        const Statement* p = net.find("param", cur->text);
        if (!p) throw Error(ErrorCode::UnresolvedParameter, "no param named '" + cur->text + "'", cur->loc);
        cur = &p->params[0].second;
    }
    throw Error(ErrorCode::UnresolvedParameter, "cyclic param references", v.loc);
}

/// Resolves "name" (a param) or "record.key" (a key of a named statement) to its SI value.
inline double parameter_value(const Netlist& net, const std::string& path) {
    if (const Statement* p = net.find("param", path)) return resolve_value(net, p->params[0].second);
    const auto dot = path.rfind('.');
    if (dot != std::string::npos) {
        const std::string rec = path.substr(0, dot), key = path.substr(dot + 1);
        for (const auto& s : net.statements) {
            if (s.name() == rec) {
                if (const auto* v = s.find(key)) return resolve_value(net, *v);
            }
        }
    }
    throw Error(ErrorCode::UnresolvedParameter, "parameter path '" + path + "' does not resolve");
}

/// Copy of the netlist with one parameter replaced by a number (SI units).
inline Netlist with_parameter(Netlist net, const std::string& path, double value) {
    for (auto& s : net.statements) {
        if (s.kind == "param" && s.args[0] == path) {
            auto& v = s.params[0].second;
            v.kind = ParamValue::Kind::Number;
            v.number = value;
            v.text.clear();
            return net;
        }
    }
    const auto dot = path.rfind('.');
    if (dot != std::string::npos) {
        const std::string rec = path.substr(0, dot), key = path.substr(dot + 1);
        for (auto& s : net.statements) {
            if (s.name() != rec) continue;
            if (auto* v = s.find(key); v && v->kind != ParamValue::Kind::Text) {
                Dimension dim = v->dim;
                if (v->kind == ParamValue::Kind::Reference) {
                    if (const auto* p = net.find("param", v->text)) dim = p->params[0].second.dim;
                }
                v->kind = ParamValue::Kind::Number;
                v->number = value;
                v->dim = dim;
                v->text.clear();
                return net;
            }
        }
    }
    throw Error(ErrorCode::UnresolvedParameter, "parameter path '" + path + "' does not resolve");
}

namespace detail {

inline std::string format_value(const ParamValue& v) {
    switch (v.kind) {
    case ParamValue::Kind::Number: return format_quantity(v.number, v.dim);
    case ParamValue::Kind::Reference:
    case ParamValue::Kind::Text: return v.text;
    }
    return "";
}

} // namespace detail

/// Canonical text form; parse_netlist(serialize(n)) == n. Comments and layout are not kept.
inline std::string serialize(const Netlist& net) {
    std::string out;
    for (const auto& s : net.statements) {
        out += s.kind;
        if (s.kind == "param") {
            out += " " + s.args[0] + " = " + detail::format_value(s.params[0].second);
        } else if (s.kind == "region") {
            out += " " + s.args[0] + " =";
            for (std::size_t i = 1; i < s.args.size(); ++i) out += " " + s.args[i];
        } else {
            for (const auto& a : s.args) out += " " + a;
            for (const auto& [k, v] : s.params) out += " " + k + "=" + detail::format_value(v);
            for (const auto& f : s.flags) out += " " + f;
        }
        out += "\n";
    }
    return out;
}

} // namespace psomodes
