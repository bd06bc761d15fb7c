#pragma once

#include "lumpcheck/errors.hpp"

#include <cctype>
#include <charconv>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

namespace lumpcheck::pctl {

enum class Comparison { Less, LessEqual, Greater, GreaterEqual };
enum class QueryMode { Plain, Min, Max };

/// Step bound of an until/globally; kUnbounded stands for infinity.
using Bound = std::size_t;
inline constexpr Bound kUnbounded = std::numeric_limits<Bound>::max();

struct StateFormula;
struct PathFormula;
using StatePtr = std::shared_ptr<const StateFormula>;
using PathPtr = std::shared_ptr<const PathFormula>;

struct True {};
struct Atom {
    std::string name;
};
struct And {
    StatePtr lhs, rhs;
};
struct Not {
    StatePtr operand;
};
struct Prob {
    Comparison cmp;
    double threshold;
    PathPtr path;
};
/// P=?, Pmin=?, Pmax=?. A complemented query reports one minus the value of its path, which
/// is how desugaring removes Globally from a query.
struct ProbQuery {
    QueryMode mode;
    PathPtr path;
    bool complement = false;
};

struct StateFormula {
    std::variant<True, Atom, And, Not, Prob, ProbQuery> node;
};

struct Next {
    StatePtr operand;
};
struct Until {
    StatePtr lhs, rhs;
    Bound bound = kUnbounded;
};
/// Surface syntax only; desugar() rewrites it to Until.
struct Globally {
    StatePtr operand;
    Bound bound = kUnbounded;
};

struct PathFormula {
    std::variant<Next, Until, Globally> node;
};

// Builders

inline StatePtr make_true() { return std::make_shared<const StateFormula>(StateFormula{True{}}); }
inline StatePtr atom(std::string name) {
    return std::make_shared<const StateFormula>(StateFormula{Atom{std::move(name)}});
}
inline StatePtr conj(StatePtr a, StatePtr b) {
    return std::make_shared<const StateFormula>(StateFormula{And{std::move(a), std::move(b)}});
}
inline StatePtr negate(StatePtr a) {
    return std::make_shared<const StateFormula>(StateFormula{Not{std::move(a)}});
}
inline StatePtr prob(Comparison cmp, double p, PathPtr path) {
    if (!(p >= 0.0 && p <= 1.0)) throw ThresholdOutOfRange(p);
    return std::make_shared<const StateFormula>(StateFormula{Prob{cmp, p, std::move(path)}});
}
inline StatePtr query(QueryMode mode, PathPtr path, bool complement = false) {
    return std::make_shared<const StateFormula>(StateFormula{ProbQuery{mode, std::move(path), complement}});
}
inline PathPtr next(StatePtr a) { return std::make_shared<const PathFormula>(PathFormula{Next{std::move(a)}}); }
inline PathPtr until(StatePtr a, StatePtr b, Bound k = kUnbounded) {
    return std::make_shared<const PathFormula>(PathFormula{Until{std::move(a), std::move(b), k}});
}
inline PathPtr globally(StatePtr a, Bound k = kUnbounded) {
    return std::make_shared<const PathFormula>(PathFormula{Globally{std::move(a), k}});
}

// Structural equality

bool equal(const StateFormula& a, const StateFormula& b);
bool equal(const PathFormula& a, const PathFormula& b);

inline bool equal(const StateFormula& a, const StateFormula& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, True>) return true;
            else if constexpr (std::is_same_v<T, Atom>) return x.name == y.name;
            else if constexpr (std::is_same_v<T, And>) return equal(*x.lhs, *y.lhs) && equal(*x.rhs, *y.rhs);
            else if constexpr (std::is_same_v<T, Not>) return equal(*x.operand, *y.operand);
            else if constexpr (std::is_same_v<T, Prob>)
                return x.cmp == y.cmp && x.threshold == y.threshold && equal(*x.path, *y.path);
            else
                return x.mode == y.mode && x.complement == y.complement && equal(*x.path, *y.path);
        },
        a.node);
}

inline bool equal(const PathFormula& a, const PathFormula& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, Next>) return equal(*x.operand, *y.operand);
            else if constexpr (std::is_same_v<T, Until>)
                return x.bound == y.bound && equal(*x.lhs, *y.lhs) && equal(*x.rhs, *y.rhs);
            else
                return x.bound == y.bound && equal(*x.operand, *y.operand);
        },
        a.node);
}

inline bool operator==(const StateFormula& a, const StateFormula& b) { return equal(a, b); }
inline bool operator==(const PathFormula& a, const PathFormula& b) { return equal(a, b); }

// Printing

inline const char* to_string(Comparison c) {
    switch (c) {
    case Comparison::Less: return "<";
    case Comparison::LessEqual: return "<=";
    case Comparison::Greater: return ">";
    case Comparison::GreaterEqual: return ">=";
    }
    return "?";
}

namespace detail {

inline std::string format_threshold(double p) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, p);
    return std::string(buf, res.ptr);
}

inline std::string format_bound(Bound k) { return k == kUnbounded ? "" : "<=" + std::to_string(k); }

} // namespace detail

std::string to_string(const PathFormula& f);

/// Prints in the concrete syntax accepted by parse_formula; conjunctions are parenthesized.
inline std::string to_string(const StateFormula& f) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, True>) return "true";
            else if constexpr (std::is_same_v<T, Atom>) return "\"" + x.name + "\"";
            else if constexpr (std::is_same_v<T, And>)
                return "(" + to_string(*x.lhs) + " & " + to_string(*x.rhs) + ")";
            else if constexpr (std::is_same_v<T, Not>) return "!" + to_string(*x.operand);
            else if constexpr (std::is_same_v<T, Prob>)
                return std::string("P") + to_string(x.cmp) + detail::format_threshold(x.threshold) + " [ " +
                       to_string(*x.path) + " ]";
            else {
                QueryMode mode = x.mode;
                std::string body = to_string(*x.path);
                if (x.complement) {
                    // 1 - P[true U !phi] is P[G phi] with the optimisation direction swapped.
                    const auto* u = std::get_if<Until>(&x.path->node);
                    const auto* inner = u ? std::get_if<Not>(&u->rhs->node) : nullptr;
                    if (!inner) throw UnsupportedFormula("complemented query without a Globally form");
                    body = "G" + detail::format_bound(u->bound) + " " + to_string(*inner->operand);
                    if (mode == QueryMode::Min) mode = QueryMode::Max;
                    else if (mode == QueryMode::Max) mode = QueryMode::Min;
                }
                const char* head = mode == QueryMode::Plain ? "P=?" : mode == QueryMode::Min ? "Pmin=?" : "Pmax=?";
                return std::string(head) + " [ " + body + " ]";
            }
        },
        f.node);
}

inline std::string to_string(const PathFormula& f) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Next>) return "X " + to_string(*x.operand);
            else if constexpr (std::is_same_v<T, Until>)
                return to_string(*x.lhs) + " U" + detail::format_bound(x.bound) + " " + to_string(*x.rhs);
            else
                return "G" + detail::format_bound(x.bound) + " " + to_string(*x.operand);
        },
        f.node);
}

// Parsing

namespace detail {

enum class Tok {
    End, Ident, Number, String, LBracket, RBracket, LParen, RParen, Amp, Bang,
    Less, LessEq, Greater, GreaterEq, Query
};

struct Token {
    Tok kind;
    std::string text;
    std::size_t column; // 1-based
};

inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        const std::size_t col = i + 1;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isalpha(static_cast<unsigned char>(src[j]))) ++j;
            out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), col});
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t j = i;
            while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    j = k;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                }
            }
            out.push_back({Tok::Number, std::string(src.substr(i, j - i)), col});
            i = j;
        } else if (c == '"') {
            const std::size_t close = src.find('"', i + 1);
            if (close == std::string_view::npos) throw SyntaxError(col, "closing '\"'");
            out.push_back({Tok::String, std::string(src.substr(i + 1, close - i - 1)), col});
            i = close + 1;
        } else if (c == '<' || c == '>') {
            const bool eq = i + 1 < src.size() && src[i + 1] == '=';
            out.push_back({c == '<' ? (eq ? Tok::LessEq : Tok::Less) : (eq ? Tok::GreaterEq : Tok::Greater),
                           std::string(src.substr(i, eq ? 2 : 1)), col});
            i += eq ? 2 : 1;
        } else if (c == '=') {
            if (i + 1 < src.size() && src[i + 1] == '?') {
                out.push_back({Tok::Query, "=?", col});
                i += 2;
            } else {
                throw SyntaxError(col, "'=?'");
            }
        } else {
            Tok kind;
            switch (c) {
            case '[': kind = Tok::LBracket; break;
            case ']': kind = Tok::RBracket; break;
            case '(': kind = Tok::LParen; break;
            case ')': kind = Tok::RParen; break;
            case '&': kind = Tok::Amp; break;
            case '!': kind = Tok::Bang; break;
            default: throw SyntaxError(col, "a PCTL token");
            }
            out.push_back({kind, std::string(1, c), col});
            ++i;
        }
    }
    out.push_back({Tok::End, "", src.size() + 1});
    return out;
}

class Parser {
  public:
    explicit Parser(std::string_view src) : tokens_(tokenize(src)) {}

    StatePtr parse_top() {
        StatePtr f = state(true);
        expect(Tok::End, "end of input");
        return f;
    }

  private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& take() { return tokens_[pos_++]; }
    bool at(Tok kind) const { return peek().kind == kind; }
    bool at_ident(std::string_view name) const { return at(Tok::Ident) && peek().text == name; }
    const Token& expect(Tok kind, const char* what) {
        if (!at(kind)) throw SyntaxError(peek().column, what);
        return take();
    }

    StatePtr state(bool top) {
        StatePtr lhs = unary(top);
        while (at(Tok::Amp)) {
            take();
            lhs = conj(std::move(lhs), unary(false));
        }
        return lhs;
    }

    StatePtr unary(bool top) {
        if (at(Tok::Bang)) {
            take();
            return negate(unary(false));
        }
        return primary(top);
    }

    StatePtr primary(bool top) {
        const Token& t = peek();
        if (at(Tok::String)) {
            take();
            return atom(t.text);
        }
        if (at(Tok::LParen)) {
            take();
            StatePtr inner = state(false);
            expect(Tok::RParen, "')'");
            return inner;
        }
        if (at_ident("true")) {
            take();
            return make_true();
        }
        if (at_ident("P") || at_ident("Pmin") || at_ident("Pmax")) return probabilistic(top);
        throw SyntaxError(t.column, "a state formula ('true', quoted atom, '!', '(' or 'P')");
    }

    StatePtr probabilistic(bool top) {
        const Token head = take();
        if (at(Tok::Query)) {
            if (!top) throw SyntaxError(peek().column, "a comparison (queries are only allowed at the top level)");
            take();
            const QueryMode mode = head.text == "P" ? QueryMode::Plain
                                   : head.text == "Pmin" ? QueryMode::Min
                                                         : QueryMode::Max;
            PathPtr p = bracketed_path();
            return query(mode, std::move(p));
        }
        if (head.text != "P") throw SyntaxError(peek().column, "'=?'");
        Comparison cmp;
        switch (peek().kind) {
        case Tok::Less: cmp = Comparison::Less; break;
        case Tok::LessEq: cmp = Comparison::LessEqual; break;
        case Tok::Greater: cmp = Comparison::Greater; break;
        case Tok::GreaterEq: cmp = Comparison::GreaterEqual; break;
        default: throw SyntaxError(peek().column, "a comparison '<', '<=', '>', '>=' or '=?'");
        }
        take();
        const Token& num = expect(Tok::Number, "a probability threshold");
        double p = 0.0;
        auto res = std::from_chars(num.text.data(), num.text.data() + num.text.size(), p);
        if (res.ec != std::errc() || res.ptr != num.text.data() + num.text.size())
            throw SyntaxError(num.column, "a number");
        if (!(p >= 0.0 && p <= 1.0)) throw ThresholdOutOfRange(p);
        PathPtr path = bracketed_path();
        return prob(cmp, p, std::move(path));
    }

    PathPtr bracketed_path() {
        expect(Tok::LBracket, "'['");
        PathPtr p = path();
        expect(Tok::RBracket, "']'");
        return p;
    }

    Bound bound() {
        if (!at(Tok::LessEq)) return kUnbounded;
        take();
        const Token& num = expect(Tok::Number, "an integer step bound");
        Bound k = 0;
        auto res = std::from_chars(num.text.data(), num.text.data() + num.text.size(), k);
        if (res.ec != std::errc() || res.ptr != num.text.data() + num.text.size() || k == kUnbounded)
            throw SyntaxError(num.column, "an integer step bound");
        return k;
    }

    PathPtr path() {
        if (at_ident("X")) {
            take();
            return next(state(false));
        }
        if (at_ident("G")) {
            take();
            const Bound k = bound();
            return globally(state(false), k);
        }
        StatePtr lhs = state(false);
        if (!at_ident("U")) throw SyntaxError(peek().column, "'U'");
        take();
        const Bound k = bound();
        return until(std::move(lhs), state(false), k);
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Parses a PCTL state formula. Precedence: '!' binds tighter than '&'; '&' is
/// left-associative; queries (P=?, Pmin=?, Pmax=?) may only appear at the top level.
inline StatePtr parse_formula(std::string_view text) { return detail::Parser(text).parse_top(); }

// Desugaring

inline Comparison dual(Comparison c) {
    switch (c) {
    case Comparison::Less: return Comparison::Greater;
    case Comparison::LessEqual: return Comparison::GreaterEqual;
    case Comparison::Greater: return Comparison::Less;
    case Comparison::GreaterEqual: return Comparison::LessEqual;
    }
    return c;
}

inline QueryMode swap_mode(QueryMode m) {
    return m == QueryMode::Min ? QueryMode::Max : m == QueryMode::Max ? QueryMode::Min : m;
}

StatePtr desugar(const StatePtr& f);

/// Rewrites G<=k phi to true U<=k !phi. `complemented` tells the caller that the enclosing
/// probability must be replaced by one minus itself.
struct DesugaredPath {
    PathPtr path;
    bool complemented = false;
};

inline DesugaredPath desugar(const PathPtr& p) {
    return std::visit(
        [&](const auto& x) -> DesugaredPath {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Next>) return {next(desugar(x.operand)), false};
            else if constexpr (std::is_same_v<T, Until>)
                return {until(desugar(x.lhs), desugar(x.rhs), x.bound), false};
            else
                return {until(make_true(), negate(desugar(x.operand)), x.bound), true};
        },
        p->node);
}

/// Removes every Globally node, flipping comparisons and query directions as needed.
inline StatePtr desugar(const StatePtr& f) {
    return std::visit(
        [&](const auto& x) -> StatePtr {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, True> || std::is_same_v<T, Atom>) return f;
            else if constexpr (std::is_same_v<T, And>) return conj(desugar(x.lhs), desugar(x.rhs));
            else if constexpr (std::is_same_v<T, Not>) return negate(desugar(x.operand));
            else if constexpr (std::is_same_v<T, Prob>) {
                auto d = desugar(x.path);
                if (!d.complemented) return prob(x.cmp, x.threshold, std::move(d.path));
                return prob(dual(x.cmp), 1.0 - x.threshold, std::move(d.path));
            } else {
                auto d = desugar(x.path);
                if (!d.complemented) return query(x.mode, std::move(d.path), x.complement);
                return query(swap_mode(x.mode), std::move(d.path), !x.complement);
            }
        },
        f->node);
}

inline bool contains_globally(const StateFormula& f);

inline bool contains_globally(const PathFormula& p) {
    return std::visit(
        [](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Next>) return contains_globally(*x.operand);
            else if constexpr (std::is_same_v<T, Until>) return contains_globally(*x.lhs) || contains_globally(*x.rhs);
            else return true;
        },
        p.node);
}

inline bool contains_globally(const StateFormula& f) {
    return std::visit(
        [](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, And>) return contains_globally(*x.lhs) || contains_globally(*x.rhs);
            else if constexpr (std::is_same_v<T, Not>) return contains_globally(*x.operand);
            else if constexpr (std::is_same_v<T, Prob> || std::is_same_v<T, ProbQuery>) return contains_globally(*x.path);
            else return false;
        },
        f.node);
}

/// Step horizon used for error propagation: 1 for Next, the bound for Until/Globally.
inline Bound horizon(const PathFormula& p) {
    return std::visit(
        [](const auto& x) -> Bound {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Next>) return 1;
            else return x.bound;
        },
        p.node);
}

} // namespace lumpcheck::pctl
