#pragma once

// B-RASP: straight-line programs over Boolean position vectors.
//
// Every program starts with one initial vector Q['a'] per alphabet symbol. Each
// definition adds a vector, either position-wise (a Boolean combination of
// earlier vectors at i) or by attention:
//
//   def P(i) = attn max j [ j<i | S ] V default D
//
// which sets P(i) = V(i, j_i) for the rightmost (max) or leftmost (min)
// unmasked j with S(i, j) = 1, and P(i) = D(i) when no such j exists.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hardattn/errors.hpp"
#include "hardattn/lexer.hpp"
#include "hardattn/mask.hpp"
#include "hardattn/words.hpp"

namespace hardattn::brasp {

enum class PosVar { i, j };

/// Boolean combination of vector references at positions i and j.
struct BoolExpr {
    enum class Kind { constant, ref, negation, conjunction, disjunction, implication, equivalence };

    Kind kind = Kind::constant;
    bool value = false;     // constant
    std::size_t vec = 0;    // ref: vector index
    PosVar var = PosVar::i; // ref
    std::vector<BoolExpr> args;

    friend bool operator==(const BoolExpr&, const BoolExpr&) = default;

    [[nodiscard]] bool mentions(PosVar v) const {
        if (kind == Kind::ref) return var == v;
        for (const auto& a : args)
            if (a.mentions(v)) return true;
        return false;
    }
};

// Builders. all()/any() of an empty list are the constants 1/0; singletons collapse.
inline BoolExpr lit(bool b) { return BoolExpr{BoolExpr::Kind::constant, b, 0, PosVar::i, {}}; }
inline BoolExpr ref(std::size_t vec, PosVar v) { return BoolExpr{BoolExpr::Kind::ref, false, vec, v, {}}; }
inline BoolExpr neg(BoolExpr e) { return BoolExpr{BoolExpr::Kind::negation, false, 0, PosVar::i, {std::move(e)}}; }
inline BoolExpr all(std::vector<BoolExpr> es) {
    if (es.empty()) return lit(true);
    if (es.size() == 1) return std::move(es.front());
    return BoolExpr{BoolExpr::Kind::conjunction, false, 0, PosVar::i, std::move(es)};
}
inline BoolExpr any(std::vector<BoolExpr> es) {
    if (es.empty()) return lit(false);
    if (es.size() == 1) return std::move(es.front());
    return BoolExpr{BoolExpr::Kind::disjunction, false, 0, PosVar::i, std::move(es)};
}
inline BoolExpr implies(BoolExpr a, BoolExpr b) {
    return BoolExpr{BoolExpr::Kind::implication, false, 0, PosVar::i, {std::move(a), std::move(b)}};
}
inline BoolExpr iff(BoolExpr a, BoolExpr b) {
    return BoolExpr{BoolExpr::Kind::equivalence, false, 0, PosVar::i, {std::move(a), std::move(b)}};
}

enum class Direction { min, max };

struct Attention {
    Direction direction = Direction::max;
    Mask mask = Mask::none;
    BoolExpr score;
    BoolExpr value;
    BoolExpr fallback;  // default predicate, i-only
    friend bool operator==(const Attention&, const Attention&) = default;
};

struct Definition {
    std::string name;
    std::variant<BoolExpr, Attention> op;
    friend bool operator==(const Definition&, const Definition&) = default;
};

inline std::string initial_vector_name(const Symbol& a) {
    std::string s = "Q['";
    for (char c : a) {
        if (c == '\'' || c == '\\') s += '\\';
        s += c;
    }
    return s + "']";
}

class Program {
public:
    Program() = default;
    explicit Program(Alphabet alphabet) : alphabet_(std::move(alphabet)) {}

    [[nodiscard]] const Alphabet& alphabet() const { return alphabet_; }
    [[nodiscard]] const std::vector<Definition>& definitions() const { return defs_; }
    [[nodiscard]] std::size_t vector_count() const { return alphabet_.size() + defs_.size(); }

    [[nodiscard]] std::string vector_name(std::size_t k) const {
        if (k < alphabet_.size()) return initial_vector_name(alphabet_[k]);
        return defs_.at(k - alphabet_.size()).name;
    }

    /// Index of a defined vector name, or of Q['a'] spelled that way.
    [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const {
        for (std::size_t k = 0; k < defs_.size(); ++k)
            if (defs_[k].name == name) return alphabet_.size() + k;
        for (std::size_t k = 0; k < alphabet_.size(); ++k)
            if (initial_vector_name(alphabet_[k]) == name) return k;
        return std::nullopt;
    }

    /// Index of Q_a.
    [[nodiscard]] std::size_t symbol_vector(std::string_view a) const {
        auto k = alphabet_.index_of(a);
        if (!k) throw ScopeError("symbol '" + std::string(a) + "' is not in the alphabet");
        return *k;
    }

    /// Index of a vector by name; throws ScopeError if undefined.
    [[nodiscard]] std::size_t at(std::string_view name) const {
        auto k = find(name);
        if (!k) throw ScopeError("undefined vector '" + std::string(name) + "'");
        return *k;
    }

    /// Appends a definition, enforcing the scope rules. Returns the new vector's index.
    std::size_t define(std::string name, std::variant<BoolExpr, Attention> op) {
        const bool ident = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_') &&
                           std::all_of(name.begin(), name.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
        if (!ident || name == "Q" || name == "i" || name == "j" || name == "def" || name == "attn" ||
            name == "default" || name == "min" || name == "max")
            throw ScopeError("'" + name + "' is not a valid vector name");
        if (find(name)) throw ScopeError("vector '" + name + "' is defined twice");
        const std::size_t limit = vector_count();
        auto check = [&](const BoolExpr& e, bool allow_j, const char* what) {
            check_refs(e, limit, allow_j, name, what);
        };
        if (auto* e = std::get_if<BoolExpr>(&op)) {
            check(*e, false, "position-wise expression");
        } else {
            const auto& a = std::get<Attention>(op);
            check(a.score, true, "score");
            check(a.value, true, "value");
            check(a.fallback, false, "default");
        }
        defs_.push_back({std::move(name), std::move(op)});
        return limit;
    }

    void set_output(std::string_view name, OutputPosition pos) {
        output_ = at(name);
        position_ = pos;
    }

    [[nodiscard]] std::size_t output() const { return output_; }
    [[nodiscard]] OutputPosition output_position() const { return position_; }

    friend bool operator==(const Program&, const Program&) = default;

private:
    void check_refs(const BoolExpr& e, std::size_t limit, bool allow_j, const std::string& def,
                    const char* what) const {
        if (e.kind == BoolExpr::Kind::ref) {
            if (e.vec >= limit)
                throw ScopeError("definition of '" + def + "' refers to vector #" + std::to_string(e.vec) +
                                 " which is not defined before it");
            if (e.var == PosVar::j && !allow_j)
                throw ScopeError("definition of '" + def + "': " + what + " may not refer to position j");
        }
        for (const auto& a : e.args) check_refs(a, limit, allow_j, def, what);
    }

    Alphabet alphabet_;
    std::vector<Definition> defs_;
    std::size_t output_ = 0;
    OutputPosition position_ = OutputPosition::last;
};

/// Values of every vector (initial vectors first) at every position.
struct Trace {
    std::vector<std::string> names;
    std::vector<std::vector<bool>> values;

    [[nodiscard]] std::size_t length() const { return values.empty() ? 0 : values.front().size(); }
    [[nodiscard]] const std::vector<bool>& operator[](std::size_t vec) const { return values[vec]; }

    friend bool operator==(const Trace&, const Trace&) = default;
};

inline bool eval_expr(const BoolExpr& e, const Trace& t, std::size_t i, std::size_t j) {
    using K = BoolExpr::Kind;
    switch (e.kind) {
        case K::constant: return e.value;
        case K::ref: return t.values[e.vec][e.var == PosVar::i ? i : j];
        case K::negation: return !eval_expr(e.args[0], t, i, j);
        case K::conjunction:
            for (const auto& a : e.args)
                if (!eval_expr(a, t, i, j)) return false;
            return true;
        case K::disjunction:
            for (const auto& a : e.args)
                if (eval_expr(a, t, i, j)) return true;
            return false;
        case K::implication: return !eval_expr(e.args[0], t, i, j) || eval_expr(e.args[1], t, i, j);
        case K::equivalence: return eval_expr(e.args[0], t, i, j) == eval_expr(e.args[1], t, i, j);
    }
    return false;
}

/// Computes every vector in definition order.
inline Trace eval(const Program& p, const Word& w) {
    const auto symbols = p.alphabet().encode(w);
    const std::size_t n = symbols.size();
    Trace t;
    t.names.reserve(p.vector_count());
    t.values.reserve(p.vector_count());
    for (std::size_t a = 0; a < p.alphabet().size(); ++a) {
        t.names.push_back(p.vector_name(a));
        std::vector<bool> q(n);
        for (std::size_t i = 0; i < n; ++i) q[i] = symbols[i] == a;
        t.values.push_back(std::move(q));
    }
    for (const auto& d : p.definitions()) {
        std::vector<bool> out(n);
        if (const auto* e = std::get_if<BoolExpr>(&d.op)) {
            for (std::size_t i = 0; i < n; ++i) out[i] = eval_expr(*e, t, i, i);
        } else {
            const auto& a = std::get<Attention>(d.op);
            for (std::size_t i = 0; i < n; ++i) {
                std::optional<std::size_t> chosen;
                for (std::size_t step = 0; step < n && !chosen; ++step) {
                    const std::size_t j = a.direction == Direction::min ? step : n - 1 - step;
                    if (unmasked(a.mask, i, j) && eval_expr(a.score, t, i, j)) chosen = j;
                }
                out[i] = chosen ? eval_expr(a.value, t, i, *chosen) : eval_expr(a.fallback, t, i, i);
            }
        }
        t.names.push_back(d.name);
        t.values.push_back(std::move(out));
    }
    return t;
}

inline bool accepts(const Program& p, const Word& w) {
    const Trace t = eval(p, w);
    const std::size_t k = p.output_position() == OutputPosition::first ? 0 : t.length() - 1;
    return t.values[p.output()][k];
}

// ---------------------------------------------------------------------------
// Text form

namespace detail {

using lexing::quote_symbol;

inline int precedence(const BoolExpr& e) {
    using K = BoolExpr::Kind;
    switch (e.kind) {
        case K::equivalence: return 1;
        case K::implication: return 2;
        case K::disjunction: return 3;
        case K::conjunction: return 4;
        case K::negation: return 5;
        default: return 6;
    }
}

inline void print_expr(std::ostream& os, const BoolExpr& e, const Program& p, int min_prec) {
    using K = BoolExpr::Kind;
    const int prec = precedence(e);
    const bool paren = prec < min_prec;
    if (paren) os << '(';
    switch (e.kind) {
        case K::constant: os << (e.value ? '1' : '0'); break;
        case K::ref: os << p.vector_name(e.vec) << (e.var == PosVar::i ? "(i)" : "(j)"); break;
        case K::negation:
            os << '!';
            print_expr(os, e.args[0], p, 5);
            break;
        case K::conjunction:
        case K::disjunction:
            for (std::size_t k = 0; k < e.args.size(); ++k) {
                if (k) os << (e.kind == K::conjunction ? " & " : " | ");
                print_expr(os, e.args[k], p, prec + 1);
            }
            break;
        case K::implication:
            print_expr(os, e.args[0], p, 3);
            os << " -> ";
            print_expr(os, e.args[1], p, 2);
            break;
        case K::equivalence:
            print_expr(os, e.args[0], p, 1);
            os << " <-> ";
            print_expr(os, e.args[1], p, 2);
            break;
    }
    if (paren) os << ')';
}

}  // namespace detail

inline std::string to_text(const BoolExpr& e, const Program& p) {
    std::ostringstream os;
    detail::print_expr(os, e, p, 0);
    return os.str();
}

/// Serializes a program in the line-oriented DSL; parse(to_text(p)) == p.
inline std::string to_text(const Program& p) {
    std::ostringstream os;
    os << "alphabet:";
    for (const auto& s : p.alphabet().symbols()) os << ' ' << detail::quote_symbol(s);
    os << '\n';
    for (const auto& d : p.definitions()) {
        os << "def " << d.name << "(i) = ";
        if (const auto* e = std::get_if<BoolExpr>(&d.op)) {
            detail::print_expr(os, *e, p, 0);
        } else {
            const auto& a = std::get<Attention>(d.op);
            os << "attn " << (a.direction == Direction::min ? "min" : "max") << " j [ "
               << (a.mask == Mask::none ? "*" : a.mask == Mask::future ? "j<i" : "j>i") << " | ";
            detail::print_expr(os, a.score, p, 0);
            os << " ] ";
            detail::print_expr(os, a.value, p, 0);
            os << " default ";
            detail::print_expr(os, a.fallback, p, 0);
        }
        os << '\n';
    }
    os << "output: " << p.vector_name(p.output()) << ' ' << to_string(p.output_position()) << '\n';
    return os.str();
}

namespace detail {

using lexing::LineLexer;
using lexing::Token;
using lexing::trim;

class ExprParser {
public:
    ExprParser(LineLexer& lex, const Program& prog) : lex_(lex), prog_(prog) {}

    BoolExpr parse() { return parse_iff(); }

private:
    BoolExpr parse_iff() {
        BoolExpr e = parse_implies();
        while (lex_.accept("<->")) e = iff(std::move(e), parse_implies());
        return e;
    }
    BoolExpr parse_implies() {
        BoolExpr e = parse_or();
        if (lex_.accept("->")) return implies(std::move(e), parse_implies());
        return e;
    }
    BoolExpr parse_or() {
        std::vector<BoolExpr> xs{parse_and()};
        while (lex_.accept("|")) xs.push_back(parse_and());
        return xs.size() == 1 ? std::move(xs.front()) : any(std::move(xs));
    }
    BoolExpr parse_and() {
        std::vector<BoolExpr> xs{parse_not()};
        while (lex_.accept("&")) xs.push_back(parse_not());
        return xs.size() == 1 ? std::move(xs.front()) : all(std::move(xs));
    }
    BoolExpr parse_not() {
        if (lex_.accept("!")) return neg(parse_not());
        return parse_atom();
    }
    BoolExpr parse_atom() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Kind::punct && t.text == "(") {
            lex_.take();
            BoolExpr e = parse_iff();
            lex_.expect(")");
            return e;
        }
        if (t.kind == Token::Kind::number) {
            if (t.text != "0" && t.text != "1") lex_.fail("Boolean constant must be 0 or 1");
            bool v = t.text == "1";
            lex_.take();
            return lit(v);
        }
        if (t.kind != Token::Kind::ident) lex_.fail("expected an expression");
        std::size_t vec = 0;
        if (t.text == "Q") {
            lex_.take();
            lex_.expect("[");
            const Token sym = lex_.take();
            if (sym.kind != Token::Kind::quoted) lex_.fail("expected a quoted symbol");
            lex_.expect("]");
            auto k = prog_.alphabet().index_of(sym.text);
            if (!k) throw ScopeError("line " + std::to_string(lex_.line_no()) + ": symbol '" + sym.text +
                                     "' is not in the alphabet");
            vec = *k;
        } else {
            if (is_keyword(t.text)) lex_.fail("unexpected keyword '" + t.text + "'");
            const std::string name = lex_.take().text;
            auto k = prog_.find(name);
            if (!k) throw ScopeError("line " + std::to_string(lex_.line_no()) + ": undefined vector '" + name + "'");
            vec = *k;
        }
        lex_.expect("(");
        const Token v = lex_.take();
        if (v.kind != Token::Kind::ident || (v.text != "i" && v.text != "j"))
            lex_.fail("position variable must be i or j");
        lex_.expect(")");
        return ref(vec, v.text == "i" ? PosVar::i : PosVar::j);
    }

    static bool is_keyword(std::string_view s) {
        return s == "default" || s == "attn" || s == "def" || s == "min" || s == "max" || s == "i" || s == "j";
    }

    LineLexer& lex_;
    const Program& prog_;
};


}  // namespace detail

/// Parses the line-oriented DSL. Blank lines and lines starting with "//" are ignored.
inline Program parse(std::string_view text) {
    using detail::LineLexer;
    using detail::Token;
    std::optional<Program> prog;
    std::optional<std::pair<std::string, OutputPosition>> output;
    std::size_t output_line = 0;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty() || trimmed.rfind("//", 0) == 0) continue;

        LineLexer lex(line, line_no);
        const Token head = lex.take();
        if (head.kind == Token::Kind::ident && head.text == "alphabet" && lex.accept(":")) {
            if (prog) throw ParseError("duplicate alphabet header", line_no, head.column + 1);
            std::vector<Symbol> syms;
            while (lex.peek().kind != Token::Kind::end) {
                Token s = lex.take();
                if (s.kind == Token::Kind::punct) lex.fail("symbols must be quoted or alphanumeric");
                syms.push_back(s.text);
            }
            if (syms.empty()) throw ParseError("alphabet is empty", line_no, head.column + 1);
            prog.emplace(Alphabet(std::move(syms)));
        } else if (head.kind == Token::Kind::ident && head.text == "output" && lex.accept(":")) {
            const Token name = lex.take();
            if (name.kind != Token::Kind::ident) lex.fail("expected output vector name");
            std::string full = name.text;
            if (name.text == "Q") {
                lex.expect("[");
                const Token sym = lex.take();
                lex.expect("]");
                full = initial_vector_name(sym.text);
            }
            const Token pos = lex.take();
            if (pos.kind != Token::Kind::ident || (pos.text != "first" && pos.text != "last"))
                throw ParseError("output position must be 'first' or 'last'", line_no, pos.column + 1);
            output = {full, parse_output_position(pos.text)};
            output_line = line_no;
        } else if (head.kind == Token::Kind::ident && head.text == "def") {
            if (!prog) throw ParseError("'alphabet:' header must precede definitions", line_no, head.column + 1);
            const Token name = lex.take();
            if (name.kind != Token::Kind::ident || name.text == "Q") lex.fail("expected a vector name");
            lex.expect("(");
            lex.expect("i");
            lex.expect(")");
            lex.expect("=");
            detail::ExprParser ep(lex, *prog);
            std::variant<BoolExpr, Attention> op;
            if (lex.accept("attn")) {
                Attention a;
                if (lex.accept("min")) a.direction = Direction::min;
                else if (lex.accept("max")) a.direction = Direction::max;
                else lex.fail("expected 'min' or 'max'");
                lex.expect("j");
                lex.expect("[");
                if (lex.accept("*")) {
                    a.mask = Mask::none;
                } else {
                    lex.expect("j");
                    if (lex.accept("<")) a.mask = Mask::future;
                    else if (lex.accept(">")) a.mask = Mask::past;
                    else lex.fail("mask must be *, j<i or j>i");
                    lex.expect("i");
                }
                lex.expect("|");
                a.score = ep.parse();
                lex.expect("]");
                a.value = ep.parse();
                lex.expect("default");
                a.fallback = ep.parse();
                op = std::move(a);
            } else {
                op = ep.parse();
            }
            if (lex.peek().kind != Token::Kind::end) lex.fail("unexpected trailing input");
            try {
                prog->define(name.text, std::move(op));
            } catch (const ScopeError& e) {
                throw ScopeError("line " + std::to_string(line_no) + ": " + e.what());
            }
        } else {
            throw ParseError("expected 'alphabet:', 'output:' or 'def'", line_no, head.column + 1);
        }
    }
    if (!prog) throw ParseError("missing 'alphabet:' header");
    if (!output) throw ParseError("missing 'output:' line");
    try {
        prog->set_output(output->first, output->second);
    } catch (const ScopeError& e) {
        throw ScopeError("line " + std::to_string(output_line) + ": " + e.what());
    }
    return std::move(*prog);
}

}  // namespace hardattn::brasp
