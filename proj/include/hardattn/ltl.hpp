#pragma once

// Linear temporal logic over finite words with strict since and until.
//
// Formulas are immutable DAGs. Subformulas may be shared, and the evaluator and
// size measures treat a shared node once. P, F, X, G and -> exist only as
// builders and parser sugar; the stored tree uses the core connectives.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hardattn/errors.hpp"
#include "hardattn/lexer.hpp"
#include "hardattn/words.hpp"

namespace hardattn::ltl {

enum class Op { top, bottom, atom, negation, conjunction, disjunction, since, until };

struct Node;
using Formula = std::shared_ptr<const Node>;

struct Node {
    Op op;
    std::size_t symbol = 0;
    std::vector<Formula> args;
};

inline Formula top() {
    static const Formula t = std::make_shared<const Node>(Node{Op::top, 0, {}});
    return t;
}
inline Formula bottom() {
    static const Formula f = std::make_shared<const Node>(Node{Op::bottom, 0, {}});
    return f;
}
inline Formula atom(std::size_t symbol) { return std::make_shared<const Node>(Node{Op::atom, symbol, {}}); }
inline Formula neg(Formula f) { return std::make_shared<const Node>(Node{Op::negation, 0, {std::move(f)}}); }

/// n-ary conjunction; empty is true, a singleton is its element.
inline Formula conj(std::vector<Formula> fs) {
    if (fs.empty()) return top();
    if (fs.size() == 1) return std::move(fs.front());
    return std::make_shared<const Node>(Node{Op::conjunction, 0, std::move(fs)});
}
inline Formula disj(std::vector<Formula> fs) {
    if (fs.empty()) return bottom();
    if (fs.size() == 1) return std::move(fs.front());
    return std::make_shared<const Node>(Node{Op::disjunction, 0, std::move(fs)});
}
inline Formula conj(Formula a, Formula b) { return conj(std::vector<Formula>{std::move(a), std::move(b)}); }
inline Formula disj(Formula a, Formula b) { return disj(std::vector<Formula>{std::move(a), std::move(b)}); }
inline Formula since(Formula a, Formula b) {
    return std::make_shared<const Node>(Node{Op::since, 0, {std::move(a), std::move(b)}});
}
inline Formula until(Formula a, Formula b) {
    return std::make_shared<const Node>(Node{Op::until, 0, {std::move(a), std::move(b)}});
}

inline Formula past(Formula f) { return since(top(), std::move(f)); }
inline Formula future(Formula f) { return until(top(), std::move(f)); }
inline Formula next(Formula f) { return until(bottom(), std::move(f)); }
inline Formula globally(const Formula& f) { return conj(f, neg(future(neg(f)))); }
inline Formula implies(Formula a, Formula b) { return disj(neg(std::move(a)), std::move(b)); }

// Constant-folding variants for generated formulas. They never change the language.

inline bool is_top(const Formula& f) { return f->op == Op::top; }
inline bool is_bottom(const Formula& f) { return f->op == Op::bottom; }

inline Formula not_of(Formula f) {
    if (is_top(f)) return bottom();
    if (is_bottom(f)) return top();
    if (f->op == Op::negation) return f->args[0];
    return neg(std::move(f));
}

inline Formula and_of(const std::vector<Formula>& fs) {
    std::vector<Formula> kept;
    for (const auto& f : fs) {
        if (is_bottom(f)) return bottom();
        if (is_top(f)) continue;
        if (std::find(kept.begin(), kept.end(), f) == kept.end()) kept.push_back(f);
    }
    return conj(std::move(kept));
}

inline Formula or_of(const std::vector<Formula>& fs) {
    std::vector<Formula> kept;
    for (const auto& f : fs) {
        if (is_top(f)) return top();
        if (is_bottom(f)) continue;
        if (std::find(kept.begin(), kept.end(), f) == kept.end()) kept.push_back(f);
    }
    return disj(std::move(kept));
}

inline Formula since_of(Formula a, Formula b) {
    if (is_bottom(b)) return bottom();
    return since(std::move(a), std::move(b));
}
inline Formula until_of(Formula a, Formula b) {
    if (is_bottom(b)) return bottom();
    return until(std::move(a), std::move(b));
}

namespace detail {

inline bool equal(const Node* a, const Node* b, std::set<std::pair<const Node*, const Node*>>& same) {
    if (a == b || same.count({a, b})) return true;
    if (a->op != b->op || a->symbol != b->symbol || a->args.size() != b->args.size()) return false;
    for (std::size_t k = 0; k < a->args.size(); ++k)
        if (!equal(a->args[k].get(), b->args[k].get(), same)) return false;
    same.emplace(a, b);
    return true;
}

}  // namespace detail

/// Structural equality, sharing-insensitive.
inline bool equal(const Formula& a, const Formula& b) {
    std::set<std::pair<const Node*, const Node*>> same;
    return detail::equal(a.get(), b.get(), same);
}

/// Children before parents; every node exactly once.
inline std::vector<const Node*> topological_order(const Formula& root) {
    std::vector<const Node*> order;
    std::unordered_set<const Node*> seen;
    std::vector<std::pair<const Node*, std::size_t>> stack{{root.get(), 0}};
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [n, k] = stack.back();
        if (k < n->args.size()) {
            const Node* c = n->args[k++].get();
            if (seen.insert(c).second) stack.emplace_back(c, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }
    return order;
}

/// Number of distinct nodes.
inline std::size_t size(const Formula& f) { return topological_order(f).size(); }

inline std::size_t depth(const Formula& f) {
    std::unordered_map<const Node*, std::size_t> d;
    for (const Node* n : topological_order(f)) {
        std::size_t x = 0;
        for (const auto& c : n->args) x = std::max(x, d[c.get()]);
        d[n] = x + 1;
    }
    return d[f.get()];
}

/// Truth tables over one word, memoized per node across queries.
class Evaluator {
public:
    explicit Evaluator(std::vector<std::size_t> symbols) : w_(std::move(symbols)) {}

    const std::vector<bool>& table(const Formula& f) {
        if (auto it = memo_.find(f.get()); it != memo_.end()) return it->second;
        roots_.push_back(f);
        for (const Node* n : topological_order(f))
            if (!memo_.count(n)) memo_.emplace(n, compute(*n));
        return memo_.at(f.get());
    }

    bool at(const Formula& f, std::size_t i) { return table(f).at(i); }
    std::size_t length() const { return w_.size(); }

private:
    std::vector<bool> compute(const Node& n) const {
        const std::size_t len = w_.size();
        std::vector<bool> out(len);
        auto arg = [&](std::size_t k) -> const std::vector<bool>& { return memo_.at(n.args[k].get()); };
        switch (n.op) {
            case Op::top: out.assign(len, true); break;
            case Op::bottom: break;
            case Op::atom:
                for (std::size_t i = 0; i < len; ++i) out[i] = w_[i] == n.symbol;
                break;
            case Op::negation:
                for (std::size_t i = 0; i < len; ++i) out[i] = !arg(0)[i];
                break;
            case Op::conjunction:
                out.assign(len, true);
                for (std::size_t k = 0; k < n.args.size(); ++k)
                    for (std::size_t i = 0; i < len; ++i) out[i] = out[i] && arg(k)[i];
                break;
            case Op::disjunction:
                for (std::size_t k = 0; k < n.args.size(); ++k)
                    for (std::size_t i = 0; i < len; ++i) out[i] = out[i] || arg(k)[i];
                break;
            case Op::since:
                for (std::size_t i = 1; i < len; ++i) out[i] = arg(1)[i - 1] || (arg(0)[i - 1] && out[i - 1]);
                break;
            case Op::until:
                for (std::size_t i = len; i-- > 1;) out[i - 1] = arg(1)[i] || (arg(0)[i] && out[i]);
                break;
        }
        return out;
    }

    std::vector<std::size_t> w_;
    // Memo keys are addresses, so every queried root is kept alive.
    std::vector<Formula> roots_;
    std::unordered_map<const Node*, std::vector<bool>> memo_;
};

/// The formula's nodes flattened once, children first, for evaluating many words.
class Plan {
public:
    explicit Plan(const Formula& f) : root_(f) {
        const auto order = topological_order(f);
        std::unordered_map<const Node*, std::uint32_t> index;
        index.reserve(order.size());
        for (const Node* n : order) {
            Step s{n->op, n->symbol, static_cast<std::uint32_t>(args_.size()), static_cast<std::uint32_t>(n->args.size())};
            for (const auto& a : n->args) args_.push_back(index.at(a.get()));
            index.emplace(n, static_cast<std::uint32_t>(steps_.size()));
            steps_.push_back(s);
        }
    }

    /// Truth value of the formula at every position of the word (symbol indices).
    [[nodiscard]] std::vector<bool> table(const std::vector<std::size_t>& w) const {
        const std::size_t len = w.size();
        std::vector<unsigned char> t(steps_.size() * len);
        for (std::size_t k = 0; k < steps_.size(); ++k) {
            const Step& s = steps_[k];
            unsigned char* out = &t[k * len];
            auto arg = [&](std::uint32_t a) { return &t[args_[s.first + a] * len]; };
            switch (s.op) {
                case Op::top: std::fill(out, out + len, 1); break;
                case Op::bottom: break;
                case Op::atom:
                    for (std::size_t i = 0; i < len; ++i) out[i] = w[i] == s.symbol;
                    break;
                case Op::negation:
                    for (std::size_t i = 0; i < len; ++i) out[i] = !arg(0)[i];
                    break;
                case Op::conjunction:
                    std::fill(out, out + len, 1);
                    for (std::uint32_t a = 0; a < s.count; ++a)
                        for (std::size_t i = 0; i < len; ++i) out[i] &= arg(a)[i];
                    break;
                case Op::disjunction:
                    for (std::uint32_t a = 0; a < s.count; ++a)
                        for (std::size_t i = 0; i < len; ++i) out[i] |= arg(a)[i];
                    break;
                case Op::since:
                    for (std::size_t i = 1; i < len; ++i) out[i] = arg(1)[i - 1] || (arg(0)[i - 1] && out[i - 1]);
                    break;
                case Op::until:
                    for (std::size_t i = len; i-- > 1;) out[i - 1] = arg(1)[i] || (arg(0)[i] && out[i]);
                    break;
            }
        }
        const unsigned char* root = &t[(steps_.size() - 1) * len];
        return std::vector<bool>(root, root + len);
    }

private:
    struct Step {
        Op op;
        std::size_t symbol;
        std::uint32_t first, count;
    };
    Formula root_;
    std::vector<Step> steps_;
    std::vector<std::uint32_t> args_;
};

/// Formula plus the alphabet its atoms index into and the output position.
struct Model {
    Alphabet alphabet;
    Formula formula = top();
    OutputPosition output_position = OutputPosition::last;
};

/// w, i |= f with i 0-based.
inline bool holds(const Model& m, const Word& w, std::size_t i) {
    Evaluator ev(m.alphabet.encode(w));
    if (i >= ev.length()) throw WordError("position " + std::to_string(i) + " is out of range");
    return ev.at(m.formula, i);
}

inline bool accepts(const Model& m, const Word& w) {
    Evaluator ev(m.alphabet.encode(w));
    return ev.at(m.formula, m.output_position == OutputPosition::first ? 0 : ev.length() - 1);
}

/// Shortest accepted word of length at most max_len in enumeration order.
inline std::optional<Word> bounded_sat(const Model& m, std::size_t max_len) {
    for (WordEnumerator e(m.alphabet, max_len); !e.done(); e.next()) {
        Evaluator ev(e.indices());
        if (ev.at(m.formula, m.output_position == OutputPosition::first ? 0 : ev.length() - 1)) return e.word();
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Text form
//
//   alphabet: a b
//   output: first
//   let s1 = Q(a) | Q(b)
//   G ($s1 -> X Q(b))
//
// Every line that is not a header or a let contributes to the main formula.

namespace detail {

using lexing::LineLexer;
using lexing::Token;

inline bool bare_symbol(const Symbol& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

inline std::string symbol_text(const Symbol& s) {
    if (!s.empty() && bare_symbol(s) && !std::isdigit(static_cast<unsigned char>(s[0]))) return s;
    if (!s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) return s;
    return lexing::quote_symbol(s);
}

enum Prec { prec_temporal = 1, prec_implies, prec_or, prec_and, prec_unary, prec_atom };

inline int precedence(const Node& n) {
    switch (n.op) {
        case Op::since:
            return is_top(n.args[0]) ? prec_unary : prec_temporal;
        case Op::until:
            return is_top(n.args[0]) || is_bottom(n.args[0]) ? prec_unary : prec_temporal;
        case Op::disjunction: return prec_or;
        case Op::conjunction: return prec_and;
        case Op::negation: return prec_unary;
        default: return prec_atom;
    }
}

class Printer {
public:
    Printer(const Alphabet& a, const std::unordered_map<const Node*, std::string>& names) : a_(a), names_(names) {}

    void print(std::ostream& os, const Node& n, int min_prec, bool allow_name = true) const {
        if (allow_name) {
            if (auto it = names_.find(&n); it != names_.end()) {
                os << '$' << it->second;
                return;
            }
        }
        const int p = precedence(n);
        const bool parens = p < min_prec;
        if (parens) os << '(';
        switch (n.op) {
            case Op::top: os << "true"; break;
            case Op::bottom: os << "false"; break;
            case Op::atom: os << "Q(" << symbol_text(a_[n.symbol]) << ')'; break;
            case Op::negation:
                os << '!';
                print(os, *n.args[0], prec_unary);
                break;
            case Op::conjunction:
            case Op::disjunction:
                for (std::size_t k = 0; k < n.args.size(); ++k) {
                    if (k) os << (n.op == Op::conjunction ? " & " : " | ");
                    print(os, *n.args[k], p + 1);
                }
                break;
            case Op::since:
            case Op::until:
                if (p == prec_unary) {
                    os << (n.op == Op::since ? "P " : is_top(n.args[0]) ? "F " : "X ");
                    print(os, *n.args[1], prec_unary);
                } else {
                    print(os, *n.args[0], prec_temporal);
                    os << (n.op == Op::since ? " S " : " U ");
                    print(os, *n.args[1], prec_implies);
                }
                break;
        }
        if (parens) os << ')';
    }

private:
    const Alphabet& a_;
    const std::unordered_map<const Node*, std::string>& names_;
};

class FormulaParser {
public:
    FormulaParser(LineLexer& lex, const Alphabet& a, const std::map<std::string, Formula>& lets)
        : lex_(lex), a_(a), lets_(lets) {}

    Formula parse() { return parse_temporal(); }

private:
    Formula parse_temporal() {
        Formula f = parse_implies();
        while (true) {
            if (lex_.accept("S")) f = since(std::move(f), parse_implies());
            else if (lex_.accept("U")) f = until(std::move(f), parse_implies());
            else return f;
        }
    }
    Formula parse_implies() {
        Formula f = parse_or();
        if (lex_.accept("->")) return implies(std::move(f), parse_implies());
        return f;
    }
    Formula parse_or() {
        std::vector<Formula> xs{parse_and()};
        while (lex_.accept("|")) xs.push_back(parse_and());
        return disj(std::move(xs));
    }
    Formula parse_and() {
        std::vector<Formula> xs{parse_unary()};
        while (lex_.accept("&")) xs.push_back(parse_unary());
        return conj(std::move(xs));
    }
    Formula parse_unary() {
        if (lex_.accept("!")) return neg(parse_unary());
        if (lex_.accept("X")) return next(parse_unary());
        if (lex_.accept("F")) return future(parse_unary());
        if (lex_.accept("G")) return globally(parse_unary());
        if (lex_.accept("P")) return past(parse_unary());
        return parse_atom();
    }
    Formula parse_atom() {
        if (lex_.accept("(")) {
            Formula f = parse_temporal();
            lex_.expect(")");
            return f;
        }
        if (lex_.accept("true")) return top();
        if (lex_.accept("false")) return bottom();
        if (lex_.accept("$")) {
            const Token name = lex_.peek();
            if (name.kind != Token::Kind::ident) lex_.fail("expected a let name after '$'");
            auto it = lets_.find(name.text);
            if (it == lets_.end())
                throw ScopeError("line " + std::to_string(lex_.line_no()) + ": undefined let '" + name.text + "'");
            lex_.take();
            return it->second;
        }
        if (lex_.accept("Q")) {
            lex_.expect("(");
            const Token sym = lex_.peek();
            if (sym.kind == Token::Kind::end || (sym.kind == Token::Kind::punct && sym.text == ")"))
                lex_.fail("expected a symbol");
            auto k = a_.index_of(sym.text);
            if (!k)
                throw ScopeError("line " + std::to_string(lex_.line_no()) + ": symbol '" + sym.text +
                                 "' is not in the alphabet");
            lex_.take();
            lex_.expect(")");
            return atom(*k);
        }
        lex_.fail("expected a formula");
    }

    LineLexer& lex_;
    const Alphabet& a_;
    const std::map<std::string, Formula>& lets_;
};

inline bool reserved(std::string_view s) {
    for (std::string_view r : {"S", "U", "X", "F", "G", "P", "Q", "true", "false", "let", "alphabet", "output"})
        if (s == r) return true;
    return false;
}

}  // namespace detail

inline std::string to_text(const Formula& f, const Alphabet& a) {
    std::ostringstream os;
    detail::Printer(a, {}).print(os, *f, detail::prec_temporal);
    return os.str();
}

/// Parses one formula (no lets) against `alphabet`.
inline Formula parse_formula(std::string_view text, const Alphabet& alphabet) {
    if (text.find('\n') != std::string_view::npos) throw ParseError("formula must be a single line");
    detail::LineLexer lex(text, 1);
    std::map<std::string, Formula> none;
    Formula f = detail::FormulaParser(lex, alphabet, none).parse();
    if (lex.peek().kind != lexing::Token::Kind::end) lex.fail("unexpected trailing input");
    return f;
}

/// Model file. Nodes reachable along more than one path become lets so shared
/// structure survives a round trip without exponential blow-up.
inline std::string to_text(const Model& m) {
    const auto order = topological_order(m.formula);
    std::unordered_map<const Node*, std::size_t> parents;
    for (const Node* n : order)
        for (const auto& c : n->args) ++parents[c.get()];
    std::unordered_map<const Node*, std::string> names;
    std::ostringstream os;
    os << "alphabet:";
    for (const auto& s : m.alphabet.symbols()) os << ' ' << lexing::quote_symbol(s);
    os << "\noutput: " << to_string(m.output_position) << '\n';
    detail::Printer printer(m.alphabet, names);
    for (const Node* n : order) {
        if (n == m.formula.get() || parents[n] < 2 || n->args.empty()) continue;
        if (n->op == Op::negation && n->args[0]->args.empty()) continue;
        std::string name = "s" + std::to_string(names.size() + 1);
        os << "let " << name << " = ";
        printer.print(os, *n, detail::prec_temporal, false);
        os << '\n';
        names.emplace(n, std::move(name));
    }
    printer.print(os, *m.formula, detail::prec_temporal, false);
    os << '\n';
    return os.str();
}

inline Model parse(std::string_view text) {
    using lexing::Token;
    std::optional<Alphabet> alphabet;
    std::optional<OutputPosition> output;
    std::map<std::string, Formula> lets;
    std::string body;
    std::size_t body_line = 0;
    std::size_t line_no = 0, start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        const std::string trimmed = lexing::trim(line);
        if (trimmed.empty() || trimmed.rfind("//", 0) == 0) continue;
        detail::LineLexer lex(line, line_no);
        const Token head = lex.peek();
        if (head.kind == Token::Kind::ident && head.text == "alphabet") {
            lex.take();
            lex.expect(":");
            if (alphabet) throw ParseError("duplicate alphabet header", line_no, head.column + 1);
            std::vector<Symbol> syms;
            while (lex.peek().kind != Token::Kind::end) {
                Token s = lex.take();
                if (s.kind == Token::Kind::punct) lex.fail("symbols must be quoted or alphanumeric");
                syms.push_back(s.text);
            }
            if (syms.empty()) throw ParseError("alphabet is empty", line_no, head.column + 1);
            alphabet.emplace(std::move(syms));
        } else if (head.kind == Token::Kind::ident && head.text == "output") {
            lex.take();
            lex.expect(":");
            const Token pos = lex.take();
            if (pos.kind != Token::Kind::ident || (pos.text != "first" && pos.text != "last"))
                throw ParseError("output position must be 'first' or 'last'", line_no, pos.column + 1);
            if (lex.peek().kind != Token::Kind::end) lex.fail("unexpected trailing input");
            output = parse_output_position(pos.text);
        } else if (head.kind == Token::Kind::ident && head.text == "let") {
            if (!alphabet) throw ParseError("'alphabet:' header must come first", line_no, head.column + 1);
            if (!body.empty()) throw ParseError("let must precede the formula", line_no, head.column + 1);
            lex.take();
            const Token name = lex.take();
            if (name.kind != Token::Kind::ident || detail::reserved(name.text))
                throw ParseError("expected a let name", line_no, name.column + 1);
            if (lets.count(name.text))
                throw ScopeError("line " + std::to_string(line_no) + ": duplicate let '" + name.text + "'");
            lex.expect("=");
            Formula f = detail::FormulaParser(lex, *alphabet, lets).parse();
            if (lex.peek().kind != Token::Kind::end) lex.fail("unexpected trailing input");
            lets.emplace(name.text, std::move(f));
        } else {
            if (!alphabet) throw ParseError("'alphabet:' header must come first", line_no, head.column + 1);
            if (body.empty()) body_line = line_no;
            body += trimmed;
            body += ' ';
        }
    }
    if (!alphabet) throw ParseError("missing 'alphabet:' header");
    if (!output) throw ParseError("missing 'output:' line");
    if (body.empty()) throw ParseError("missing formula");
    detail::LineLexer lex(body, body_line);
    Formula f = detail::FormulaParser(lex, *alphabet, lets).parse();
    if (lex.peek().kind != Token::Kind::end) lex.fail("unexpected trailing input");
    return Model{std::move(*alphabet), std::move(f), *output};
}

}  // namespace hardattn::ltl
