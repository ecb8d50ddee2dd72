#pragma once

// Translations between LTL, B-RASP and UHATs.
//
// LTL -> UHAT and B-RASP -> UHAT compile Boolean logic into 0/1 components.
// Negation stays affine; conjunction, disjunction and equivalence each cost a
// ReLU gate. Gates of equal depth share one position-wise layer (an attention
// layer with zero score whose C ignores the attended vector).
//
// UHAT -> LTL builds one formula per reachable vector per layer.

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "hardattn/brasp.hpp"
#include "hardattn/errors.hpp"
#include "hardattn/ltl.hpp"
#include "hardattn/numeric.hpp"
#include "hardattn/uhat.hpp"

namespace hardattn::translate {

using uhat::TieBreak;

// ---------------------------------------------------------------------------
// Reports

struct TranslationReport {
    std::string source;
    std::string target;
    std::size_t layers = 0;
    std::size_t attention_layers = 0;
    std::size_t max_width = 0;
    std::size_t formula_nodes = 0;
    std::vector<std::string> notes;

    /// key=value lines, one note per line.
    [[nodiscard]] std::string str() const {
        std::ostringstream os;
        os << "source=" << source << "\ntarget=" << target << "\nlayers=" << layers
           << "\nattention_layers=" << attention_layers << "\nmax_width=" << max_width
           << "\nformula_nodes=" << formula_nodes << '\n';
        for (const auto& n : notes) os << "note=" << n << '\n';
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// Circuit builder

/// Affine form over components: sum of coeff * x[comp] plus a constant.
struct Lin {
    std::map<std::size_t, Rational> terms;
    Rational constant;

    static Lin comp(std::size_t c) {
        Lin l;
        l.terms.emplace(c, Rational(1));
        return l;
    }
    static Lin value(Rational c) {
        Lin l;
        l.constant = std::move(c);
        return l;
    }

    /// The component this form reads verbatim, if it is exactly one component.
    [[nodiscard]] std::optional<std::size_t> plain() const {
        if (terms.size() == 1 && constant.is_zero() && terms.begin()->second == Rational(1))
            return terms.begin()->first;
        return std::nullopt;
    }

    Lin& operator+=(const Lin& o) {
        for (const auto& [c, k] : o.terms) {
            Rational& t = terms[c];
            t += k;
            if (t.is_zero()) terms.erase(c);
        }
        constant += o.constant;
        return *this;
    }
    friend Lin operator+(Lin a, const Lin& b) { return a += b; }
    friend Lin operator*(const Rational& k, Lin a) {
        if (k.is_zero()) return Lin{};
        for (auto& [c, t] : a.terms) t *= k;
        a.constant *= k;
        return a;
    }
    friend Lin operator-(const Lin& a, const Lin& b) { return a + Rational(-1) * b; }
};

/// One attention layer over named components. Unlisted rows of A and B are 0;
/// C copies every component not listed in `writes` or `copies`.
struct AttentionSpec {
    std::vector<std::pair<std::size_t, Lin>> query;   // row <- affine form of v_i
    std::vector<std::pair<std::size_t, Lin>> key;     // row <- affine form of v_j
    std::vector<std::pair<std::size_t, Lin>> writes;  // component <- affine form of v_i
    std::vector<std::pair<std::size_t, Lin>> copies;  // component <- linear form of a_i
    Mask mask = Mask::none;
    TieBreak tie = TieBreak::leftmost;
};

class Circuit {
public:
    explicit Circuit(std::size_t base) : width_(base), level_(base, 0) {}

    [[nodiscard]] std::size_t width() const { return width_; }

    std::size_t fresh() {
        level_.push_back(0);
        return width_++;
    }

    static Lin negate(const Lin& x) { return Lin::value(Rational(1)) - x; }

    Lin gate_and(const std::vector<Lin>& xs) {
        if (xs.empty()) return Lin::value(Rational(1));
        if (xs.size() == 1) return xs.front();
        Lin pre = Lin::value(Rational(1 - static_cast<long>(xs.size())));
        for (const auto& x : xs) pre += x;
        return Lin::comp(gate(std::move(pre)));
    }

    Lin gate_or(const std::vector<Lin>& xs) {
        if (xs.empty()) return Lin::value(Rational(0));
        if (xs.size() == 1) return xs.front();
        Lin pre = Lin::value(Rational(1));
        for (const auto& x : xs) pre = pre - x;
        return negate(Lin::comp(gate(std::move(pre))));
    }

    /// [a = b] as relu(a + b - 1) + relu(1 - a - b).
    Lin gate_iff(const Lin& a, const Lin& b) {
        const std::size_t both = gate(a + b - Lin::value(Rational(1)));
        const std::size_t neither = gate(Lin::value(Rational(1)) - a - b);
        return Lin::comp(both) + Lin::comp(neither);
    }

    /// Component holding x; reuses x's component when x reads one verbatim.
    std::size_t materialize(const Lin& x) {
        if (auto c = x.plain()) return *c;
        const std::size_t slot = fresh();
        write(slot, x, false);
        return slot;
    }

    void attention(AttentionSpec spec) {
        flush();
        layers_.emplace_back(std::move(spec));
    }

    /// Emits every pending gate, one position-wise layer per depth.
    void flush() {
        std::size_t top = 0;
        for (const auto& p : pending_) top = std::max(top, p.level);
        for (std::size_t lv = 1; lv <= top; ++lv) {
            AttentionSpec spec;
            std::vector<std::size_t> clamps;
            for (const auto& p : pending_) {
                if (p.level != lv) continue;
                spec.writes.emplace_back(p.slot, p.pre);
                if (p.relu) clamps.push_back(p.slot);
            }
            if (spec.writes.empty()) continue;
            layers_.emplace_back(std::move(spec));
            for (auto c : clamps) layers_.emplace_back(c);
        }
        pending_.clear();
        std::fill(level_.begin(), level_.end(), 0);
    }

    /// Concrete layers at a common width. Call after the last flush.
    [[nodiscard]] std::vector<uhat::Layer> build(std::size_t w) const {
        std::vector<uhat::Layer> out;
        for (const auto& l : layers_) {
            if (const auto* r = std::get_if<std::size_t>(&l)) {
                out.emplace_back(uhat::ReluLayer{*r});
                continue;
            }
            const auto& s = std::get<AttentionSpec>(l);
            uhat::AttentionLayer a;
            a.mask = s.mask;
            a.tie = s.tie;
            a.query = rows(s.query, w, w, 0);
            a.key = rows(s.key, w, w, 0);
            a.combine = AffineMap(2 * w, w);
            std::vector<bool> replaced(w, false);
            for (const auto& [c, lin] : s.writes) {
                replaced[c] = true;
                for (const auto& [col, k] : lin.terms) a.combine.set(c, col, k);
                a.combine.set_bias(c, lin.constant);
            }
            for (const auto& [c, lin] : s.copies) {
                replaced[c] = true;
                for (const auto& [col, k] : lin.terms) a.combine.set(c, w + col, k);
                a.combine.set_bias(c, lin.constant);
            }
            for (std::size_t c = 0; c < w; ++c)
                if (!replaced[c]) a.combine.set(c, c, Rational(1));
            out.emplace_back(std::move(a));
        }
        return out;
    }

    /// Smallest width that fits every component and every score row.
    [[nodiscard]] std::size_t required_width() const {
        std::size_t w = width_;
        for (const auto& l : layers_)
            if (const auto* s = std::get_if<AttentionSpec>(&l)) {
                for (const auto& [row, lin] : s->query) w = std::max(w, row + 1);
                for (const auto& [row, lin] : s->key) w = std::max(w, row + 1);
            }
        return std::max<std::size_t>(w, 1);
    }

private:
    struct Pending {
        std::size_t slot;
        Lin pre;
        bool relu;
        std::size_t level;
    };

    std::size_t level_of(const Lin& x) const {
        std::size_t lv = 0;
        for (const auto& [c, k] : x.terms) lv = std::max(lv, level_[c]);
        return lv;
    }

    void write(std::size_t slot, Lin pre, bool relu) {
        const std::size_t lv = level_of(pre) + 1;
        level_[slot] = lv;
        pending_.push_back({slot, std::move(pre), relu, lv});
    }

    std::size_t gate(Lin pre) {
        const std::size_t slot = fresh();
        write(slot, std::move(pre), true);
        return slot;
    }

    static AffineMap rows(const std::vector<std::pair<std::size_t, Lin>>& spec, std::size_t in, std::size_t out,
                          std::size_t offset) {
        AffineMap m(in, out);
        for (const auto& [row, lin] : spec) {
            for (const auto& [col, k] : lin.terms) m.set(row, offset + col, k);
            m.set_bias(row, lin.constant);
        }
        return m;
    }

    std::size_t width_;
    std::vector<std::size_t> level_;
    std::vector<Pending> pending_;
    std::vector<std::variant<AttentionSpec, std::size_t>> layers_;
};

namespace detail {

inline uhat::Model assemble(const Circuit& c, const Alphabet& alphabet, const std::vector<RationalVector>& base,
                            std::size_t output, OutputPosition pos) {
    const std::size_t w = c.required_width();
    uhat::Model m;
    m.embedding.alphabet = alphabet;
    for (const auto& v : base) {
        RationalVector padded(w);
        for (std::size_t k = 0; k < v.width(); ++k) padded[k] = v[k];
        m.embedding.vectors.push_back(std::move(padded));
    }
    m.layers = c.build(w);
    m.accept = RationalVector::unit(w, output);
    m.output_position = pos;
    return m;
}

inline void fill_sizes(TranslationReport& r, const uhat::Model& m) {
    r.layers = m.layers.size();
    r.attention_layers = static_cast<std::size_t>(std::count_if(
        m.layers.begin(), m.layers.end(), [](const uhat::Layer& l) { return std::holds_alternative<uhat::AttentionLayer>(l); }));
    const auto ws = m.widths();
    r.max_width = *std::max_element(ws.begin(), ws.end());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// LTL -> UHAT

struct LtlToUhat {
    uhat::Model model;
    /// Source formula, kept alive so the component map's keys stay valid.
    ltl::Formula formula;
    std::unordered_map<const ltl::Node*, std::size_t> component;
    TranslationReport report;
};

/// Component 0 is constant 1, component 1 constant 0, then one indicator per symbol.
/// Every subformula gets a 0/1 component; the acceptance vector reads the root's.
inline LtlToUhat ltl_to_uhat(const ltl::Model& src) {
    using ltl::Op;
    const std::size_t sigma = src.alphabet.size();
    Circuit c(2 + sigma);
    LtlToUhat out;
    out.formula = src.formula;
    auto comp = [&](const ltl::Formula& f) { return Lin::comp(out.component.at(f.get())); };

    for (const ltl::Node* n : ltl::topological_order(src.formula)) {
        std::size_t slot = 0;
        switch (n->op) {
            case Op::top: slot = 0; break;
            case Op::bottom: slot = 1; break;
            case Op::atom: slot = 2 + n->symbol; break;
            case Op::negation: slot = c.materialize(Circuit::negate(comp(n->args[0]))); break;
            case Op::conjunction:
            case Op::disjunction: {
                std::vector<Lin> xs;
                for (const auto& a : n->args) xs.push_back(comp(a));
                slot = c.materialize(n->op == Op::conjunction ? c.gate_and(xs) : c.gate_or(xs));
                break;
            }
            case Op::since:
            case Op::until: {
                // The nearest position (in the mask's direction) where !phi1 | phi2 holds
                // decides the operator: it holds there iff phi2 does.
                const std::size_t stop =
                    c.materialize(c.gate_or({Circuit::negate(comp(n->args[0])), comp(n->args[1])}));
                slot = c.fresh();
                AttentionSpec s;
                s.query.emplace_back(0, Lin::value(Rational(1)));
                s.key.emplace_back(0, Lin::comp(stop));
                s.copies.emplace_back(slot, comp(n->args[1]));
                s.mask = n->op == Op::since ? Mask::future : Mask::past;
                s.tie = n->op == Op::since ? TieBreak::rightmost : TieBreak::leftmost;
                c.attention(std::move(s));
                break;
            }
        }
        out.component.emplace(n, slot);
    }
    c.flush();

    std::vector<RationalVector> base;
    for (std::size_t a = 0; a < sigma; ++a) {
        RationalVector v(2 + sigma);
        v[0] = Rational(1);
        v[2 + a] = Rational(1);
        base.push_back(std::move(v));
    }
    out.model = detail::assemble(c, src.alphabet, base, out.component.at(src.formula.get()), src.output_position);
    out.report.source = "ltl";
    out.report.target = "uhat";
    out.report.formula_nodes = ltl::size(src.formula);
    detail::fill_sizes(out.report, out.model);
    out.report.notes.push_back("root formula -> component " + std::to_string(out.component.at(src.formula.get())));
    return out;
}

// ---------------------------------------------------------------------------
// B-RASP -> UHAT

/// Syntactic class of a score predicate. A score is a conjunction whose
/// conjuncts either mention only j (guards) or are X(i) <-> Y(j) tests.
struct ScoreClass {
    enum class Kind { j_only, equality_block, unsupported } kind = Kind::unsupported;
    std::vector<brasp::BoolExpr> guards;
    /// (vector read at i, vector read at j) per equality test.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::string reason;
};

inline std::string_view to_string(ScoreClass::Kind k) {
    switch (k) {
        case ScoreClass::Kind::j_only: return "j-only";
        case ScoreClass::Kind::equality_block: return "equality-block";
        case ScoreClass::Kind::unsupported: return "unsupported";
    }
    return "unsupported";
}

inline ScoreClass classify_score(const brasp::BoolExpr& score) {
    using brasp::BoolExpr;
    using brasp::PosVar;
    ScoreClass out;
    std::vector<const BoolExpr*> conjuncts;
    std::vector<const BoolExpr*> todo{&score};
    while (!todo.empty()) {
        const BoolExpr* e = todo.back();
        todo.pop_back();
        if (e->kind == BoolExpr::Kind::conjunction) {
            for (auto it = e->args.rbegin(); it != e->args.rend(); ++it) todo.push_back(&*it);
        } else {
            conjuncts.push_back(e);
        }
    }
    for (const BoolExpr* e : conjuncts) {
        if (!e->mentions(PosVar::i)) {
            out.guards.push_back(*e);
            continue;
        }
        if (e->kind == BoolExpr::Kind::equivalence) {
            const BoolExpr& l = e->args[0];
            const BoolExpr& r = e->args[1];
            auto is_ref = [](const BoolExpr& x, PosVar v) { return x.kind == BoolExpr::Kind::ref && x.var == v; };
            if (is_ref(l, PosVar::i) && is_ref(r, PosVar::j)) {
                out.pairs.emplace_back(l.vec, r.vec);
                continue;
            }
            if (is_ref(l, PosVar::j) && is_ref(r, PosVar::i)) {
                out.pairs.emplace_back(r.vec, l.vec);
                continue;
            }
        }
        out.kind = ScoreClass::Kind::unsupported;
        out.reason = "a conjunct depends on i and is not an X(i) <-> Y(j) test";
        out.guards.clear();
        out.pairs.clear();
        return out;
    }
    out.kind = out.pairs.empty() ? ScoreClass::Kind::j_only : ScoreClass::Kind::equality_block;
    return out;
}

/// Equality attention over doubled components (b, 1-b): A = B = projection onto
/// them, so the score counts agreeing bits. C outputs the attended vector.
inline uhat::AttentionLayer build_equality_layer(std::size_t width,
                                                 const std::vector<std::pair<std::size_t, std::size_t>>& doubled,
                                                 Mask mask, TieBreak tie) {
    if (2 * doubled.size() > width) throw DimensionError("equality layer needs width at least twice the bit count");
    uhat::AttentionLayer a;
    a.query = AffineMap(width, width);
    for (std::size_t r = 0; r < doubled.size(); ++r) {
        if (doubled[r].first >= width || doubled[r].second >= width)
            throw DimensionError("equality component out of range");
        a.query.set(2 * r, doubled[r].first, Rational(1));
        a.query.set(2 * r + 1, doubled[r].second, Rational(1));
    }
    a.key = a.query;
    a.combine = AffineMap(2 * width, width);
    for (std::size_t c = 0; c < width; ++c) a.combine.set(c, width + c, Rational(1));
    a.mask = mask;
    a.tie = tie;
    return a;
}

struct BraspToUhat {
    uhat::Model model;
    /// Component of each program vector, indexed like Program::vector_name.
    std::vector<std::size_t> component;
    std::vector<ScoreClass::Kind> score_classes;  // per definition; j_only for position-wise
    TranslationReport report;
};

namespace detail {

class BraspCompiler {
public:
    explicit BraspCompiler(const brasp::Program& p) : p_(p), c_(p.alphabet().size()) {
        for (std::size_t a = 0; a < p.alphabet().size(); ++a) comp_.push_back(a);
    }

    BraspToUhat run() {
        BraspToUhat out;
        const std::size_t sigma = p_.alphabet().size();
        for (const auto& d : p_.definitions()) {
            if (const auto* e = std::get_if<brasp::BoolExpr>(&d.op)) {
                comp_.push_back(c_.materialize(lin(*e, {})));
                out.score_classes.push_back(ScoreClass::Kind::j_only);
            } else {
                const auto& a = std::get<brasp::Attention>(d.op);
                ScoreClass sc = classify_score(a.score);
                if (sc.kind == ScoreClass::Kind::unsupported)
                    throw TranslationError("definition '" + d.name + "': score predicate is not supported (" +
                                           sc.reason + ")");
                out.score_classes.push_back(sc.kind);
                comp_.push_back(attention(a, sc));
            }
        }
        c_.flush();
        std::vector<RationalVector> base;
        for (std::size_t a = 0; a < sigma; ++a) base.push_back(RationalVector::unit(sigma, a));
        out.model = assemble(c_, p_.alphabet(), base, comp_[p_.output()], p_.output_position());
        out.component = comp_;
        out.report.source = "brasp";
        out.report.target = "uhat";
        fill_sizes(out.report, out.model);
        for (std::size_t k = 0; k < p_.vector_count(); ++k)
            out.report.notes.push_back(p_.vector_name(k) + " -> component " + std::to_string(comp_[k]));
        for (std::size_t k = 0; k < p_.definitions().size(); ++k)
            out.report.notes.push_back(p_.definitions()[k].name + " score class " +
                                       std::string(to_string(out.score_classes[k])));
        return out;
    }

private:
    using Copies = std::map<std::size_t, std::size_t>;

    Lin lin(const brasp::BoolExpr& e, const Copies& at_j) {
        using K = brasp::BoolExpr::Kind;
        switch (e.kind) {
            case K::constant: return Lin::value(Rational(e.value ? 1 : 0));
            case K::ref:
                if (e.var == brasp::PosVar::i) return Lin::comp(comp_[e.vec]);
                return Lin::comp(at_j.at(e.vec));
            case K::negation: return Circuit::negate(lin(e.args[0], at_j));
            case K::conjunction:
            case K::disjunction: {
                std::vector<Lin> xs;
                for (const auto& a : e.args) xs.push_back(lin(a, at_j));
                return e.kind == K::conjunction ? c_.gate_and(xs) : c_.gate_or(xs);
            }
            case K::implication:
                return c_.gate_or({Circuit::negate(lin(e.args[0], at_j)), lin(e.args[1], at_j)});
            case K::equivalence: return c_.gate_iff(lin(e.args[0], at_j), lin(e.args[1], at_j));
        }
        return Lin{};
    }

    /// Guard conjuncts evaluated at every position, so B can read them at j.
    std::size_t guard_component(const std::vector<brasp::BoolExpr>& guards) {
        // Guards only mention j; evaluating them position-wise means reading j-refs as i-refs.
        std::vector<Lin> xs;
        for (const auto& g : guards) xs.push_back(lin(as_positionwise(g), {}));
        return c_.materialize(c_.gate_and(xs));
    }

    static brasp::BoolExpr as_positionwise(brasp::BoolExpr e) {
        if (e.kind == brasp::BoolExpr::Kind::ref) e.var = brasp::PosVar::i;
        for (auto& a : e.args) a = as_positionwise(std::move(a));
        return e;
    }

    std::size_t complement(std::size_t vec) {
        if (auto it = complement_.find(vec); it != complement_.end()) return it->second;
        const std::size_t c = c_.materialize(Circuit::negate(Lin::comp(comp_[vec])));
        complement_.emplace(vec, c);
        return c;
    }

    static void collect_j_refs(const brasp::BoolExpr& e, std::vector<std::size_t>& out) {
        if (e.kind == brasp::BoolExpr::Kind::ref && e.var == brasp::PosVar::j) {
            if (std::find(out.begin(), out.end(), e.vec) == out.end()) out.push_back(e.vec);
        }
        for (const auto& a : e.args) collect_j_refs(a, out);
    }

    std::size_t attention(const brasp::Attention& a, const ScoreClass& sc) {
        const std::size_t guard = guard_component(sc.guards);
        AttentionSpec s;
        s.mask = a.mask;
        s.tie = a.direction == brasp::Direction::min ? TieBreak::leftmost : TieBreak::rightmost;
        const std::size_t d = sc.pairs.size();
        for (std::size_t r = 0; r < d; ++r) {
            const auto [x, y] = sc.pairs[r];
            s.query.emplace_back(2 * r, Lin::comp(comp_[x]));
            s.query.emplace_back(2 * r + 1, Lin::comp(complement(x)));
            s.key.emplace_back(2 * r, Lin::comp(comp_[y]));
            s.key.emplace_back(2 * r + 1, Lin::comp(complement(y)));
        }
        // A satisfying j scores 2d+1; any other j at most 2d.
        s.query.emplace_back(2 * d, Lin::value(Rational(static_cast<long>(d + 1))));
        s.key.emplace_back(2 * d, Lin::comp(guard));

        std::vector<std::size_t> needed;
        collect_j_refs(a.value, needed);
        for (const auto& [x, y] : sc.pairs)
            if (std::find(needed.begin(), needed.end(), y) == needed.end()) needed.push_back(y);
        Copies at_j;
        for (auto vec : needed) {
            const std::size_t slot = c_.fresh();
            at_j.emplace(vec, slot);
            s.copies.emplace_back(slot, Lin::comp(comp_[vec]));
        }
        const std::size_t guard_copy = c_.fresh();
        s.copies.emplace_back(guard_copy, Lin::comp(guard));
        c_.attention(std::move(s));

        // The attended position satisfies the score iff its guard held and every
        // equality test passes on the copied bits.
        std::vector<Lin> checks{Lin::comp(guard_copy)};
        for (const auto& [x, y] : sc.pairs) checks.push_back(c_.gate_iff(Lin::comp(comp_[x]), Lin::comp(at_j.at(y))));
        const Lin found = c_.gate_and(checks);
        const Lin value = lin(a.value, at_j);
        const Lin fallback = lin(a.fallback, {});
        return c_.materialize(
            c_.gate_or({c_.gate_and({found, value}), c_.gate_and({Circuit::negate(found), fallback})}));
    }

    const brasp::Program& p_;
    Circuit c_;
    std::vector<std::size_t> comp_;
    std::map<std::size_t, std::size_t> complement_;
};

}  // namespace detail

/// Throws TranslationError naming the first definition whose score is unsupported.
inline BraspToUhat brasp_to_uhat(const brasp::Program& p) { return detail::BraspCompiler(p).run(); }

// ---------------------------------------------------------------------------
// UHAT -> LTL

struct UhatToLtl {
    ltl::Model model;
    /// values[l] is the reachable set after layer l; formulas[l][k] holds exactly
    /// where layer l outputs values[l][k].
    std::vector<std::vector<RationalVector>> values;
    std::vector<std::vector<ltl::Formula>> formulas;
    TranslationReport report;
};

namespace detail {

/// Disjunctions of value formulas by score relative to one query vector u.
class ScoreBands {
public:
    ScoreBands(const std::vector<Rational>& scores, const std::vector<ltl::Formula>& phi) {
        std::vector<std::size_t> order(scores.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return scores[x] < scores[y]; });
        // Distinct scores ascending, with prefix and suffix disjunctions over the bands.
        std::vector<std::vector<ltl::Formula>> bands;
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (k == 0 || scores[order[k]] != levels_.back()) {
                levels_.push_back(scores[order[k]]);
                bands.emplace_back();
            }
            bands.back().push_back(phi[order[k]]);
        }
        below_.push_back(ltl::bottom());
        for (const auto& b : bands) {
            std::vector<ltl::Formula> xs{below_.back()};
            xs.insert(xs.end(), b.begin(), b.end());
            below_.push_back(ltl::or_of(xs));
        }
        above_.assign(bands.size() + 1, ltl::bottom());
        for (std::size_t k = bands.size(); k-- > 0;) {
            std::vector<ltl::Formula> xs{above_[k + 1]};
            xs.insert(xs.end(), bands[k].begin(), bands[k].end());
            above_[k] = ltl::or_of(xs);
        }
    }

    /// Scores strictly below s.
    const ltl::Formula& less(const Rational& s) const { return below_[band(s)]; }
    /// Scores at least s.
    const ltl::Formula& geq(const Rational& s) const { return above_[band(s)]; }
    /// Scores strictly above s.
    const ltl::Formula& greater(const Rational& s) const {
        const std::size_t b = band(s);
        return above_[b < levels_.size() && levels_[b] == s ? b + 1 : b];
    }

private:
    std::size_t band(const Rational& s) const {
        return static_cast<std::size_t>(std::lower_bound(levels_.begin(), levels_.end(), s) - levels_.begin());
    }

    std::vector<Rational> levels_;
    std::vector<ltl::Formula> below_;  // below_[k]: bands 0..k-1
    std::vector<ltl::Formula> above_;  // above_[k]: bands k..end
};

inline std::size_t index_in(const std::vector<RationalVector>& set, const RationalVector& v) {
    auto it = std::lower_bound(set.begin(), set.end(), v);
    if (it == set.end() || *it != v) throw TranslationError("value outside the reachable set: " + v.str());
    return static_cast<std::size_t>(it - set.begin());
}

inline std::vector<ltl::Formula> attention_formulas(const uhat::AttentionLayer& layer,
                                                    const std::vector<RationalVector>& in,
                                                    const std::vector<ltl::Formula>& phi,
                                                    const std::vector<RationalVector>& out) {
    using namespace ltl;
    const std::size_t count = in.size();
    std::vector<std::vector<Formula>> disjuncts(out.size());
    std::vector<RationalVector> keys;
    for (const auto& b : in) keys.push_back(affine_apply(layer.key, b));
    const bool past_mask = layer.mask == Mask::past;
    // Mask direction helpers: "before" looks toward the unmasked side.
    auto before = [&](Formula f) { return past_mask ? until_of(top(), std::move(f)) : since_of(top(), std::move(f)); };
    auto between = [&](Formula a, Formula b) {
        return past_mask ? until_of(std::move(a), std::move(b)) : since_of(std::move(a), std::move(b));
    };
    const RationalVector zero(in.empty() ? 0 : in.front().width());

    for (std::size_t ui = 0; ui < count; ++ui) {
        const auto& u = in[ui];
        const RationalVector q = affine_apply(layer.query, u);
        std::vector<Rational> scores;
        for (const auto& k : keys) scores.push_back(dot(q, k));
        const ScoreBands bands(scores, phi);
        const Formula& pu = phi[ui];

        if (layer.mask != Mask::none) {
            // No unmasked position at all.
            disjuncts[index_in(out, affine_apply(layer.combine, u, zero))].push_back(
                and_of({pu, not_of(before(top()))}));
        }
        for (std::size_t ai = 0; ai < count; ++ai) {
            const auto& a = in[ai];
            const Rational& s = scores[ai];
            const Formula& pa = phi[ai];
            std::vector<Formula> cases;
            if (layer.mask != Mask::none) {
                // Nearest maximizer in the mask direction, or the farthest one.
                const bool nearest = (layer.mask == Mask::future) == (layer.tie == TieBreak::rightmost);
                if (nearest) {
                    cases.push_back(
                        and_of({pu, between(bands.less(s), and_of({pa, not_of(before(bands.greater(s)))}))}));
                } else {
                    cases.push_back(and_of({pu, before(and_of({pa, not_of(before(bands.geq(s)))})),
                                            not_of(before(bands.greater(s)))}));
                }
            } else {
                const Rational self = scores[ui];
                const bool right = layer.tie == TieBreak::rightmost;
                // Attends itself.
                if (ai == ui) {
                    cases.push_back(right ? and_of({pu, not_of(past(bands.greater(s))), not_of(future(bands.geq(s)))})
                                          : and_of({pu, not_of(past(bands.geq(s))), not_of(future(bands.greater(s)))}));
                }
                // Attends strictly to the left.
                if (right ? s > self : s >= self) {
                    cases.push_back(
                        right ? and_of({pu, not_of(future(bands.geq(s))),
                                        since_of(bands.less(s), and_of({pa, not_of(past(bands.greater(s)))}))})
                              : and_of({pu, not_of(future(bands.greater(s))),
                                        past(and_of({pa, not_of(past(bands.geq(s)))})), not_of(past(bands.greater(s)))}));
                }
                // Attends strictly to the right.
                if (right ? s >= self : s > self) {
                    cases.push_back(
                        right ? and_of({pu, not_of(past(bands.greater(s))),
                                        future(and_of({pa, not_of(future(bands.geq(s)))})),
                                        not_of(future(bands.greater(s)))})
                              : and_of({pu, not_of(past(bands.geq(s))),
                                        until_of(bands.less(s), and_of({pa, not_of(future(bands.greater(s)))}))}));
                }
            }
            if (!cases.empty())
                disjuncts[index_in(out, affine_apply(layer.combine, u, a))].push_back(or_of(cases));
        }
    }
    std::vector<Formula> result;
    for (auto& d : disjuncts) result.push_back(or_of(d));
    return result;
}

}  // namespace detail

/// Throws BlowUpError when a reachable set exceeds `cap`.
inline UhatToLtl uhat_to_ltl(const uhat::Model& m, std::size_t cap = 100000) {
    using namespace ltl;
    m.validate();
    UhatToLtl out;
    out.values = uhat::reachable_value_sets(m, cap);

    std::vector<Formula> phi;
    for (const auto& v : out.values[0]) {
        std::vector<Formula> xs;
        for (std::size_t a = 0; a < m.embedding.alphabet.size(); ++a)
            if (m.embedding(a) == v) xs.push_back(atom(a));
        phi.push_back(or_of(xs));
    }
    out.formulas.push_back(phi);

    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const auto& in = out.values[l];
        const auto& next_values = out.values[l + 1];
        std::vector<Formula> next;
        if (const auto* a = std::get_if<uhat::AttentionLayer>(&m.layers[l])) {
            next = detail::attention_formulas(*a, in, phi, next_values);
        } else {
            const auto& r = std::get<uhat::ReluLayer>(m.layers[l]);
            std::vector<std::vector<Formula>> pre(next_values.size());
            for (std::size_t k = 0; k < in.size(); ++k)
                pre[detail::index_in(next_values, uhat::apply_relu(r, in[k]))].push_back(phi[k]);
            for (auto& p : pre) next.push_back(or_of(p));
        }
        phi = std::move(next);
        out.formulas.push_back(phi);
    }

    std::vector<Formula> accepting;
    for (std::size_t k = 0; k < out.values.back().size(); ++k)
        if (dot(m.accept, out.values.back()[k]).sign() > 0) accepting.push_back(phi[k]);
    out.model = ltl::Model{m.embedding.alphabet, or_of(accepting), m.output_position};

    out.report.source = "uhat";
    out.report.target = "ltl";
    out.report.layers = m.layers.size();
    const auto ws = m.widths();
    out.report.max_width = *std::max_element(ws.begin(), ws.end());
    out.report.formula_nodes = ltl::size(out.model.formula);
    for (std::size_t l = 0; l < out.values.size(); ++l)
        out.report.notes.push_back("layer " + std::to_string(l) + " reachable values " +
                                   std::to_string(out.values[l].size()));
    return out;
}

}  // namespace hardattn::translate
