#pragma once

// Seeded generators for small random UHATs and LTL formulas used by the property suites.

#include <cstdint>
#include <random>
#include <vector>

#include "hardattn/brasp.hpp"
#include "hardattn/ltl.hpp"
#include "hardattn/uhat.hpp"

namespace hardattn::testkit {

inline std::uint64_t pick(std::mt19937_64& rng, std::uint64_t k) { return rng() % k; }

inline Rational pick_rational(std::mt19937_64& rng, const std::vector<Rational>& pool) {
    return pool[pick(rng, pool.size())];
}

inline AffineMap random_map(std::mt19937_64& rng, std::size_t in, std::size_t out, const std::vector<Rational>& pool) {
    AffineMap m(in, out);
    for (std::size_t r = 0; r < out; ++r) {
        for (std::size_t c = 0; c < in; ++c)
            if (pick(rng, 2) == 0) m.set(r, c, pick_rational(rng, pool));
        if (pick(rng, 3) == 0) m.set_bias(r, pick_rational(rng, pool));
    }
    return m;
}

struct RandomModelOptions {
    std::size_t max_attention = 2;
    std::size_t max_width = 3;
    std::vector<Symbol> alphabet{"a", "b"};
    /// Index into the six mask x tie combinations for the first attention layer; -1 picks at random.
    int first_combination = -1;
};

inline uhat::Model random_model(std::mt19937_64& rng, const RandomModelOptions& opt = {}) {
    const std::vector<Rational> embed_pool{Rational(0), Rational(1, 2), Rational(1)};
    const std::vector<Rational> coeff_pool{Rational(-1), Rational(-1, 2), Rational(1, 2), Rational(1), Rational(2)};
    uhat::Model m;
    m.embedding.alphabet = Alphabet(opt.alphabet);
    std::size_t width = 1 + pick(rng, opt.max_width);
    for (std::size_t a = 0; a < opt.alphabet.size(); ++a) {
        RationalVector v(width);
        for (std::size_t k = 0; k < width; ++k) v[k] = pick_rational(rng, embed_pool);
        m.embedding.vectors.push_back(v);
    }
    const std::size_t attention = 1 + pick(rng, opt.max_attention);
    for (std::size_t l = 0; l < attention; ++l) {
        uhat::AttentionLayer a;
        int combo = (l == 0 && opt.first_combination >= 0) ? opt.first_combination : int(pick(rng, 6));
        a.mask = combo / 2 == 0 ? Mask::none : combo / 2 == 1 ? Mask::future : Mask::past;
        a.tie = combo % 2 == 0 ? uhat::TieBreak::leftmost : uhat::TieBreak::rightmost;
        const std::size_t out = 1 + pick(rng, opt.max_width);
        a.query = random_map(rng, width, width, coeff_pool);
        a.key = random_map(rng, width, width, coeff_pool);
        a.combine = random_map(rng, 2 * width, out, coeff_pool);
        m.layers.emplace_back(std::move(a));
        width = out;
        if (pick(rng, 2) == 0) m.layers.emplace_back(uhat::ReluLayer{pick(rng, width)});
    }
    m.accept = RationalVector(width);
    for (std::size_t k = 0; k < width; ++k) m.accept[k] = pick_rational(rng, coeff_pool);
    if (pick(rng, 4) == 0) m.accept[pick(rng, width)] = Rational(0);
    m.output_position = pick(rng, 2) == 0 ? OutputPosition::first : OutputPosition::last;
    m.validate();
    return m;
}

/// Random formula of depth at most `depth` over `symbols` atoms, sugar included.
inline ltl::Formula random_formula(std::mt19937_64& rng, std::size_t depth, std::size_t symbols) {
    using namespace ltl;
    if (depth <= 1 || pick(rng, 5) == 0) {
        switch (pick(rng, 6)) {
            case 0: return top();
            case 1: return bottom();
            default: return atom(pick(rng, symbols));
        }
    }
    auto sub = [&] { return random_formula(rng, depth - 1, symbols); };
    switch (pick(rng, 11)) {
        case 0: return neg(sub());
        case 1: return conj(sub(), sub());
        case 2: return disj(sub(), sub());
        case 3:
        case 4: return since(sub(), sub());
        case 5:
        case 6: return until(sub(), sub());
        case 7: return next(sub());
        case 8: return past(sub());
        case 9: return future(sub());
        default: {
            // G adds four levels once desugared.
            if (depth < 5) return next(sub());
            return globally(random_formula(rng, depth - 4, symbols));
        }
    }
}

/// Random Boolean expression over vectors [0, vectors) at `var`, plus j-refs when allowed.
inline brasp::BoolExpr random_expr(std::mt19937_64& rng, std::size_t vectors, std::size_t depth, bool with_j) {
    using namespace brasp;
    auto leaf = [&] {
        if (pick(rng, 8) == 0) return lit(pick(rng, 2) == 1);
        return ref(pick(rng, vectors), with_j && pick(rng, 2) ? PosVar::j : PosVar::i);
    };
    if (depth <= 1 || pick(rng, 4) == 0) return leaf();
    auto sub = [&] { return random_expr(rng, vectors, depth - 1, with_j); };
    switch (pick(rng, 6)) {
        case 0: return neg(sub());
        case 1: return all({sub(), sub()});
        case 2: return any({sub(), sub(), sub()});
        case 3: return implies(sub(), sub());
        case 4: return iff(sub(), sub());
        default: return all({sub(), neg(sub())});
    }
}

inline brasp::BoolExpr only_j(brasp::BoolExpr e) {
    if (e.kind == brasp::BoolExpr::Kind::ref) e.var = brasp::PosVar::j;
    for (auto& a : e.args) a = only_j(std::move(a));
    return e;
}

/// Random program whose scores are guard-only or guard plus X(i) <-> Y(j) tests.
inline brasp::Program random_program(std::mt19937_64& rng, std::size_t definitions, const Alphabet& alphabet) {
    using namespace brasp;
    Program p(alphabet);
    for (std::size_t d = 0; d < definitions; ++d) {
        const std::size_t vectors = p.vector_count();
        const std::string name = "V" + std::to_string(d);
        if (pick(rng, 3) == 0) {
            p.define(name, random_expr(rng, vectors, 3, false));
            continue;
        }
        Attention a;
        a.direction = pick(rng, 2) ? Direction::max : Direction::min;
        a.mask = static_cast<Mask>(pick(rng, 3));
        std::vector<BoolExpr> conj;
        if (pick(rng, 4)) conj.push_back(only_j(random_expr(rng, vectors, 2, false)));
        if (pick(rng, 2))
            for (std::size_t k = 0, n = 1 + pick(rng, 2); k < n; ++k)
                conj.push_back(iff(ref(pick(rng, vectors), PosVar::i), ref(pick(rng, vectors), PosVar::j)));
        a.score = all(std::move(conj));
        a.value = random_expr(rng, vectors, 3, true);
        a.fallback = random_expr(rng, vectors, 2, false);
        p.define(name, std::move(a));
    }
    p.set_output("V" + std::to_string(definitions - 1), pick(rng, 2) ? OutputPosition::last : OutputPosition::first);
    return p;
}

}  // namespace hardattn::testkit
