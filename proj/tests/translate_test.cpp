#include <gtest/gtest.h>

#include <random>

#include "hardattn/translate.hpp"
#include "support/random_models.hpp"

using namespace hardattn;
using namespace hardattn::translate;

namespace {

const Alphabet ab({"a", "b"});

Rational r(long p, long q = 1) { return Rational(p, q); }

std::vector<Word> words_up_to(const Alphabet& a, std::size_t max_len) {
    std::vector<Word> out;
    for (WordEnumerator e(a, max_len); !e.done(); e.next()) out.push_back(e.word());
    return out;
}

ltl::Model ltl_model(std::string_view text, OutputPosition pos = OutputPosition::first) {
    return {ab, ltl::parse_formula(text, ab), pos};
}

AffineMap copy_attended(std::size_t width) {
    AffineMap c(2 * width, width);
    for (std::size_t k = 0; k < width; ++k) c.set(k, width + k, r(1));
    return c;
}

}  // namespace

TEST(LtlToUhat, AtomIsItsIndicatorComponent) {
    auto t = ltl_to_uhat(ltl_model("Q(b)"));
    EXPECT_EQ(t.model.layers.size(), 0u);
    EXPECT_EQ(t.component.at(t.formula.get()), 3u);
    EXPECT_EQ(t.model.embedding(1)[3], r(1));
    EXPECT_EQ(t.model.embedding(0)[3], r(0));
    EXPECT_EQ(t.model.accept, RationalVector::unit(4, 3));
}

TEST(LtlToUhat, SinceAgreesOnAllShortWords) {
    for (auto pos : {OutputPosition::first, OutputPosition::last}) {
        auto src = ltl_model("Q(a) S Q(b)", pos);
        auto t = ltl_to_uhat(src);
        const auto words = words_up_to(ab, 5);
        EXPECT_EQ(words.size(), 62u);
        for (const auto& word : words) EXPECT_EQ(uhat::accepts(t.model, word), ltl::accepts(src, word)) << format_word(word);
    }
}

TEST(LtlToUhat, AbStarFormulaLanguage) {
    auto src = ltl_model("G (Q(a) -> X Q(b)) & G (Q(b) & X true -> X Q(a))");
    auto t = ltl_to_uhat(src);
    std::vector<std::string> accepted, expected;
    for (const auto& word : words_up_to(ab, 6)) {
        if (uhat::accepts(t.model, word)) accepted.push_back(format_word(word));
        if (ltl::accepts(src, word)) expected.push_back(format_word(word));
    }
    EXPECT_EQ(accepted, expected);
    EXPECT_EQ(accepted, (std::vector<std::string>{"b", "ab", "bab", "abab", "babab", "ababab"}));
}

TEST(LtlToUhat, EverySubformulaComponentTracksItsTruthValue) {
    std::mt19937_64 rng(21);
    const auto words = words_up_to(ab, 5);
    for (int trial = 0; trial < 60; ++trial) {
        ltl::Model src{ab, testkit::random_formula(rng, 4, 2), OutputPosition::last};
        auto t = ltl_to_uhat(src);
        for (const auto& word : words) {
            const auto out = uhat::run(t.model, word);
            ltl::Evaluator ev(ab.encode(word));
            for (const auto* n : ltl::topological_order(src.formula)) {
                // Rebuild a handle that shares the node so the evaluator can memoize it.
                const auto& table = ev.table(std::shared_ptr<const ltl::Node>(src.formula, n));
                for (std::size_t i = 0; i < word.size(); ++i)
                    ASSERT_EQ(out[i][t.component.at(n)], r(table[i] ? 1 : 0)) << format_word(word);
            }
        }
    }
}

TEST(LtlToUhat, SizeIsLinearInTheFormula) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 200; ++trial) {
        ltl::Model src{ab, testkit::random_formula(rng, 6, 2), OutputPosition::first};
        auto t = ltl_to_uhat(src);
        const std::size_t size = ltl::size(src.formula);
        EXPECT_LE(t.report.layers, 4 * size);
        EXPECT_LE(t.report.max_width, 3 * size + 2 + ab.size());
        EXPECT_EQ(t.report.formula_nodes, size);
    }
}

TEST(ScoreClassification, Shapes) {
    using namespace brasp;
    EXPECT_EQ(classify_score(lit(true)).kind, ScoreClass::Kind::j_only);
    EXPECT_EQ(classify_score(all({ref(0, PosVar::j), neg(ref(1, PosVar::j))})).kind, ScoreClass::Kind::j_only);
    auto eq = classify_score(all({ref(0, PosVar::j), iff(ref(1, PosVar::i), ref(1, PosVar::j)),
                                  all({iff(ref(2, PosVar::j), ref(0, PosVar::i))})}));
    EXPECT_EQ(eq.kind, ScoreClass::Kind::equality_block);
    EXPECT_EQ(eq.pairs, (std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {0, 2}}));
    EXPECT_EQ(eq.guards.size(), 1u);
    EXPECT_EQ(classify_score(any({all({ref(0, PosVar::i), neg(ref(0, PosVar::j))}), ref(1, PosVar::j)})).kind,
              ScoreClass::Kind::unsupported);
    EXPECT_EQ(classify_score(ref(0, PosVar::i)).kind, ScoreClass::Kind::unsupported);
    EXPECT_EQ(classify_score(iff(neg(ref(0, PosVar::i)), ref(0, PosVar::j))).kind, ScoreClass::Kind::unsupported);
}

TEST(BraspToUhat, UnsupportedScoreNamesTheDefinition) {
    auto p = brasp::parse(
        "alphabet: a b\n"
        "def P1(i) = Q['a'](i)\n"
        "def P2(i) = Q['b'](i)\n"
        "def Bad(i) = attn max j [ j<i | P1(i) & !P1(j) | P2(j) ] 1 default 0\n"
        "output: Bad last\n");
    try {
        brasp_to_uhat(p);
        FAIL();
    } catch (const TranslationError& e) {
        EXPECT_NE(std::string(e.what()).find("'Bad'"), std::string::npos);
    }
}

TEST(BraspToUhat, PositionwiseProgram) {
    auto p = brasp::parse(
        "alphabet: a b\n"
        "def X(i) = Q['a'](i) -> Q['b'](i)\n"
        "def Y(i) = (X(i) <-> Q['a'](i)) | !X(i) & 1\n"
        "def Z(i) = Y(i) & X(i) & !Q['b'](i)\n"
        "output: Y last\n");
    auto t = brasp_to_uhat(p);
    for (const auto& a : t.model.layers)
        if (const auto* l = std::get_if<uhat::AttentionLayer>(&a)) {
            EXPECT_TRUE(l->query.row(0).empty());
        }
    for (const auto& word : words_up_to(ab, 5)) EXPECT_EQ(uhat::accepts(t.model, word), brasp::accepts(p, word));
}

TEST(BraspToUhat, PerVectorTracesMatchOnRandomPrograms) {
    std::mt19937_64 rng(31);
    const auto words = words_up_to(ab, 5);
    for (int trial = 0; trial < 80; ++trial) {
        auto p = testkit::random_program(rng, 1 + trial % 6, ab);
        auto t = brasp_to_uhat(p);
        for (const auto& word : words) {
            const auto trace = brasp::eval(p, word);
            const auto out = uhat::run(t.model, word);
            for (std::size_t v = 0; v < p.vector_count(); ++v)
                for (std::size_t i = 0; i < word.size(); ++i)
                    ASSERT_EQ(out[i][t.component[v]], r(trace[v][i] ? 1 : 0))
                        << "trial " << trial << " vector " << p.vector_name(v) << " word " << format_word(word)
                        << "\n" << brasp::to_text(p);
            EXPECT_EQ(uhat::accepts(t.model, word), brasp::accepts(p, word));
        }
    }
}

TEST(EqualityLayer, Examples) {
    auto layer = build_equality_layer(2, {{0, 1}}, Mask::none, uhat::TieBreak::rightmost);
    std::vector<RationalVector> seq{{r(1), r(0)}, {r(0), r(1)}, {r(1), r(0)}};
    auto res = uhat::apply_attention(layer, seq);
    EXPECT_EQ(res.chosen[0], 2u);
    EXPECT_EQ(res.outputs[0], seq[2]);
    std::vector<RationalVector> same(4, RationalVector{r(0), r(1)});
    EXPECT_EQ(uhat::apply_attention(layer, same).chosen[1], 3u);
    // No match: some best partial match is chosen anyway.
    auto two = build_equality_layer(4, {{0, 1}, {2, 3}}, Mask::future, uhat::TieBreak::rightmost);
    std::vector<RationalVector> partial{{r(1), r(0), r(0), r(1)}, {r(0), r(1), r(0), r(1)}, {r(1), r(0), r(1), r(0)}};
    EXPECT_EQ(uhat::apply_attention(two, partial).chosen[2], 0u);
    EXPECT_THROW(build_equality_layer(3, {{0, 1}, {1, 2}}, Mask::none, uhat::TieBreak::leftmost), DimensionError);
}

TEST(UhatToLtl, EmbeddingOnly) {
    uhat::Model m;
    m.embedding.alphabet = ab;
    m.embedding.vectors = {{r(1)}, {r(0)}};
    m.accept = {r(1)};
    auto t = uhat_to_ltl(m);
    EXPECT_TRUE(ltl::equal(t.model.formula, ltl::atom(0)));
    EXPECT_EQ(t.model.output_position, OutputPosition::last);
}

TEST(UhatToLtl, FutureRightmostLayer) {
    uhat::Model m;
    m.embedding.alphabet = ab;
    m.embedding.vectors = {{r(1), r(0)}, {r(0), r(1)}};
    uhat::AttentionLayer a;
    a.query = AffineMap::identity(2);
    a.key = AffineMap::identity(2);
    a.combine = copy_attended(2);
    a.mask = Mask::future;
    a.tie = uhat::TieBreak::rightmost;
    m.layers.emplace_back(a);
    m.accept = {r(0), r(1)};
    auto t = uhat_to_ltl(m);
    for (const auto& word : words_up_to(ab, 5))
        EXPECT_EQ(ltl::accepts(t.model, word), uhat::accepts(m, word)) << format_word(word);
}

TEST(UhatToLtl, RandomModelsAgreeAndFormulasPartitionPositions) {
    std::mt19937_64 rng(41);
    const auto words = words_up_to(ab, 5);
    for (int trial = 0; trial < 60; ++trial) {
        auto m = testkit::random_model(rng, {.first_combination = trial % 6});
        auto t = uhat_to_ltl(m);
        for (const auto& word : words) {
            ASSERT_EQ(ltl::accepts(t.model, word), uhat::accepts(m, word)) << "trial " << trial << " " << format_word(word);
            const auto trace = uhat::simulate(m, word);
            ltl::Evaluator ev(ab.encode(word));
            for (std::size_t l = 0; l < t.values.size(); ++l)
                for (std::size_t i = 0; i < word.size(); ++i) {
                    std::size_t holding = 0;
                    for (std::size_t k = 0; k < t.values[l].size(); ++k)
                        if (ev.at(t.formulas[l][k], i)) {
                            ++holding;
                            EXPECT_EQ(t.values[l][k], trace.sequences[l][i]);
                        }
                    ASSERT_EQ(holding, 1u) << "trial " << trial << " layer " << l;
                }
        }
    }
}

TEST(UhatToLtl, CapIsPropagated) {
    std::mt19937_64 rng(43);
    auto m = testkit::random_model(rng);
    EXPECT_THROW(uhat_to_ltl(m, 1), BlowUpError);
}

TEST(RoundTrip, LtlThroughUhatAndBack) {
    std::mt19937_64 rng(51);
    const auto words = words_up_to(ab, 4);
    for (int trial = 0; trial < 40; ++trial) {
        ltl::Model src{ab, testkit::random_formula(rng, 3, 2), trial % 2 ? OutputPosition::first : OutputPosition::last};
        auto back = uhat_to_ltl(ltl_to_uhat(src).model);
        for (const auto& word : words)
            ASSERT_EQ(ltl::accepts(back.model, word), ltl::accepts(src, word)) << "trial " << trial << " "
                                                                               << format_word(word);
    }
}
