#include <gtest/gtest.h>

#include <random>

#include "hardattn/brasp.hpp"

using namespace hardattn;
using namespace hardattn::brasp;

namespace {

Word w(std::string_view s) {
    Word out;
    for (char c : s) out.emplace_back(1, c);
    return out;
}

std::vector<bool> bits(std::string_view s) {
    std::vector<bool> out;
    for (char c : s) out.push_back(c == '1');
    return out;
}

}  // namespace

TEST(BraspParse, SmallestProgram) {
    Program p = parse("alphabet: a b\ndef Y(i) = Q['a'](i)\noutput: Y last\n");
    EXPECT_EQ(p.alphabet().symbols(), (std::vector<Symbol>{"a", "b"}));
    ASSERT_EQ(p.definitions().size(), 1u);
    EXPECT_EQ(std::get<BoolExpr>(p.definitions()[0].op), ref(0, PosVar::i));
    EXPECT_EQ(p.output(), 2u);
    EXPECT_EQ(p.output_position(), OutputPosition::last);
}

TEST(BraspParse, HorizontalConstraintOperation) {
    const char* text =
        "alphabet: 0 1 '#' a b c\n"
        "def M(i) = attn max j [ j<i | Q['a'](j) | Q['b'](j) | Q['c'](j) ] "
        "Q['a'](j) & Q['b'](i) | Q['b'](j) & Q['c'](i) | Q['b'](j) & Q['a'](i) | Q['c'](j) & Q['b'](i) default 1\n"
        "output: M last\n";
    Program p = parse(text);
    const auto& a = std::get<Attention>(p.definitions()[0].op);
    EXPECT_EQ(a.direction, Direction::max);
    EXPECT_EQ(a.mask, Mask::future);
    const std::size_t A = 3, B = 4, C = 5;
    EXPECT_EQ(a.score, any({ref(A, PosVar::j), ref(B, PosVar::j), ref(C, PosVar::j)}));
    auto pair = [](std::size_t h, std::size_t h2) { return all({ref(h, PosVar::j), ref(h2, PosVar::i)}); };
    EXPECT_EQ(a.value, any({pair(A, B), pair(B, C), pair(B, A), pair(C, B)}));
    EXPECT_EQ(a.fallback, lit(true));
}

TEST(BraspParse, ScopeErrors) {
    EXPECT_THROW(parse("alphabet: a\ndef X(i) = Y(i)\ndef Y(i) = 1\noutput: X last\n"), ScopeError);
    try {
        parse("alphabet: a\ndef X(i) = Later(i)\noutput: X last\n");
        FAIL();
    } catch (const ScopeError& e) {
        EXPECT_NE(std::string(e.what()).find("Later"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    EXPECT_THROW(parse("alphabet: a\ndef X(i) = Q['a'](j)\noutput: X last\n"), ScopeError);
    EXPECT_THROW(parse("alphabet: a\ndef X(i) = attn max j [ * | 1 ] 1 default Q['a'](j)\noutput: X last\n"),
                 ScopeError);
    EXPECT_THROW(parse("alphabet: a\ndef X(i) = Q['z'](i)\noutput: X last\n"), ScopeError);
    EXPECT_THROW(parse("alphabet: a\ndef X(i) = 1\ndef X(i) = 0\noutput: X last\n"), ScopeError);
    EXPECT_THROW(parse("alphabet: a\ndef X(i) = 1\noutput: Y last\n"), ScopeError);
}

TEST(BraspParse, SyntaxErrorsCarryPosition) {
    try {
        parse("alphabet: a\ndef X(i) = Q['a'](i) &\noutput: X last\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 2u);
        EXPECT_GT(e.column, 0u);
    }
    EXPECT_THROW(parse("def X(i) = 1\n"), ParseError);
    EXPECT_THROW(parse("alphabet: a\ndef X(i) = 1\n"), ParseError);
    EXPECT_THROW(parse("alphabet: a\ndef X(i) = attn max j [ j<=i | 1 ] 1 default 0\noutput: X last\n"),
                 ParseError);
    EXPECT_THROW(parse("alphabet: a\ndef X(i) = 2\noutput: X last\n"), ParseError);
    EXPECT_THROW(parse("alphabet: a\nbogus\n"), ParseError);
    EXPECT_THROW(parse("alphabet: a\ndef X(i) = 1 1\noutput: X last\n"), ParseError);
}

TEST(BraspParse, OperatorPrecedence) {
    Program p = parse(
        "alphabet: a b\n"
        "def X(i) = !Q['a'](i) & Q['b'](i) | Q['a'](i) -> Q['b'](i) -> 0 <-> 1 <-> 0\n"
        "output: X first\n");
    const std::size_t a = 0, b = 1;
    BoolExpr expected =
        iff(iff(implies(any({all({neg(ref(a, PosVar::i)), ref(b, PosVar::i)}), ref(a, PosVar::i)}),
                        implies(ref(b, PosVar::i), lit(false))),
                lit(true)),
            lit(false));
    EXPECT_EQ(std::get<BoolExpr>(p.definitions()[0].op), expected);
    EXPECT_EQ(p.output_position(), OutputPosition::first);
}

TEST(BraspParse, PrintParseRoundTrip) {
    const char* text =
        "alphabet: a b '#' 'q\\'x'\n"
        "// comment\n"
        "\n"
        "def X(i) = (Q['a'](i) | Q['b'](i)) & !(Q['#'](i) <-> Q['q\\'x'](i))\n"
        "def Y(i) = attn min j [ j>i | X(j) & (Q['a'](i) -> Q['b'](j)) ] X(j) <-> (X(i) <-> 1) default !X(i)\n"
        "def Z(i) = attn max j [ * | 1 ] (Y(i) & Y(j)) & X(j) default 0\n"
        "output: Z last\n";
    Program p = parse(text);
    EXPECT_EQ(p.alphabet()[3], "q'x");
    const std::string printed = to_text(p);
    Program again = parse(printed);
    EXPECT_EQ(again, p) << printed;
    EXPECT_EQ(to_text(again), printed);
}

TEST(BraspEval, InitialVectors) {
    Program p = parse("alphabet: a b\ndef Y(i) = Q['a'](i)\noutput: Y last\n");
    Trace t = eval(p, w("aba"));
    EXPECT_EQ(t[0], bits("101"));
    EXPECT_EQ(t[1], bits("010"));
    EXPECT_EQ(t.names[0], "Q['a']");
    EXPECT_EQ(t.length(), 3u);
}

TEST(BraspEval, Acceptance) {
    Program p = parse("alphabet: a b\ndef Y(i) = Q['a'](i)\noutput: Y last\n");
    EXPECT_TRUE(accepts(p, w("ba")));
    EXPECT_FALSE(accepts(p, w("ab")));
    EXPECT_THROW(accepts(p, Word{}), WordError);
    EXPECT_THROW(accepts(p, w("ac")), WordError);
}

TEST(BraspEval, DefaultFiresWithEmptyUnmaskedSet) {
    Program p = parse(
        "alphabet: a b\n"
        "def F(i) = attn max j [ j<i | 1 ] 0 default 1\n"
        "def P(i) = attn min j [ j>i | 1 ] 0 default 1\n"
        "output: F first\n");
    for (std::string s : {"a", "ab", "abba", "bbbbb"}) {
        Trace t = eval(p, w(s));
        const std::size_t n = s.size();
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_EQ(t[2][i], i == 0) << s;
            EXPECT_EQ(t[3][i], i == n - 1) << s;
        }
    }
}

TEST(BraspEval, ZeroScoreFallsBackEvenWithUnmaskedPositions) {
    Program p = parse("alphabet: a\ndef X(i) = attn max j [ * | 0 ] 1 default 0\noutput: X last\n");
    EXPECT_EQ(eval(p, w("aaaa"))[1], bits("0000"));
}

TEST(BraspEval, TieSemanticsProbe) {
    // Each position records whether the chosen j is the previous position (max) or position 1 (min),
    // using the marker "first position" = no predecessor.
    Program p = parse(
        "alphabet: a b\n"
        "def First(i) = attn max j [ j<i | 1 ] 0 default 1\n"
        "def Prev(i) = attn max j [ j<i | 1 ] Q['a'](j) default 0\n"
        "def Left(i) = attn min j [ j<i | 1 ] First(j) default 0\n"
        "output: Left last\n");
    std::mt19937 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::string s;
        for (int k = 0, n = 2 + trial % 7; k < n; ++k) s += "ab"[rng() % 2];
        Trace t = eval(p, w(s));
        for (std::size_t i = 1; i < s.size(); ++i) {
            EXPECT_EQ(t[3][i], s[i - 1] == 'a') << s << " @" << i;  // maxatt picks j = i-1
            EXPECT_TRUE(t[4][i]) << s << " @" << i;                 // minatt picks j = 1
        }
    }
}

TEST(BraspEval, AllDirectionMaskCombinationsMatchSetSemantics) {
    // Mark(j) = "the symbol before j is a" makes the chosen j observable.
    Program p = parse(
        "alphabet: a b\n"
        "def Mark(i) = attn max j [ j<i | 1 ] Q['a'](j) default 0\n"
        "def MinAll(i) = attn min j [ * | Q['b'](j) ] Mark(j) default 1\n"
        "def MaxAll(i) = attn max j [ * | Q['b'](j) ] Mark(j) default 1\n"
        "def MinFut(i) = attn min j [ j<i | Q['b'](j) ] Mark(j) default 1\n"
        "def MaxFut(i) = attn max j [ j<i | Q['b'](j) ] Mark(j) default 1\n"
        "def MinPast(i) = attn min j [ j>i | Q['b'](j) ] Mark(j) default 1\n"
        "def MaxPast(i) = attn max j [ j>i | Q['b'](j) ] Mark(j) default 1\n"
        "output: MinAll last\n");
    const Mask masks[] = {Mask::none, Mask::none, Mask::future, Mask::future, Mask::past, Mask::past};
    std::mt19937 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::string s;
        for (int k = 0, n = 1 + trial % 9; k < n; ++k) s += "ab"[rng() % 2];
        Trace t = eval(p, w(s));
        for (int v = 0; v < 6; ++v) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                std::vector<std::size_t> candidates;
                for (std::size_t j = 0; j < s.size(); ++j)
                    if (unmasked(masks[v], i, j) && s[j] == 'b') candidates.push_back(j);
                bool expected = true;
                if (!candidates.empty()) {
                    std::size_t j = v % 2 == 0 ? candidates.front() : candidates.back();
                    expected = j > 0 && s[j - 1] == 'a';
                }
                EXPECT_EQ(t[3 + v][i], expected) << s << " vector " << t.names[3 + v] << " @" << i;
            }
        }
    }
}

TEST(BraspEval, Deterministic) {
    Program p = parse(
        "alphabet: a b\n"
        "def X(i) = attn max j [ j<i | Q['a'](j) ] Q['b'](i) default 1\n"
        "output: X last\n");
    for (std::string s : {"a", "ab", "bab", "aabba"}) EXPECT_EQ(eval(p, w(s)), eval(p, w(s)));
}

TEST(BraspEval, InitialVectorsDependOnlyOnTheirSymbol) {
    Program p = parse("alphabet: a b c\ndef Y(i) = Q['a'](i)\noutput: Y last\n");
    std::mt19937 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        std::string s;
        for (int k = 0, n = 1 + trial % 8; k < n; ++k) s += "abc"[rng() % 3];
        Trace t = eval(p, w(s));
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t a = 0; a < 3; ++a) EXPECT_EQ(t[a][i], s[i] == "abc"[a]);
    }
}
