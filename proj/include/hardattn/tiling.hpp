#pragma once
// The 2^n-tiling problem: instances, a direct verifier, the row-major word encoding, the
// compiler to B-RASP, a brute-force search, and the H-chain counter language.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hardattn/brasp.hpp"
#include "hardattn/errors.hpp"
#include "hardattn/words.hpp"

namespace hardattn::tiling {

/// Instances with a larger width exponent are refused by operations that materialize 2^n blocks.
inline constexpr unsigned max_exponent = 16;

struct Tile {
    Symbol name;
    std::uint64_t left = 0, up = 0, right = 0, down = 0;
    friend bool operator==(const Tile&, const Tile&) = default;
};

inline bool reserved_symbol(std::string_view s) { return s == "0" || s == "1" || s == "#"; }

class Instance {
public:
    Instance(unsigned n, std::vector<Tile> tiles, std::string_view final_tile) : n_(n), tiles_(std::move(tiles)) {
        if (n_ == 0) throw ParseError("tiling: n must be positive");
        if (tiles_.empty()) throw ParseError("tiling: no tiles");
        std::set<Symbol> seen;
        for (const auto& t : tiles_) {
            if (t.name.empty() || reserved_symbol(t.name))
                throw ParseError("tiling: '" + t.name + "' cannot be used as a tile name");
            if (!seen.insert(t.name).second) throw ParseError("tiling: duplicate tile '" + t.name + "'");
        }
        final_ = index_of(final_tile);
    }

    [[nodiscard]] unsigned n() const { return n_; }
    [[nodiscard]] const std::vector<Tile>& tiles() const { return tiles_; }
    [[nodiscard]] const Tile& tile(std::size_t k) const { return tiles_.at(k); }
    [[nodiscard]] std::size_t final_tile() const { return final_; }

    /// 2^n. Throws if n exceeds max_exponent.
    [[nodiscard]] std::size_t width() const {
        if (n_ > max_exponent)
            throw DimensionError("tiling: n = " + std::to_string(n_) + " exceeds the limit " +
                                 std::to_string(max_exponent));
        return std::size_t{1} << n_;
    }

    [[nodiscard]] std::size_t index_of(std::string_view name) const {
        for (std::size_t k = 0; k < tiles_.size(); ++k)
            if (tiles_[k].name == name) return k;
        throw ScopeError("tiling: unknown tile '" + std::string(name) + "'");
    }

    /// 0, 1, #, then the tiles in declaration order.
    [[nodiscard]] Alphabet alphabet() const {
        std::vector<Symbol> s{"0", "1", "#"};
        for (const auto& t : tiles_) s.push_back(t.name);
        return Alphabet(std::move(s));
    }

    friend bool operator==(const Instance&, const Instance&) = default;

private:
    unsigned n_;
    std::vector<Tile> tiles_;
    std::size_t final_ = 0;
};

/// rows[j][i] is the tile index at column i+1 of row j+1; row 1 is the bottom row.
struct Grid {
    std::vector<std::vector<std::size_t>> rows;

    [[nodiscard]] std::size_t height() const { return rows.size(); }
    friend bool operator==(const Grid&, const Grid&) = default;
    friend auto operator<=>(const Grid&, const Grid&) = default;
};

namespace detail {

inline void check_dimensions(const Instance& inst, const Grid& g) {
    const std::size_t w = inst.width();
    if (g.rows.empty()) throw DimensionError("tiling: grid has no rows");
    for (std::size_t j = 0; j < g.rows.size(); ++j) {
        if (g.rows[j].size() != w)
            throw DimensionError("tiling: row " + std::to_string(j + 1) + " has " + std::to_string(g.rows[j].size()) +
                                 " cells, expected " + std::to_string(w));
        for (auto t : g.rows[j])
            if (t >= inst.tiles().size()) throw DimensionError("tiling: tile index " + std::to_string(t) + " out of range");
    }
}

inline std::string counter_bits(std::size_t value, unsigned n) {
    std::string s(n, '0');
    for (unsigned k = 0; k < n; ++k)
        if (value >> k & 1) s[n - 1 - k] = '1';
    return s;
}

}  // namespace detail

inline bool verify_tiling(const Instance& inst, const Grid& g) {
    detail::check_dimensions(inst, g);
    const std::size_t w = inst.width(), m = g.height();
    auto at = [&](std::size_t i, std::size_t j) -> const Tile& { return inst.tile(g.rows[j][i]); };
    if (g.rows[m - 1][w - 1] != inst.final_tile()) return false;
    for (std::size_t i = 0; i < w; ++i)
        if (at(i, 0).down != 0 || at(i, m - 1).up != 0) return false;
    for (std::size_t j = 0; j < m; ++j) {
        if (at(0, j).left != 0 || at(w - 1, j).right != 0) return false;
        for (std::size_t i = 0; i + 1 < w; ++i)
            if (at(i, j).right != at(i + 1, j).left) return false;
        if (j + 1 < m)
            for (std::size_t i = 0; i < w; ++i)
                if (at(i, j).up != at(i, j + 1).down) return false;
    }
    return true;
}

/// Row-major: every block of row 1 left to right, then row 2, and so on. A block is the
/// n-bit most-significant-first column counter, the tile, then #.
inline Word encode_grid(const Instance& inst, const Grid& g) {
    detail::check_dimensions(inst, g);
    Word w;
    w.reserve(g.height() * inst.width() * (inst.n() + 2));
    for (const auto& row : g.rows)
        for (std::size_t i = 0; i < row.size(); ++i) {
            for (char b : detail::counter_bits(i, inst.n())) w.emplace_back(1, b);
            w.push_back(inst.tile(row[i]).name);
            w.emplace_back("#");
        }
    return w;
}

/// Inverse of encode_grid; nullopt if the word is not an encoding of any grid.
inline std::optional<Grid> decode_word(const Instance& inst, const Word& w) {
    const std::size_t width = inst.width(), block = inst.n() + 2;
    if (w.empty() || w.size() % (block * width) != 0) return std::nullopt;
    Grid g;
    for (std::size_t b = 0; b * block < w.size(); ++b) {
        const std::size_t col = b % width;
        if (col == 0) g.rows.emplace_back();
        const std::string bits = detail::counter_bits(col, inst.n());
        for (unsigned k = 0; k < inst.n(); ++k)
            if (w[b * block + k] != std::string(1, bits[k])) return std::nullopt;
        const Symbol& t = w[b * block + inst.n()];
        if (reserved_symbol(t) || w[b * block + inst.n() + 1] != "#") return std::nullopt;
        std::optional<std::size_t> idx;
        for (std::size_t k = 0; k < inst.tiles().size(); ++k)
            if (inst.tile(k).name == t) idx = k;
        if (!idx) return std::nullopt;
        g.rows.back().push_back(*idx);
    }
    return g;
}

namespace detail {

using brasp::Attention;
using brasp::BoolExpr;
using brasp::PosVar;
using brasp::Program;
inline constexpr PosVar I = PosVar::i;
inline constexpr PosVar J = PosVar::j;

class ProgramBuilder {
public:
    explicit ProgramBuilder(Alphabet a) : p(std::move(a)) {}

    BoolExpr q(std::string_view symbol, PosVar x) const { return brasp::ref(p.symbol_vector(symbol), x); }
    BoolExpr v(std::string_view name, PosVar x) const { return brasp::ref(p.at(name), x); }

    /// Any of the given symbols.
    BoolExpr q_any(const std::vector<Symbol>& symbols, PosVar x) const {
        std::vector<BoolExpr> es;
        for (const auto& s : symbols) es.push_back(q(s, x));
        return brasp::any(std::move(es));
    }

    void define(const std::string& name, BoolExpr e) { p.define(name, std::move(e)); }

    /// maxatt_j [j<i, score] value : fallback
    void attend(const std::string& name, BoolExpr score, BoolExpr value, BoolExpr fallback) {
        p.define(name, Attention{brasp::Direction::max, Mask::future, std::move(score), std::move(value),
                                 std::move(fallback)});
    }

    std::vector<BoolExpr> counter(PosVar x, bool negated = false) const {
        std::vector<BoolExpr> out;
        for (unsigned k = 1; k <= n; ++k) {
            auto c = v("C_" + std::to_string(k), x);
            out.push_back(negated ? brasp::neg(std::move(c)) : std::move(c));
        }
        return out;
    }

    /// The current block's counter equals the one at j.
    BoolExpr same_counter() const {
        std::vector<BoolExpr> es;
        for (unsigned k = 1; k <= n; ++k)
            es.push_back(brasp::iff(v("C_" + std::to_string(k), I), v("C_" + std::to_string(k), J)));
        return brasp::all(std::move(es));
    }

    Program p;
    unsigned n = 0;
};

/// A_T .. A: the input is a word of ({0,1}^n L #)*, L being the letters.
inline void add_format_checks(ProgramBuilder& b, const std::vector<Symbol>& letters) {
    using namespace brasp;
    const unsigned n = b.n;
    b.attend("A_T", lit(true), b.q_any(letters, J), lit(false));
    b.attend("A_C_1", lit(true), any({b.q("0", J), b.q("1", J)}), lit(false));
    for (unsigned k = 2; k <= n; ++k)
        b.attend("A_C_" + std::to_string(k), lit(true), b.v("A_C_" + std::to_string(k - 1), J), lit(false));
    b.attend("A_hash_1", lit(true), b.q("#", J), lit(true));
    for (unsigned k = 2; k <= n + 1; ++k)
        b.attend("A_hash_" + std::to_string(k), lit(true), b.v("A_hash_" + std::to_string(k - 1), J), lit(true));
    std::vector<BoolExpr> bits;
    for (unsigned k = 1; k <= n; ++k) bits.push_back(b.v("A_C_" + std::to_string(k), I));
    b.define("A_enc", all({implies(b.q("#", I), b.v("A_T", I)),
                           implies(b.q_any(letters, I),
                                   all({all(std::move(bits)), b.v("A_hash_" + std::to_string(n + 1), I)}))}));
    b.attend("A", neg(b.v("A_enc", J)), lit(false), b.v("A_enc", I));
}

/// C_1 .. C_n: the k-th most recent bit before i, so C_1 is the least significant bit of the
/// block that ends at or after i.
inline void add_counter_bits(ProgramBuilder& b) {
    using namespace brasp;
    const auto bit = any({b.q("0", J), b.q("1", J)});
    b.attend("C_1", bit, b.q("1", J), lit(false));
    for (unsigned k = 2; k <= b.n; ++k)
        b.attend("C_" + std::to_string(k), bit, b.v("C_" + std::to_string(k - 1), J), lit(false));
}

/// C_plus1: the counter at i is the counter at the previous # plus one.
inline void add_increment(ProgramBuilder& b, bool fallback) {
    using namespace brasp;
    const unsigned n = b.n;
    auto c = [&](unsigned k, PosVar x) { return b.v("C_" + std::to_string(k), x); };
    std::vector<BoolExpr> cases;
    for (unsigned k = 1; k <= n; ++k) {
        std::vector<BoolExpr> conj;
        for (unsigned r = 1; r < k; ++r) conj.push_back(all({neg(c(r, I)), c(r, J)}));
        conj.push_back(c(k, I));
        conj.push_back(neg(c(k, J)));
        for (unsigned r = k + 1; r <= n; ++r) conj.push_back(iff(c(r, I), c(r, J)));
        cases.push_back(all(std::move(conj)));
    }
    b.attend("C_plus1", b.q("#", J), any(std::move(cases)), lit(fallback));
}

inline std::string tile_vector_name(const Instance& inst, std::size_t k) {
    bool plain = true;
    for (const auto& t : inst.tiles())
        for (unsigned char ch : t.name) plain = plain && (std::isalnum(ch) || ch == '_');
    return "B_" + (plain ? inst.tile(k).name : std::to_string(k));
}

}  // namespace detail

/// B-RASP program accepting exactly the encodings of valid tilings of `inst`.
///
/// The combining vector C uses C_1to0 | C_plus1 where a conjunction of the two could never hold.
inline brasp::Program compile_tiling_to_brasp(const Instance& inst) {
    using namespace brasp;
    using detail::I;
    using detail::J;
    detail::ProgramBuilder b(inst.alphabet());
    b.n = inst.n();
    const unsigned n = b.n;
    std::vector<Symbol> names;
    for (const auto& t : inst.tiles()) names.push_back(t.name);

    detail::add_format_checks(b, names);
    detail::add_counter_bits(b);
    detail::add_increment(b, false);
    {
        std::vector<BoolExpr> wrap;
        for (unsigned k = 1; k <= n; ++k)
            wrap.push_back(all({neg(b.v("C_" + std::to_string(k), I)), b.v("C_" + std::to_string(k), J)}));
        b.attend("C_1to0", b.q("#", J), all(std::move(wrap)), all(b.counter(I, true)));
    }
    b.attend("C", all({b.q("#", J), neg(any({b.v("C_1to0", J), b.v("C_plus1", J)}))}), lit(false),
             any({b.v("C_1to0", I), b.v("C_plus1", I)}));

    const std::size_t tiles = inst.tiles().size();
    auto B = [&](std::size_t k, PosVar x) { return b.v(detail::tile_vector_name(inst, k), x); };
    for (std::size_t k = 0; k < tiles; ++k)
        b.attend(detail::tile_vector_name(inst, k), b.q_any(names, J), b.q(names[k], J), lit(false));
    {
        std::vector<BoolExpr> f{b.q("#", I), B(inst.final_tile(), I)};
        for (auto& c : b.counter(I)) f.push_back(std::move(c));
        b.define("F", all(std::move(f)));
    }

    auto tiles_where = [&](auto pred, PosVar x) {
        std::vector<BoolExpr> es;
        for (std::size_t k = 0; k < tiles; ++k)
            if (pred(inst.tile(k))) es.push_back(B(k, x));
        return any(std::move(es));
    };
    b.attend("E_bot", all({b.q("#", J), b.same_counter()}), lit(true),
             tiles_where([](const Tile& t) { return t.down == 0; }, I));
    b.attend("E_top",
             all({b.q("#", J), any({tiles_where([](const Tile& t) { return t.up != 0; }, J), all(b.counter(J, true))})}),
             all({tiles_where([](const Tile& t) { return t.up == 0; }, J),
                  tiles_where([](const Tile& t) { return t.up == 0; }, I)}),
             lit(false));
    b.define("E_left", implies(all(b.counter(I, true)), tiles_where([](const Tile& t) { return t.left == 0; }, I)));
    b.define("E_right", implies(all(b.counter(I)), tiles_where([](const Tile& t) { return t.right == 0; }, I)));
    b.attend("E",
             all({b.q("#", J), neg(all({b.v("E_bot", J), b.v("E_left", J), b.v("E_right", J)}))}), lit(false),
             all({b.v("E_bot", I), b.v("E_top", I), b.v("E_left", I), b.v("E_right", I)}));

    std::vector<BoolExpr> below, beside;
    for (std::size_t s = 0; s < tiles; ++s)
        for (std::size_t t = 0; t < tiles; ++t) {
            if (inst.tile(s).down == inst.tile(t).up) below.push_back(all({B(s, I), B(t, J)}));
            if (inst.tile(s).left == inst.tile(t).right) beside.push_back(all({B(s, I), B(t, J)}));
        }
    b.attend("M_down", all({b.q("#", J), b.same_counter()}), any(std::move(below)), lit(true));
    b.attend("M_left", b.q("#", J), implies(any(b.counter(I)), any(std::move(beside))), lit(true));
    b.attend("M", all({b.q("#", J), neg(all({b.v("M_down", J), b.v("M_left", J)}))}), lit(false),
             all({b.v("M_down", I), b.v("M_left", I)}));

    b.define("Y", all({b.v("A", I), b.v("C", I), b.v("F", I), b.v("E", I), b.v("M", I)}));
    b.p.set_output("Y", OutputPosition::last);
    return std::move(b.p);
}

/// Smallest-height valid grid with at most max_rows rows; among those, the first in row-major
/// tile order.
inline std::optional<Grid> search_tiling(const Instance& inst, std::size_t max_rows) {
    const std::size_t w = inst.width(), nt = inst.tiles().size();
    using Row = std::vector<std::size_t>;
    std::vector<Row> rows;
    {
        Row r;
        auto extend = [&](auto&& self) -> void {
            if (r.size() == w) {
                if (inst.tile(r.back()).right == 0) rows.push_back(r);
                return;
            }
            for (std::size_t t = 0; t < nt; ++t) {
                const bool fits = r.empty() ? inst.tile(t).left == 0 : inst.tile(r.back()).right == inst.tile(t).left;
                if (!fits) continue;
                r.push_back(t);
                self(self);
                r.pop_back();
            }
        };
        extend(extend);
    }
    auto stacks = [&](const Row& lower, const Row& upper) {
        for (std::size_t i = 0; i < w; ++i)
            if (inst.tile(lower[i]).up != inst.tile(upper[i]).down) return false;
        return true;
    };
    auto is_top = [&](const Row& r) {
        if (r.back() != inst.final_tile()) return false;
        for (auto t : r)
            if (inst.tile(t).up != 0) return false;
        return true;
    };
    std::vector<std::vector<std::size_t>> above(rows.size());
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t c = 0; c < rows.size(); ++c)
            if (stacks(rows[a], rows[c])) above[a].push_back(c);

    // failed[r] holds the numbers of further rows known not to complete a grid from row r.
    std::vector<std::set<std::size_t>> failed(rows.size());
    std::vector<std::size_t> path;
    auto complete = [&](auto&& self, std::size_t r, std::size_t more) -> bool {
        path.push_back(r);
        if (more == 0 ? is_top(rows[r]) : false) return true;
        if (more > 0 && !failed[r].count(more))
            for (auto c : above[r])
                if (self(self, c, more - 1)) return true;
        if (more > 0) failed[r].insert(more);
        path.pop_back();
        return false;
    };
    for (std::size_t m = 1; m <= max_rows; ++m)
        for (std::size_t r = 0; r < rows.size(); ++r) {
            bool bottom = true;
            for (auto t : rows[r]) bottom = bottom && inst.tile(t).down == 0;
            if (!bottom) continue;
            path.clear();
            if (complete(complete, r, m - 1)) {
                Grid g;
                for (auto k : path) g.rows.push_back(rows[k]);
                return g;
            }
        }
    return std::nullopt;
}

// ---- H-chains ---------------------------------------------------------------------------

struct HChainSpec {
    unsigned n = 1;
    std::vector<Symbol> symbols;
    std::vector<std::pair<Symbol, Symbol>> pairs;

    void validate() const {
        if (n == 0 || n > max_exponent) throw DimensionError("h-chain: n must be in 1.." + std::to_string(max_exponent));
        if (symbols.empty()) throw ParseError("h-chain: no symbols");
        std::set<Symbol> seen;
        for (const auto& s : symbols) {
            if (s.empty() || reserved_symbol(s)) throw ParseError("h-chain: '" + s + "' cannot be a letter");
            if (!seen.insert(s).second) throw ParseError("h-chain: duplicate letter '" + s + "'");
        }
        for (const auto& [h, g] : pairs)
            if (!seen.count(h) || !seen.count(g)) throw ScopeError("h-chain: pair (" + h + "," + g + ") uses an unknown letter");
    }

    [[nodiscard]] bool allowed(const Symbol& a, const Symbol& b) const {
        for (const auto& [h, g] : pairs)
            if (h == a && g == b) return true;
        return false;
    }

    [[nodiscard]] Alphabet alphabet() const {
        std::vector<Symbol> s{"0", "1", "#"};
        s.insert(s.end(), symbols.begin(), symbols.end());
        return Alphabet(std::move(s));
    }
};

/// {a,b,c} with H = {(a,b),(b,c),(b,a),(c,b)}.
inline HChainSpec standard_h_chain(unsigned n) {
    return {n, {"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"b", "a"}, {"c", "b"}}};
}

/// Direct check of <0>a_1#<1>a_2#...<2^n-1>a_{2^n}# with consecutive letters in H.
inline bool is_h_chain_word(const HChainSpec& spec, const Word& w) {
    const std::size_t blocks = std::size_t{1} << spec.n, len = spec.n + 2;
    if (w.size() != blocks * len) return false;
    const Symbol* prev = nullptr;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::string bits = detail::counter_bits(b, spec.n);
        for (unsigned k = 0; k < spec.n; ++k)
            if (w[b * len + k] != std::string(1, bits[k])) return false;
        const Symbol& a = w[b * len + spec.n];
        if (std::find(spec.symbols.begin(), spec.symbols.end(), a) == spec.symbols.end()) return false;
        if (w[b * len + spec.n + 1] != "#") return false;
        if (prev && !spec.allowed(*prev, a)) return false;
        prev = &a;
    }
    return true;
}

struct HChain {
    HChainSpec spec;
    brasp::Program program;

    /// The chain word carrying the given letters, one per block. Letters are not checked against H.
    [[nodiscard]] Word word(const std::vector<Symbol>& letters) const {
        const std::size_t blocks = std::size_t{1} << spec.n;
        if (letters.size() != blocks)
            throw DimensionError("h-chain: expected " + std::to_string(blocks) + " letters, got " +
                                 std::to_string(letters.size()));
        Word w;
        for (std::size_t b = 0; b < blocks; ++b) {
            for (char c : detail::counter_bits(b, spec.n)) w.emplace_back(1, c);
            w.push_back(letters[b]);
            w.emplace_back("#");
        }
        return w;
    }

    /// Valid words in letter-sequence order, at most `limit` of them.
    [[nodiscard]] std::vector<Word> words(std::size_t limit) const {
        const std::size_t blocks = std::size_t{1} << spec.n;
        std::vector<Word> out;
        std::vector<Symbol> letters;
        auto extend = [&](auto&& self) -> void {
            if (out.size() >= limit) return;
            if (letters.size() == blocks) {
                out.push_back(word(letters));
                return;
            }
            for (const auto& s : spec.symbols) {
                if (!letters.empty() && !spec.allowed(letters.back(), s)) continue;
                letters.push_back(s);
                self(self);
                letters.pop_back();
            }
        };
        extend(extend);
        return out;
    }
};

/// Program for the H-chain language: format checks, the counter increment (vacuously true at
/// the first block), the first counter pinned to zero, the last to all ones, and the H test
/// between consecutive letters.
inline HChain make_h_chain(const HChainSpec& spec) {
    using namespace brasp;
    using detail::I;
    using detail::J;
    spec.validate();
    detail::ProgramBuilder b(spec.alphabet());
    b.n = spec.n;
    detail::add_format_checks(b, spec.symbols);
    detail::add_counter_bits(b);
    detail::add_increment(b, true);
    b.attend("C_first", b.q("#", J), lit(true), all(b.counter(I, true)));
    std::vector<BoolExpr> h;
    for (const auto& [x, y] : spec.pairs) h.push_back(all({b.q(x, J), b.q(y, I)}));
    b.attend("M_left", b.q_any(spec.symbols, J), any(std::move(h)), lit(true));
    b.define("Ok", all({implies(b.q("#", I), all({b.v("C_plus1", I), b.v("C_first", I)})),
                        implies(b.q_any(spec.symbols, I), b.v("M_left", I))}));
    b.attend("Chain", neg(b.v("Ok", J)), lit(false), b.v("Ok", I));
    {
        std::vector<BoolExpr> last{b.q("#", I)};
        for (auto& c : b.counter(I)) last.push_back(std::move(c));
        b.define("Last", all(std::move(last)));
    }
    b.define("Y", all({b.v("A", I), b.v("Chain", I), b.v("Last", I)}));
    b.p.set_output("Y", OutputPosition::last);
    return {spec, std::move(b.p)};
}

// ---- files ------------------------------------------------------------------------------

/// {"n": 1, "tiles": [{"name": "t", "edges": [left, up, right, down]}, ...], "final": "t"}
inline std::string to_text(const Instance& inst) {
    nlohmann::ordered_json j;
    j["n"] = inst.n();
    j["tiles"] = nlohmann::ordered_json::array();
    for (const auto& t : inst.tiles())
        j["tiles"].push_back({{"name", t.name}, {"edges", {t.left, t.up, t.right, t.down}}});
    j["final"] = inst.tile(inst.final_tile()).name;
    return j.dump(2) + "\n";
}

inline Instance parse_instance(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("tiling instance: ") + e.what());
    }
    try {
        std::vector<Tile> tiles;
        for (const auto& t : j.at("tiles")) {
            const auto& e = t.at("edges");
            if (!e.is_array() || e.size() != 4) throw ParseError("tiling instance: edges must be [left, up, right, down]");
            tiles.push_back({t.at("name").get<std::string>(), e[0].get<std::uint64_t>(), e[1].get<std::uint64_t>(),
                             e[2].get<std::uint64_t>(), e[3].get<std::uint64_t>()});
        }
        return Instance(j.at("n").get<unsigned>(), std::move(tiles), j.at("final").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("tiling instance: ") + e.what());
    }
}

/// One line per row, bottom row first, tile names separated by spaces.
inline std::string to_text(const Instance& inst, const Grid& g) {
    std::string out;
    for (const auto& row : g.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? " " : "") + inst.tile(row[i]).name;
        out += '\n';
    }
    return out;
}

inline Grid parse_grid(std::string_view text, const Instance& inst) {
    Grid g;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream cells(line);
        std::vector<std::size_t> row;
        for (std::string name; cells >> name;) {
            try {
                row.push_back(inst.index_of(name));
            } catch (const ScopeError& e) {
                throw ScopeError("line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        if (!row.empty()) g.rows.push_back(std::move(row));
    }
    detail::check_dimensions(inst, g);
    return g;
}

}  // namespace hardattn::tiling
