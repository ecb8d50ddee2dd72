#pragma once

// Masked unique hard-attention transformers over exact rationals.
//
// A model is a token embedding followed by attention and ReLU layers. An
// attention layer with maps A, B (width r -> r) and C (2r -> s) scores
// position j from position i as <A(v_i), B(v_j)>, picks the leftmost or
// rightmost unmasked maximizer, and emits C(v_i, v_j) (or C(v_i, 0) when no
// position is unmasked). A word is accepted when <t, v_k> > 0 at the output
// position k.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hardattn/errors.hpp"
#include "hardattn/mask.hpp"
#include "hardattn/numeric.hpp"
#include "hardattn/words.hpp"

namespace hardattn::uhat {

enum class TieBreak { leftmost, rightmost };

inline std::string_view to_string(TieBreak t) { return t == TieBreak::leftmost ? "leftmost" : "rightmost"; }

inline TieBreak parse_tie_break(std::string_view s) {
    if (s == "leftmost") return TieBreak::leftmost;
    if (s == "rightmost") return TieBreak::rightmost;
    throw ParseError("tie must be leftmost or rightmost, got '" + std::string(s) + "'");
}

struct TokenEmbedding {
    Alphabet alphabet;
    std::vector<RationalVector> vectors;  // indexed like the alphabet

    [[nodiscard]] std::size_t width() const { return vectors.empty() ? 0 : vectors.front().width(); }
    [[nodiscard]] const RationalVector& operator()(std::size_t symbol) const { return vectors[symbol]; }
    friend bool operator==(const TokenEmbedding&, const TokenEmbedding&) = default;
};

struct AttentionLayer {
    AffineMap query;    // A
    AffineMap key;      // B
    AffineMap combine;  // C, over the concatenation (v_i, a_i)
    Mask mask = Mask::none;
    TieBreak tie = TieBreak::leftmost;

    [[nodiscard]] std::size_t in_width() const { return query.in_width(); }
    [[nodiscard]] std::size_t out_width() const { return combine.out_width(); }
    friend bool operator==(const AttentionLayer&, const AttentionLayer&) = default;
};

struct ReluLayer {
    std::size_t coord = 0;  // 0-based
    friend bool operator==(const ReluLayer&, const ReluLayer&) = default;
};

using Layer = std::variant<AttentionLayer, ReluLayer>;

struct Model {
    TokenEmbedding embedding;
    std::vector<Layer> layers;
    RationalVector accept;
    OutputPosition output_position = OutputPosition::last;

    friend bool operator==(const Model&, const Model&) = default;

    /// Width after each layer; entry 0 is the embedding width.
    [[nodiscard]] std::vector<std::size_t> widths() const {
        std::vector<std::size_t> out{embedding.width()};
        for (const auto& l : layers)
            out.push_back(std::holds_alternative<AttentionLayer>(l) ? std::get<AttentionLayer>(l).out_width()
                                                                     : out.back());
        return out;
    }

    /// Throws DimensionError unless every width chains from the embedding to the acceptance vector.
    void validate() const {
        const auto& emb = embedding;
        if (emb.vectors.size() != emb.alphabet.size())
            throw DimensionError("embedding must map every alphabet symbol");
        if (emb.alphabet.size() == 0) throw DimensionError("alphabet is empty");
        std::size_t r = emb.width();
        if (r == 0) throw DimensionError("embedding width must be positive");
        for (const auto& v : emb.vectors)
            if (v.width() != r) throw DimensionError("embedding vectors differ in width");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const std::string where = "layer " + std::to_string(k + 1) + ": ";
            if (const auto* a = std::get_if<AttentionLayer>(&layers[k])) {
                if (a->query.in_width() != r || a->query.out_width() != r || a->key.in_width() != r ||
                    a->key.out_width() != r)
                    throw DimensionError(where + "A and B must map width " + std::to_string(r) + " to itself");
                if (a->combine.in_width() != 2 * r)
                    throw DimensionError(where + "C must take width " + std::to_string(2 * r));
                if (a->combine.out_width() == 0) throw DimensionError(where + "C has no outputs");
                r = a->combine.out_width();
            } else if (std::get<ReluLayer>(layers[k]).coord >= r) {
                throw DimensionError(where + "ReLU coordinate out of range");
            }
        }
        if (accept.width() != r)
            throw DimensionError("acceptance vector has width " + std::to_string(accept.width()) + ", expected " +
                                 std::to_string(r));
    }
};

/// Output of one attention layer over a sequence.
struct AttentionResult {
    std::vector<RationalVector> outputs;
    std::vector<std::optional<std::size_t>> chosen;  // 0-based attended position, none if U_i is empty
    std::size_t score_bits = 0;                      // largest bit length among computed scores
};

inline AttentionResult apply_attention(const AttentionLayer& layer, std::span<const RationalVector> seq) {
    const std::size_t n = seq.size();
    std::vector<RationalVector> keys;
    keys.reserve(n);
    for (const auto& v : seq) keys.push_back(affine_apply(layer.key, v));

    AttentionResult res;
    res.outputs.reserve(n);
    res.chosen.reserve(n);
    const RationalVector zero(seq.empty() ? 0 : seq.front().width());
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < n; ++i) {
        const RationalVector q = affine_apply(layer.query, seq[i]);
        support.clear();
        for (std::size_t k = 0; k < q.width(); ++k)
            if (!q[k].is_zero()) support.push_back(k);
        std::optional<std::size_t> best;
        Rational best_score;
        for (std::size_t j = 0; j < n; ++j) {
            if (!unmasked(layer.mask, i, j)) continue;
            Rational s;
            for (auto k : support) s += q[k] * keys[j][k];
            res.score_bits = std::max(res.score_bits, s.bit_length());
            if (!best || s > best_score || (layer.tie == TieBreak::rightmost && s == best_score)) {
                best = j;
                best_score = std::move(s);
            }
        }
        res.outputs.push_back(affine_apply(layer.combine, seq[i], best ? seq[*best] : zero));
        res.chosen.push_back(best);
    }
    return res;
}

inline RationalVector apply_relu(const ReluLayer& layer, RationalVector v) {
    v[layer.coord] = relu(v[layer.coord]);
    return v;
}

struct Trace {
    /// sequences[0] is the embedded word; sequences[l] is the output of layer l.
    std::vector<std::vector<RationalVector>> sequences;
    /// Per layer (same indexing); empty for the embedding and ReLU layers.
    std::vector<std::vector<std::optional<std::size_t>>> chosen;
    std::vector<std::size_t> score_bits;

    [[nodiscard]] const std::vector<RationalVector>& final() const { return sequences.back(); }
};

inline Trace simulate(const Model& m, const Word& w) {
    const auto symbols = m.embedding.alphabet.encode(w);
    Trace t;
    std::vector<RationalVector> seq;
    seq.reserve(symbols.size());
    for (auto a : symbols) seq.push_back(m.embedding(a));
    t.sequences.push_back(seq);
    t.chosen.emplace_back();
    t.score_bits.push_back(0);
    for (const auto& layer : m.layers) {
        if (const auto* a = std::get_if<AttentionLayer>(&layer)) {
            AttentionResult r = apply_attention(*a, seq);
            seq = std::move(r.outputs);
            t.chosen.push_back(std::move(r.chosen));
            t.score_bits.push_back(r.score_bits);
        } else {
            for (auto& v : seq) v = apply_relu(std::get<ReluLayer>(layer), std::move(v));
            t.chosen.emplace_back();
            t.score_bits.push_back(0);
        }
        t.sequences.push_back(seq);
    }
    return t;
}

inline bool accepts(const Model& m, const Trace& t) {
    const auto& last = t.final();
    const auto& v = m.output_position == OutputPosition::first ? last.front() : last.back();
    return dot(m.accept, v).sign() > 0;
}

/// Last-layer outputs only; same result as simulate(m, w).final() without keeping the trace.
inline std::vector<RationalVector> run(const Model& m, const Word& w) {
    const auto symbols = m.embedding.alphabet.encode(w);
    std::vector<RationalVector> seq;
    seq.reserve(symbols.size());
    for (auto a : symbols) seq.push_back(m.embedding(a));
    for (const auto& layer : m.layers) {
        if (const auto* a = std::get_if<AttentionLayer>(&layer)) {
            seq = apply_attention(*a, seq).outputs;
        } else {
            for (auto& v : seq) v = apply_relu(std::get<ReluLayer>(layer), std::move(v));
        }
    }
    return seq;
}

inline bool accepts(const Model& m, const Word& w) {
    const auto out = run(m, w);
    return dot(m.accept, m.output_position == OutputPosition::first ? out.front() : out.back()).sign() > 0;
}

/// Largest bit length over every scalar in every layer output and every computed score.
inline std::size_t value_bound_report(const Trace& t) {
    std::size_t bits = 1;
    for (const auto& seq : t.sequences)
        for (const auto& v : seq) bits = std::max(bits, bit_length(v));
    for (auto b : t.score_bits) bits = std::max(bits, b);
    return bits;
}

/// Layer-wise over-approximation of the vectors a layer can output on any word.
/// Entry 0 is the embedding range. Each set is sorted and duplicate-free.
inline std::vector<std::vector<RationalVector>> reachable_value_sets(const Model& m, std::size_t cap) {
    if (cap == 0) throw BlowUpError("reachable-set cap must be positive", 0);
    auto check = [cap](const std::set<RationalVector>& s, std::size_t layer) {
        if (s.size() > cap)
            throw BlowUpError("reachable value set of layer " + std::to_string(layer) + " exceeds cap " +
                                  std::to_string(cap),
                              layer);
    };
    std::set<RationalVector> current(m.embedding.vectors.begin(), m.embedding.vectors.end());
    check(current, 0);
    std::vector<std::vector<RationalVector>> out{{current.begin(), current.end()}};
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        std::set<RationalVector> next;
        if (const auto* a = std::get_if<AttentionLayer>(&m.layers[l])) {
            const RationalVector zero(a->in_width());
            for (const auto& u : out.back()) {
                next.insert(affine_apply(a->combine, u, zero));
                for (const auto& v : out.back()) {
                    next.insert(affine_apply(a->combine, u, v));
                    check(next, l + 1);
                }
            }
            check(next, l + 1);
        } else {
            for (const auto& u : out.back()) next.insert(apply_relu(std::get<ReluLayer>(m.layers[l]), u));
        }
        out.emplace_back(next.begin(), next.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model file (JSON)

namespace detail {

using nlohmann::ordered_json;

inline ordered_json vector_to_json(const RationalVector& v) {
    ordered_json arr = ordered_json::array();
    for (const auto& x : v) arr.push_back(x.str());
    return arr;
}

inline RationalVector vector_from_json(const ordered_json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + ": expected a list of rationals");
    std::vector<Rational> xs;
    for (const auto& x : j) {
        if (!x.is_string()) throw ParseError(what + ": rationals are written as strings \"p/q\"");
        xs.push_back(Rational::parse(x.get<std::string>()));
    }
    return RationalVector(std::move(xs));
}

// Small matrices are written densely; larger ones as {shape, entries} with only nonzero coefficients.
inline ordered_json map_to_json(const AffineMap& m) {
    ordered_json out;
    if (m.out_width() * m.in_width() <= 256) {
        ordered_json rows = ordered_json::array();
        for (const auto& row : m.dense()) {
            ordered_json r = ordered_json::array();
            for (const auto& x : row) r.push_back(x.str());
            rows.push_back(std::move(r));
        }
        out["matrix"] = std::move(rows);
    } else {
        ordered_json entries = ordered_json::array();
        for (std::size_t r = 0; r < m.out_width(); ++r)
            for (const auto& e : m.row(r)) entries.push_back(ordered_json::array({r, e.col, e.coeff.str()}));
        out["matrix"] = {{"shape", {m.out_width(), m.in_width()}}, {"entries", std::move(entries)}};
    }
    out["bias"] = vector_to_json(m.bias());
    return out;
}

inline AffineMap map_from_json(const ordered_json& j, std::size_t in, const std::string& what) {
    if (!j.is_object() || !j.contains("matrix") || !j.contains("bias"))
        throw ParseError(what + ": expected {matrix, bias}");
    RationalVector bias = vector_from_json(j["bias"], what + ".bias");
    const auto& mat = j["matrix"];
    if (mat.is_array()) {
        std::vector<std::vector<Rational>> rows;
        for (const auto& row : mat) rows.push_back(vector_from_json(row, what + ".matrix").entries());
        return AffineMap(rows, std::move(bias), in);
    }
    if (!mat.is_object() || !mat.contains("shape") || !mat.contains("entries"))
        throw ParseError(what + ".matrix: expected a list of rows or {shape, entries}");
    const auto rows = mat["shape"].at(0).get<std::size_t>(), cols = mat["shape"].at(1).get<std::size_t>();
    if (cols != in) throw DimensionError(what + ": matrix has " + std::to_string(cols) + " columns, expected " +
                                         std::to_string(in));
    if (bias.width() != rows) throw DimensionError(what + ": bias width differs from row count");
    AffineMap m(cols, rows);
    for (const auto& e : mat["entries"]) {
        const auto r = e.at(0).get<std::size_t>(), c = e.at(1).get<std::size_t>();
        if (r >= rows || c >= cols) throw DimensionError(what + ": entry out of range");
        m.set(r, c, Rational::parse(e.at(2).get<std::string>()));
    }
    for (std::size_t r = 0; r < rows; ++r) m.set_bias(r, bias[r]);
    return m;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const Model& m) {
    using detail::ordered_json;
    ordered_json j;
    j["alphabet"] = m.embedding.alphabet.symbols();
    ordered_json emb = ordered_json::object();
    for (std::size_t a = 0; a < m.embedding.alphabet.size(); ++a)
        emb[m.embedding.alphabet[a]] = detail::vector_to_json(m.embedding.vectors[a]);
    j["embedding"] = std::move(emb);
    ordered_json layers = ordered_json::array();
    for (const auto& l : m.layers) {
        ordered_json lj;
        if (const auto* a = std::get_if<AttentionLayer>(&l)) {
            lj["kind"] = "attn";
            lj["A"] = detail::map_to_json(a->query);
            lj["B"] = detail::map_to_json(a->key);
            lj["C"] = detail::map_to_json(a->combine);
            lj["mask"] = std::string(to_string(a->mask));
            lj["tie"] = std::string(to_string(a->tie));
        } else {
            lj["kind"] = "relu";
            lj["coord"] = std::get<ReluLayer>(l).coord + 1;
        }
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    j["accept"] = detail::vector_to_json(m.accept);
    j["output_position"] = std::string(to_string(m.output_position));
    return j;
}

/// Parses and validates a model document.
inline Model from_json(const nlohmann::ordered_json& j) {
    try {
        Model m;
        m.embedding.alphabet = Alphabet(j.at("alphabet").get<std::vector<std::string>>());
        const auto& emb = j.at("embedding");
        for (const auto& a : m.embedding.alphabet.symbols()) {
            if (!emb.contains(a)) throw ParseError("embedding has no vector for symbol '" + a + "'");
            m.embedding.vectors.push_back(detail::vector_from_json(emb[a], "embedding['" + a + "']"));
        }
        if (emb.size() != m.embedding.alphabet.size()) throw ParseError("embedding mentions symbols outside the alphabet");
        std::size_t r = m.embedding.width();
        std::size_t k = 0;
        for (const auto& lj : j.at("layers")) {
            ++k;
            const std::string where = "layers[" + std::to_string(k) + "]";
            const auto kind = lj.at("kind").get<std::string>();
            if (kind == "attn") {
                AttentionLayer a;
                a.query = detail::map_from_json(lj.at("A"), r, where + ".A");
                a.key = detail::map_from_json(lj.at("B"), r, where + ".B");
                a.combine = detail::map_from_json(lj.at("C"), 2 * r, where + ".C");
                a.mask = parse_mask(lj.at("mask").get<std::string>());
                a.tie = parse_tie_break(lj.at("tie").get<std::string>());
                r = a.combine.out_width();
                m.layers.emplace_back(std::move(a));
            } else if (kind == "relu") {
                const auto coord = lj.at("coord").get<std::size_t>();
                if (coord == 0) throw ParseError(where + ": ReLU coordinates are 1-based");
                m.layers.emplace_back(ReluLayer{coord - 1});
            } else {
                throw ParseError(where + ": unknown layer kind '" + kind + "'");
            }
        }
        m.accept = detail::vector_from_json(j.at("accept"), "accept");
        m.output_position = parse_output_position(j.at("output_position").get<std::string>());
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model document: ") + e.what());
    }
}

inline std::string to_text(const Model& m) { return to_json(m).dump(2) + "\n"; }

inline Model parse(std::string_view text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model document: ") + e.what());
    }
    return from_json(j);
}

}  // namespace hardattn::uhat
