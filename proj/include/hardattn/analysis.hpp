#pragma once
// Bounded emptiness, minimum witnesses, bounded equivalence and mutation testing over any of
// the three acceptor kinds.

#include <chrono>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "hardattn/brasp.hpp"
#include "hardattn/errors.hpp"
#include "hardattn/ltl.hpp"
#include "hardattn/uhat.hpp"
#include "hardattn/words.hpp"

namespace hardattn::analysis {

/// A B-RASP program, a UHAT or an LTL model behind one accepts() call.
class Acceptor {
public:
    using Model = std::variant<brasp::Program, uhat::Model, ltl::Model>;

    Acceptor(brasp::Program p) : model_(std::move(p)) {}
    Acceptor(uhat::Model m) : model_(std::move(m)) { std::get<uhat::Model>(model_).validate(); }
    Acceptor(ltl::Model m) : plan_(std::make_shared<const ltl::Plan>(m.formula)), model_(std::move(m)) {}

    [[nodiscard]] const Alphabet& alphabet() const {
        return std::visit(
            [](const auto& m) -> const Alphabet& {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, brasp::Program>) return m.alphabet();
                else if constexpr (std::is_same_v<T, uhat::Model>) return m.embedding.alphabet;
                else return m.alphabet;
            },
            model_);
    }

    [[nodiscard]] bool accepts(const Word& w) const {
        return std::visit(
            [&](const auto& m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, brasp::Program>) return brasp::accepts(m, w);
                else if constexpr (std::is_same_v<T, uhat::Model>) return uhat::accepts(m, w);
                else {
                    const auto t = plan_->table(m.alphabet.encode(w));
                    return m.output_position == OutputPosition::first ? t.front() : t.back();
                }
            },
            model_);
    }

    [[nodiscard]] std::string_view kind() const {
        static constexpr std::string_view names[] = {"brasp", "uhat", "ltl"};
        return names[model_.index()];
    }

    [[nodiscard]] const Model& model() const { return model_; }

private:
    // LTL formulas are flattened once; the DAGs produced by translation can be large.
    std::shared_ptr<const ltl::Plan> plan_;
    Model model_;
};

struct SearchReport {
    std::optional<Word> witness;
    std::size_t max_len = 0;
    std::uint64_t examined = 0;
    double seconds = 0;

    /// Stable key=value lines. Wall time is left out so the text is reproducible.
    [[nodiscard]] std::string str() const {
        std::ostringstream os;
        os << "outcome=" << (witness ? "witness" : "exhausted") << "\n";
        if (witness) os << "witness=" << format_word(*witness) << "\nlength=" << witness->size() << "\n";
        os << "max_len=" << max_len << "\nexamined=" << examined << "\n";
        return os.str();
    }
};

namespace detail {

/// First word of length len, in lexicographic order, whose first symbol is `first` and on
/// which pred holds. Also returns how many words were examined.
template <class Pred>
std::pair<std::optional<Word>, std::uint64_t> scan_block(const Alphabet& sigma, std::size_t len, std::size_t first,
                                                          const Pred& pred) {
    std::vector<std::size_t> digits(len, 0);
    digits[0] = first;
    Word w(len, sigma[0]);
    w[0] = sigma[first];
    std::uint64_t examined = 0;
    while (true) {
        ++examined;
        if (pred(w)) return {w, examined};
        std::size_t k = len;
        while (k > 1 && ++digits[k - 1] == sigma.size()) {
            digits[k - 1] = 0;
            w[k - 1] = sigma[0];
            --k;
        }
        if (k == 1) return {std::nullopt, examined};
        w[k - 1] = sigma[digits[k - 1]];
    }
}

/// Smallest word of length <= max_len (length first, then lexicographic) satisfying pred.
/// Words of each length are split by first symbol across `workers` threads; the merge keeps the
/// smallest first symbol, so the result and the examined count match a sequential scan.
template <class Pred>
SearchReport first_word(const Alphabet& sigma, std::size_t max_len, const Pred& pred, unsigned workers) {
    const auto start = std::chrono::steady_clock::now();
    SearchReport report;
    report.max_len = max_len;
    const std::size_t base = sigma.size();
    for (std::size_t len = 1; len <= max_len && !report.witness && base > 0; ++len) {
        std::vector<std::pair<std::optional<Word>, std::uint64_t>> parts(base);
        if (workers <= 1) {
            for (std::size_t s = 0; s < base; ++s) {
                parts[s] = scan_block(sigma, len, s, pred);
                if (parts[s].first) break;
            }
        } else {
            for (std::size_t from = 0; from < base; from += workers) {
                std::vector<std::future<std::pair<std::optional<Word>, std::uint64_t>>> jobs;
                for (std::size_t s = from; s < std::min<std::size_t>(base, from + workers); ++s)
                    jobs.push_back(std::async(std::launch::async, [&, s] { return scan_block(sigma, len, s, pred); }));
                bool found = false;
                for (std::size_t k = 0; k < jobs.size(); ++k) {
                    parts[from + k] = jobs[k].get();
                    found = found || parts[from + k].first.has_value();
                }
                if (found) break;
            }
        }
        for (auto& [w, count] : parts) {
            report.examined += count;
            if (w) {
                report.witness = std::move(w);
                break;
            }
        }
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace detail

/// Shortest accepted word of length at most max_len, smallest in the alphabet's declaration order.
inline SearchReport bounded_emptiness(const Acceptor& a, std::size_t max_len, unsigned workers = 1) {
    if (max_len == 0) throw WordError("max length must be at least 1");
    return detail::first_word(a.alphabet(), max_len, [&](const Word& w) { return a.accepts(w); }, workers);
}

inline std::optional<Word> min_witness(const Acceptor& a, std::size_t max_len, unsigned workers = 1) {
    return bounded_emptiness(a, max_len, workers).witness;
}

/// Smallest word on which the two acceptors disagree, enumerated in a1's alphabet order. The
/// witness of the report is the counterexample.
inline SearchReport bounded_equivalence(const Acceptor& a1, const Acceptor& a2, std::size_t max_len,
                                        unsigned workers = 1) {
    if (!a1.alphabet().same_symbols(a2.alphabet())) throw AlphabetError("acceptors have different alphabets");
    if (max_len == 0) throw WordError("max length must be at least 1");
    return detail::first_word(
        a1.alphabet(), max_len, [&](const Word& w) { return a1.accepts(w) != a2.accepts(w); }, workers);
}

struct Mutant {
    std::size_t position;
    Symbol from;
    Symbol to;
    Word word;
    bool accepted;
};

struct MutationReport {
    bool original_accepted = false;
    std::vector<Mutant> mutants;

    [[nodiscard]] std::size_t rejected() const {
        return static_cast<std::size_t>(std::count_if(mutants.begin(), mutants.end(), [](const Mutant& m) { return !m.accepted; }));
    }
    [[nodiscard]] std::vector<Mutant> accepting() const {
        std::vector<Mutant> out;
        for (const auto& m : mutants)
            if (m.accepted) out.push_back(m);
        return out;
    }

    [[nodiscard]] std::string str() const {
        std::ostringstream os;
        os << "operator=single-position substitution\n"
           << "original=" << (original_accepted ? "accept" : "reject") << "\n"
           << "mutants=" << mutants.size() << "\nrejected=" << rejected() << "\n";
        for (const auto& m : mutants)
            if (m.accepted)
                os << "accepting=" << m.position << " " << m.from << "->" << m.to << " " << format_word(m.word) << "\n";
        return os.str();
    }
};

/// `trials` single-position substitutions of w. Each trial draws a position and a different
/// symbol from a 64-bit Mersenne twister seeded with `seed`, so the mutants depend only on
/// (w, alphabet order, trials, seed).
inline MutationReport mutation_test(const Acceptor& a, const Word& w, std::size_t trials, std::uint64_t seed) {
    if (w.empty()) throw WordError("mutation needs a nonempty word");
    const Alphabet& sigma = a.alphabet();
    const auto idx = sigma.encode(w);
    if (sigma.size() < 2) throw WordError("mutation needs at least two symbols");
    MutationReport r;
    r.original_accepted = a.accepts(w);
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t pos = rng() % w.size();
        std::size_t sym = rng() % (sigma.size() - 1);
        if (sym >= idx[pos]) ++sym;
        Word m = w;
        m[pos] = sigma[sym];
        const bool acc = a.accepts(m);
        r.mutants.push_back({pos, w[pos], sigma[sym], std::move(m), acc});
    }
    return r;
}

}  // namespace hardattn::analysis
