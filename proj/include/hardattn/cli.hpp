#pragma once
// Command-line front end. dispatch() parses argv, runs one subcommand and returns the exit code:
// 0 success (or witness found), 1 nothing found / invalid, 2 usage or input error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hardattn/analysis.hpp"
#include "hardattn/brasp.hpp"
#include "hardattn/ltl.hpp"
#include "hardattn/tiling.hpp"
#include "hardattn/translate.hpp"
#include "hardattn/uhat.hpp"

namespace hardattn::cli {

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"run",          "translate", "compile-tiling", "hchain",
                                                "empty",        "min-witness", "equiv",        "mutate",
                                                "verify-tiling", "search-tiling", "reachable"};
    return names;
}

enum class Kind { brasp, uhat, ltl, tiles };

inline Kind parse_kind(std::string_view s) {
    if (s == "brasp") return Kind::brasp;
    if (s == "uhat") return Kind::uhat;
    if (s == "ltl") return Kind::ltl;
    if (s == "tiles") return Kind::tiles;
    throw ParseError("unknown model kind '" + std::string(s) + "' (expected brasp, uhat, ltl or tiles)");
}

inline std::string_view to_string(Kind k) {
    static constexpr std::string_view names[] = {"brasp", "uhat", "ltl", "tiles"};
    return names[static_cast<int>(k)];
}

/// Kind from an explicit override, else from the file extension.
inline Kind kind_of(const std::string& path, const std::string& override_kind) {
    if (!override_kind.empty()) return parse_kind(override_kind);
    const std::string ext = std::filesystem::path(path).extension().string();
    if (ext.size() < 2) throw ParseError(path + ": cannot infer the model kind; pass --kind");
    try {
        return parse_kind(ext.substr(1));
    } catch (const ParseError&) {
        throw ParseError(path + ": unknown extension '" + ext + "'; pass --kind");
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw std::runtime_error("cannot write '" + path + "'");
}

/// Parses a model file, prefixing any error with the path.
template <class F>
auto with_file_context(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

inline analysis::Acceptor load_acceptor(const std::string& path, const std::string& override_kind) {
    const Kind k = kind_of(path, override_kind);
    const std::string text = read_file(path);
    return with_file_context(path, [&]() -> analysis::Acceptor {
        switch (k) {
            case Kind::brasp: return brasp::parse(text);
            case Kind::uhat: return uhat::parse(text);
            case Kind::ltl: return ltl::parse(text);
            case Kind::tiles: return tiling::compile_tiling_to_brasp(tiling::parse_instance(text));
        }
        throw ParseError("unreachable");
    });
}

inline tiling::Instance load_instance(const std::string& path) {
    const std::string text = read_file(path);
    return with_file_context(path, [&] { return tiling::parse_instance(text); });
}

namespace detail {

struct Options {
    std::string model, word, kind, from, to, in, out, a, b, grid, format = "text", symbols = "a,b,c",
                                                                   pairs = "a:b,b:c,b:a,c:b";
    std::size_t max_len = 6, trials = 200, cap = 100000, max_rows = 4, words = 1;
    unsigned n = 1, workers = 1;
    std::uint64_t seed = 0;
    bool trace = false;
};

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

class Reporter {
public:
    Reporter(std::ostream& out, bool records) : out_(out), records_(records) {}

    [[nodiscard]] bool records() const { return records_; }
    void text(const std::string& line) {
        if (!records_) out_ << line << "\n";
    }
    template <class T>
    void record(const std::string& key, const T& value) {
        if (records_) out_ << key << "=" << value << "\n";
    }
    /// Block that is already in key=value form.
    void records_block(const std::string& block) {
        if (records_) out_ << block;
    }
    std::ostream& raw() { return out_; }

private:
    std::ostream& out_;
    bool records_;
};

inline void print_brasp_trace(std::ostream& os, const brasp::Program& p, const Word& w) {
    const auto t = brasp::eval(p, w);
    std::size_t width = 0;
    for (const auto& name : t.names) width = std::max(width, name.size());
    os << std::string(width, ' ') << " ";
    for (const auto& s : w) os << " " << s;
    os << "\n";
    for (std::size_t v = 0; v < t.names.size(); ++v) {
        os << t.names[v] << std::string(width - t.names[v].size(), ' ') << " ";
        for (std::size_t i = 0; i < w.size(); ++i) os << " " << std::string(w[i].size() - 1, ' ') << t[v][i];
        os << "\n";
    }
}

inline void print_uhat_trace(std::ostream& os, const uhat::Model& m, const Word& w) {
    const auto t = uhat::simulate(m, w);
    for (std::size_t l = 0; l < t.sequences.size(); ++l) {
        os << "layer " << l;
        if (l > 0) os << (std::holds_alternative<uhat::AttentionLayer>(m.layers[l - 1]) ? " attention" : " relu");
        os << "\n";
        for (std::size_t i = 0; i < w.size(); ++i) {
            os << "  " << i << " " << w[i] << " " << t.sequences[l][i].str();
            if (l < t.chosen.size() && !t.chosen[l].empty())
                os << " <- " << (t.chosen[l][i] ? std::to_string(*t.chosen[l][i]) : std::string("none"));
            os << "\n";
        }
    }
    os << "value_bits " << uhat::value_bound_report(t) << "\n";
}

inline int run(const Options& o, Reporter& r) {
    const auto acc = load_acceptor(o.model, o.kind);
    const Word w = parse_word(o.word, acc.alphabet());
    const bool ok = acc.accepts(w);
    r.text(ok ? "accept" : "reject");
    r.record("result", ok ? "accept" : "reject");
    r.record("length", w.size());
    if (o.trace) {
        if (const auto* p = std::get_if<brasp::Program>(&acc.model())) print_brasp_trace(r.raw(), *p, w);
        else if (const auto* m = std::get_if<uhat::Model>(&acc.model())) print_uhat_trace(r.raw(), *m, w);
        else {
            const auto& f = std::get<ltl::Model>(acc.model());
            std::string holds;
            for (std::size_t i = 0; i < w.size(); ++i) holds += ltl::holds(f, w, i) ? '1' : '0';
            r.text("holds " + holds);
            r.record("holds", holds);
        }
    }
    return 0;
}

inline void emit(Reporter& r, const Options& o, const std::string& text, const std::string& what) {
    if (o.out.empty()) {
        r.raw() << text;
        return;
    }
    write_file(o.out, text);
    r.text("wrote " + what + " to " + o.out);
    r.record("out", o.out);
}

inline int translate_cmd(const Options& o, Reporter& r) {
    const Kind from = kind_of(o.in, o.from);
    const Kind to = parse_kind(o.to);
    const std::string text = read_file(o.in);
    translate::TranslationReport report;
    std::string result;
    if (from == Kind::ltl && to == Kind::uhat) {
        auto t = translate::ltl_to_uhat(with_file_context(o.in, [&] { return ltl::parse(text); }));
        report = t.report;
        result = uhat::to_text(t.model);
    } else if ((from == Kind::brasp || from == Kind::tiles) && to == Kind::uhat) {
        auto p = with_file_context(o.in, [&] {
            return from == Kind::brasp ? brasp::parse(text) : tiling::compile_tiling_to_brasp(tiling::parse_instance(text));
        });
        auto t = translate::brasp_to_uhat(p);
        report = t.report;
        result = uhat::to_text(t.model);
    } else if (from == Kind::uhat && to == Kind::ltl) {
        auto t = translate::uhat_to_ltl(with_file_context(o.in, [&] { return uhat::parse(text); }), o.cap);
        report = t.report;
        result = ltl::to_text(t.model);
    } else if (from == Kind::tiles && to == Kind::brasp) {
        result = brasp::to_text(tiling::compile_tiling_to_brasp(load_instance(o.in)));
        report.source = "tiles";
        report.target = "brasp";
    } else {
        throw TranslationError("no translation from " + std::string(to_string(from)) + " to " +
                               std::string(to_string(to)));
    }
    if (o.out.empty()) {
        r.raw() << result;
        return 0;
    }
    write_file(o.out, result);
    r.records_block(report.str());
    r.record("out", o.out);
    if (!r.records()) {
        r.text("translated " + report.source + " -> " + report.target + ", wrote " + o.out);
        if (report.target == "uhat")
            r.text(std::to_string(report.layers) + " layers (" + std::to_string(report.attention_layers) +
                   " attention), width " + std::to_string(report.max_width));
        for (const auto& note : report.notes) r.text("note: " + note);
    }
    return 0;
}

inline int compile_tiling(const Options& o, Reporter& r) {
    const auto program = tiling::compile_tiling_to_brasp(load_instance(o.in));
    r.record("vectors", program.vector_count());
    emit(r, o, brasp::to_text(program), "B-RASP program (" + std::to_string(program.vector_count()) + " vectors)");
    return 0;
}

inline tiling::HChainSpec hchain_spec(const Options& o) {
    tiling::HChainSpec spec;
    spec.n = o.n;
    spec.symbols = split(o.symbols, ',');
    for (const auto& p : split(o.pairs, ',')) {
        const auto parts = split(p, ':');
        if (parts.size() != 2) throw ParseError("pair '" + p + "' must be written x:y");
        spec.pairs.emplace_back(parts[0], parts[1]);
    }
    return spec;
}

inline int hchain(const Options& o, Reporter& r) {
    const auto chain = tiling::make_h_chain(hchain_spec(o));
    const auto words = chain.words(o.words);
    if (!o.out.empty()) {
        write_file(o.out, brasp::to_text(chain.program));
        r.text("wrote H-chain program to " + o.out);
        r.record("out", o.out);
    } else if (o.words == 0) {
        r.raw() << brasp::to_text(chain.program);
    }
    for (const auto& w : words) {
        r.text(format_word(w));
        r.record("word", format_word(w));
    }
    return 0;
}

inline void print_search(Reporter& r, const analysis::SearchReport& rep, const char* found, const char* none) {
    r.records_block(rep.str());
    if (rep.witness)
        r.text(std::string(found) + ": " + format_word(*rep.witness) + " (length " + std::to_string(rep.witness->size()) +
               ", " + std::to_string(rep.examined) + " words examined)");
    else
        r.text(std::string(none) + " up to length " + std::to_string(rep.max_len) + " (" + std::to_string(rep.examined) +
               " words examined)");
}

inline int empty(const Options& o, Reporter& r) {
    const auto rep = analysis::bounded_emptiness(load_acceptor(o.model, o.kind), o.max_len, o.workers);
    print_search(r, rep, "witness", "no accepted word");
    return rep.witness ? 0 : 1;
}

inline int min_witness(const Options& o, Reporter& r) {
    const auto w = analysis::min_witness(load_acceptor(o.model, o.kind), o.max_len, o.workers);
    r.text(w ? format_word(*w) : "none");
    r.record("witness", w ? format_word(*w) : "none");
    return w ? 0 : 1;
}

inline int equiv(const Options& o, Reporter& r) {
    const auto a = load_acceptor(o.a, o.kind), b = load_acceptor(o.b, o.kind);
    const auto rep = analysis::bounded_equivalence(a, b, o.max_len, o.workers);
    r.records_block(rep.str());
    if (rep.witness) {
        r.text("counterexample: " + format_word(*rep.witness) + " (" + (a.accepts(*rep.witness) ? "a" : "b") +
               " accepts, " + (a.accepts(*rep.witness) ? "b" : "a") + " rejects)");
        return 0;
    }
    r.text("equivalent up to length " + std::to_string(o.max_len));
    return 1;
}

inline int mutate(const Options& o, Reporter& r) {
    const auto acc = load_acceptor(o.model, o.kind);
    const auto rep = analysis::mutation_test(acc, parse_word(o.word, acc.alphabet()), o.trials, o.seed);
    r.records_block(rep.str());
    if (!r.records()) {
        r.text(std::string("original ") + (rep.original_accepted ? "accepted" : "rejected"));
        r.text(std::to_string(rep.rejected()) + " of " + std::to_string(rep.mutants.size()) + " mutants rejected");
        for (const auto& m : rep.accepting())
            r.text("accepted mutant at " + std::to_string(m.position) + " (" + m.from + " -> " + m.to +
                   "): " + format_word(m.word));
    }
    return 0;
}

inline int verify_tiling(const Options& o, Reporter& r) {
    const auto inst = load_instance(o.in);
    const std::string text = read_file(o.grid);
    const auto g = with_file_context(o.grid, [&] { return tiling::parse_grid(text, inst); });
    const bool ok = tiling::verify_tiling(inst, g);
    r.text(ok ? "valid" : "invalid");
    r.record("result", ok ? "valid" : "invalid");
    r.record("rows", g.height());
    return ok ? 0 : 1;
}

inline int search_tiling(const Options& o, Reporter& r) {
    const auto inst = load_instance(o.in);
    const auto g = tiling::search_tiling(inst, o.max_rows);
    if (!g) {
        r.text("no tiling with at most " + std::to_string(o.max_rows) + " rows");
        r.record("outcome", "exhausted");
        r.record("max_rows", o.max_rows);
        return 1;
    }
    r.record("outcome", "found");
    r.record("rows", g->height());
    r.record("word", format_word(tiling::encode_grid(inst, *g)));
    if (!o.out.empty()) {
        write_file(o.out, tiling::to_text(inst, *g));
        r.text("found " + std::to_string(g->height()) + "-row tiling, wrote " + o.out);
    } else if (!r.records()) {
        r.raw() << tiling::to_text(inst, *g);
    }
    return 0;
}

inline int reachable(const Options& o, Reporter& r) {
    const std::string text = read_file(o.model);
    const auto m = with_file_context(o.model, [&] { return uhat::parse(text); });
    const auto sets = uhat::reachable_value_sets(m, o.cap);
    for (std::size_t l = 0; l < sets.size(); ++l) {
        r.text("layer " + std::to_string(l) + ": " + std::to_string(sets[l].size()) + " values");
        r.record("layer" + std::to_string(l) + ".size", sets[l].size());
        for (const auto& v : sets[l]) {
            r.text("  " + v.str());
            r.record("layer" + std::to_string(l) + ".value", v.str());
        }
    }
    if (!o.word.empty()) {
        const auto bits = uhat::value_bound_report(uhat::simulate(m, parse_word(o.word, m.embedding.alphabet)));
        r.text("value bits on the word: " + std::to_string(bits));
        r.record("value_bits", bits);
    }
    return 0;
}

}  // namespace detail

inline int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    detail::Options o;
    CLI::App app{"Hard-attention transformers, B-RASP and LTL as executable language acceptors", "hardattn"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--format", o.format, "text or records")->check(CLI::IsMember({"text", "records"}));

    auto model = [&](CLI::App* s) {
        s->add_option("-m,--model", o.model, "model file (.uhat, .brasp, .ltl, .tiles)")->required()->check(CLI::ExistingFile);
        s->add_option("--kind", o.kind, "model kind, overriding the extension")
            ->check(CLI::IsMember({"brasp", "uhat", "ltl", "tiles"}));
    };
    auto max_len = [&](CLI::App* s) {
        s->add_option("--max-len", o.max_len, "longest word to enumerate")->check(CLI::PositiveNumber);
        s->add_option("--workers", o.workers, "threads for the enumeration")->check(CLI::PositiveNumber);
    };
    auto instance = [&](CLI::App* s) {
        s->add_option("--in", o.in, "tiling instance (JSON)")->required()->check(CLI::ExistingFile);
    };

    auto* run = app.add_subcommand("run", "run a model on a word");
    model(run);
    run->add_option("-w,--word", o.word, "input word")->required();
    run->add_flag("--trace", o.trace, "print every layer or vector");

    auto* tr = app.add_subcommand("translate", "translate between model kinds");
    tr->add_option("--from", o.from, "source kind (default: from the extension)")
        ->check(CLI::IsMember({"brasp", "uhat", "ltl", "tiles"}));
    tr->add_option("--to", o.to, "target kind")->required()->check(CLI::IsMember({"brasp", "uhat", "ltl"}));
    tr->add_option("--in", o.in, "source file")->required()->check(CLI::ExistingFile);
    tr->add_option("--out", o.out, "target file (default: standard output)");
    tr->add_option("--cap", o.cap, "reachable-set cap for uhat -> ltl")->check(CLI::PositiveNumber);

    auto* ct = app.add_subcommand("compile-tiling", "compile a tiling instance to B-RASP");
    instance(ct);
    ct->add_option("--out", o.out, "program file (default: standard output)");

    auto* hc = app.add_subcommand("hchain", "H-chain program and valid words");
    hc->add_option("--n", o.n, "counter bits")->check(CLI::Range(1u, tiling::max_exponent));
    hc->add_option("--symbols", o.symbols, "letters, comma separated");
    hc->add_option("--pairs", o.pairs, "allowed neighbours x:y, comma separated");
    hc->add_option("--out", o.out, "program file");
    hc->add_option("--words", o.words, "number of valid words to print");

    auto* em = app.add_subcommand("empty", "bounded emptiness check");
    model(em);
    max_len(em);

    auto* mw = app.add_subcommand("min-witness", "shortest accepted word");
    model(mw);
    max_len(mw);

    auto* eq = app.add_subcommand("equiv", "bounded equivalence check");
    eq->add_option("--a", o.a, "first model")->required()->check(CLI::ExistingFile);
    eq->add_option("--b", o.b, "second model")->required()->check(CLI::ExistingFile);
    eq->add_option("--kind", o.kind, "model kind for both files")->check(CLI::IsMember({"brasp", "uhat", "ltl", "tiles"}));
    max_len(eq);

    auto* mu = app.add_subcommand("mutate", "single-symbol mutation test");
    model(mu);
    mu->add_option("-w,--word", o.word, "word to mutate")->required();
    mu->add_option("--trials", o.trials, "number of mutants");
    mu->add_option("--seed", o.seed, "random seed");

    auto* vt = app.add_subcommand("verify-tiling", "check a grid against an instance");
    instance(vt);
    vt->add_option("--grid", o.grid, "grid file, bottom row first")->required()->check(CLI::ExistingFile);

    auto* st = app.add_subcommand("search-tiling", "brute-force tiling search");
    instance(st);
    st->add_option("--max-rows", o.max_rows, "largest height to try")->check(CLI::PositiveNumber);
    st->add_option("--out", o.out, "grid file");

    auto* re = app.add_subcommand("reachable", "reachable value sets of a UHAT");
    re->add_option("-m,--model", o.model, "UHAT file")->required()->check(CLI::ExistingFile);
    re->add_option("--cap", o.cap, "largest set size before giving up")->check(CLI::PositiveNumber);
    re->add_option("-w,--word", o.word, "also report the value bits on this word");

    std::vector<const char*> args{"hardattn"};
    for (const auto& a : argv) args.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(args.size()), args.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    detail::Reporter r(out, o.format == "records");
    try {
        if (app.got_subcommand(run)) return detail::run(o, r);
        if (app.got_subcommand(tr)) return detail::translate_cmd(o, r);
        if (app.got_subcommand(ct)) return detail::compile_tiling(o, r);
        if (app.got_subcommand(hc)) return detail::hchain(o, r);
        if (app.got_subcommand(em)) return detail::empty(o, r);
        if (app.got_subcommand(mw)) return detail::min_witness(o, r);
        if (app.got_subcommand(eq)) return detail::equiv(o, r);
        if (app.got_subcommand(mu)) return detail::mutate(o, r);
        if (app.got_subcommand(vt)) return detail::verify_tiling(o, r);
        if (app.got_subcommand(st)) return detail::search_tiling(o, r);
        if (app.got_subcommand(re)) return detail::reachable(o, r);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace hardattn::cli
