#pragma once

// Tokenizer shared by the line-oriented text formats.

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>

#include "hardattn/errors.hpp"
#include "hardattn/words.hpp"

namespace hardattn::lexing {

inline std::string quote_symbol(const Symbol& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out += '\\';
        out += c;
    }
    return out + "'";
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

struct Token {
    enum class Kind { ident, quoted, number, punct, end } kind;
    std::string text;
    std::size_t column;
};

class LineLexer {
public:
    LineLexer(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }
    bool accept(std::string_view punct_or_word) {
        if ((tok_.kind == Token::Kind::punct || tok_.kind == Token::Kind::ident) && tok_.text == punct_or_word) {
            advance();
            return true;
        }
        return false;
    }
    void expect(std::string_view what) {
        if (!accept(what)) fail("expected '" + std::string(what) + "'");
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg + (tok_.kind == Token::Kind::end ? " at end of line" : " near '" + tok_.text + "'"),
                         line_no_, tok_.column + 1);
    }
    std::size_t line_no() const { return line_no_; }

private:
    void advance() {
        while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
        tok_.column = pos_;
        tok_.text.clear();
        if (pos_ >= line_.size()) {
            tok_.kind = Token::Kind::end;
            return;
        }
        const char c = line_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            tok_.kind = Token::Kind::ident;
            while (pos_ < line_.size() &&
                   (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '_'))
                tok_.text += line_[pos_++];
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            tok_.kind = Token::Kind::number;
            while (pos_ < line_.size() && std::isalnum(static_cast<unsigned char>(line_[pos_])))
                tok_.text += line_[pos_++];
            return;
        }
        if (c == '\'') {
            tok_.kind = Token::Kind::quoted;
            ++pos_;
            while (true) {
                if (pos_ >= line_.size()) throw ParseError("unterminated quoted symbol", line_no_, tok_.column + 1);
                char d = line_[pos_++];
                if (d == '\'') break;
                if (d == '\\' && pos_ < line_.size()) d = line_[pos_++];
                tok_.text += d;
            }
            return;
        }
        tok_.kind = Token::Kind::punct;
        for (std::string_view op : {"<->", "->"}) {
            if (line_.substr(pos_, op.size()) == op) {
                tok_.text = op;
                pos_ += op.size();
                return;
            }
        }
        tok_.text = std::string(1, c);
        ++pos_;
    }

    std::string_view line_;
    std::size_t line_no_;
    std::size_t pos_ = 0;
    Token tok_{};
};

}  // namespace hardattn::lexing
