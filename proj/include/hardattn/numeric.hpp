#pragma once

// Exact rational scalars, vectors and affine maps.

#include <gmpxx.h>

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hardattn/errors.hpp"

namespace hardattn {

/// Arbitrary-precision rational, always kept in canonical form
/// (positive denominator, numerator and denominator coprime).
class Rational {
public:
    Rational() = default;
    Rational(long v) : q_(v) {}  // NOLINT(google-explicit-constructor)
    Rational(int v) : q_(v) {}   // NOLINT(google-explicit-constructor)
    Rational(long num, long den) {
        if (den == 0) throw std::domain_error("zero denominator");
        q_ = mpq_class(num, den);
        q_.canonicalize();
    }
    explicit Rational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }

    /// Wraps a value produced by GMP arithmetic, which is already canonical.
    static Rational from_canonical(mpq_class q) {
        Rational r;
        r.q_ = std::move(q);
        return r;
    }

    /// Parses "p/q" or "p" (decimal, optional leading minus on p only).
    static Rational parse(std::string_view text) {
        auto bad = [&] { return ParseError("malformed rational '" + std::string(text) + "'"); };
        if (text.empty()) throw bad();
        auto slash = text.find('/');
        auto num = text.substr(0, slash);
        auto digits_ok = [](std::string_view s, bool allow_minus) {
            if (allow_minus && !s.empty() && s.front() == '-') s.remove_prefix(1);
            return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
        };
        if (!digits_ok(num, true)) throw bad();
        mpz_class p(std::string(num), 10);
        mpz_class q(1);
        if (slash != std::string_view::npos) {
            auto den = text.substr(slash + 1);
            if (!digits_ok(den, false)) throw bad();
            q = mpz_class(std::string(den), 10);
            if (q == 0) throw bad();
        }
        return Rational(mpq_class(p, q));
    }

    [[nodiscard]] std::string str() const {
        if (q_.get_den() == 1) return q_.get_num().get_str();
        return q_.get_num().get_str() + "/" + q_.get_den().get_str();
    }

    [[nodiscard]] const mpq_class& raw() const { return q_; }
    [[nodiscard]] mpz_class numerator() const { return q_.get_num(); }
    [[nodiscard]] mpz_class denominator() const { return q_.get_den(); }
    [[nodiscard]] int sign() const { return sgn(q_); }
    [[nodiscard]] bool is_zero() const { return sgn(q_) == 0; }

    /// Binary length: max of the bit lengths of |numerator| and denominator, with 0 counted as 1 bit.
    [[nodiscard]] std::size_t bit_length() const {
        auto bits = [](const mpz_class& z) -> std::size_t {
            return sgn(z) == 0 ? 1 : mpz_sizeinbase(z.get_mpz_t(), 2);
        };
        return std::max(bits(q_.get_num()), bits(q_.get_den()));
    }

    Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
    Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
    Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.is_zero()) throw std::domain_error("division by zero");
        q_ /= o.q_;
        return *this;
    }

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend Rational operator-(const Rational& a) { return from_canonical(mpq_class(-a.q_)); }

    friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.q_, b.q_) == 0; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        int c = cmp(a.q_, b.q_);
        return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    mpq_class q_;
};

inline Rational relu(const Rational& x) { return x.sign() < 0 ? Rational() : x; }

/// Fixed-width vector of rationals.
class RationalVector {
public:
    RationalVector() = default;
    explicit RationalVector(std::size_t width) : entries_(width) {}
    RationalVector(std::initializer_list<Rational> xs) : entries_(xs) {}
    explicit RationalVector(std::vector<Rational> xs) : entries_(std::move(xs)) {}

    static RationalVector unit(std::size_t width, std::size_t k) {
        RationalVector v(width);
        v[k] = Rational(1);
        return v;
    }

    [[nodiscard]] std::size_t width() const { return entries_.size(); }
    Rational& operator[](std::size_t k) { return entries_[k]; }
    const Rational& operator[](std::size_t k) const { return entries_[k]; }
    [[nodiscard]] const std::vector<Rational>& entries() const { return entries_; }
    [[nodiscard]] auto begin() const { return entries_.begin(); }
    [[nodiscard]] auto end() const { return entries_.end(); }

    [[nodiscard]] bool is_zero() const {
        return std::all_of(entries_.begin(), entries_.end(), [](const Rational& r) { return r.is_zero(); });
    }

    friend RationalVector operator+(const RationalVector& a, const RationalVector& b) {
        if (a.width() != b.width()) throw DimensionError("vector add: width mismatch");
        RationalVector out(a.width());
        for (std::size_t k = 0; k < a.width(); ++k) out[k] = a[k] + b[k];
        return out;
    }
    friend RationalVector operator-(const RationalVector& a, const RationalVector& b) {
        if (a.width() != b.width()) throw DimensionError("vector sub: width mismatch");
        RationalVector out(a.width());
        for (std::size_t k = 0; k < a.width(); ++k) out[k] = a[k] - b[k];
        return out;
    }

    friend bool operator==(const RationalVector&, const RationalVector&) = default;
    friend auto operator<=>(const RationalVector& a, const RationalVector& b) {
        return std::lexicographical_compare_three_way(a.entries_.begin(), a.entries_.end(), b.entries_.begin(),
                                                      b.entries_.end());
    }

    [[nodiscard]] std::string str() const {
        std::string s = "(";
        for (std::size_t k = 0; k < entries_.size(); ++k) {
            if (k) s += ", ";
            s += entries_[k].str();
        }
        return s + ")";
    }
    friend std::ostream& operator<<(std::ostream& os, const RationalVector& v) { return os << v.str(); }

private:
    std::vector<Rational> entries_;
};

inline Rational dot(const RationalVector& u, const RationalVector& v) {
    if (u.width() != v.width())
        throw DimensionError("dot: widths " + std::to_string(u.width()) + " and " + std::to_string(v.width()));
    mpq_class acc;
    for (std::size_t k = 0; k < u.width(); ++k) {
        if (u[k].is_zero() || v[k].is_zero()) continue;
        acc += u[k].raw() * v[k].raw();
    }
    return Rational::from_canonical(std::move(acc));
}

/// Concatenation (u, v).
inline RationalVector concat(const RationalVector& u, const RationalVector& v) {
    std::vector<Rational> xs(u.begin(), u.end());
    xs.insert(xs.end(), v.begin(), v.end());
    return RationalVector(std::move(xs));
}

/// x -> Qx + b. Rows are stored sparsely; zero coefficients are dropped.
class AffineMap {
public:
    struct Entry {
        std::size_t col;
        Rational coeff;
        friend bool operator==(const Entry&, const Entry&) = default;
    };

    AffineMap() = default;

    /// Zero map from `in` to `out` coordinates.
    AffineMap(std::size_t in, std::size_t out) : in_(in), rows_(out), bias_(out) {}

    /// From a dense row-major matrix; `in` must be given explicitly when there are no rows.
    AffineMap(const std::vector<std::vector<Rational>>& matrix, RationalVector bias, std::size_t in)
        : in_(in), rows_(matrix.size()), bias_(std::move(bias)) {
        if (bias_.width() != matrix.size()) throw DimensionError("affine map: bias width differs from row count");
        for (std::size_t r = 0; r < matrix.size(); ++r) {
            if (matrix[r].size() != in) throw DimensionError("affine map: ragged matrix");
            for (std::size_t c = 0; c < in; ++c)
                if (!matrix[r][c].is_zero()) rows_[r].push_back({c, matrix[r][c]});
        }
    }

    static AffineMap identity(std::size_t width) {
        AffineMap m(width, width);
        for (std::size_t k = 0; k < width; ++k) m.set(k, k, Rational(1));
        return m;
    }

    [[nodiscard]] std::size_t in_width() const { return in_; }
    [[nodiscard]] std::size_t out_width() const { return rows_.size(); }
    [[nodiscard]] const RationalVector& bias() const { return bias_; }
    [[nodiscard]] const std::vector<Entry>& row(std::size_t r) const { return rows_[r]; }

    [[nodiscard]] Rational coeff(std::size_t r, std::size_t c) const {
        for (const auto& e : rows_[r])
            if (e.col == c) return e.coeff;
        return Rational();
    }

    void set(std::size_t r, std::size_t c, const Rational& value) {
        if (r >= rows_.size() || c >= in_) throw DimensionError("affine map: coefficient out of range");
        auto& row = rows_[r];
        auto it = std::find_if(row.begin(), row.end(), [c](const Entry& e) { return e.col == c; });
        if (value.is_zero()) {
            if (it != row.end()) row.erase(it);
        } else if (it != row.end()) {
            it->coeff = value;
        } else {
            row.insert(std::upper_bound(row.begin(), row.end(), c, [](std::size_t k, const Entry& e) { return k < e.col; }),
                       Entry{c, value});
        }
    }
    void set_bias(std::size_t r, const Rational& value) { bias_[r] = value; }

    [[nodiscard]] std::vector<std::vector<Rational>> dense() const {
        std::vector<std::vector<Rational>> m(rows_.size(), std::vector<Rational>(in_));
        for (std::size_t r = 0; r < rows_.size(); ++r)
            for (const auto& e : rows_[r]) m[r][e.col] = e.coeff;
        return m;
    }

    [[nodiscard]] AffineMap without_bias() const {
        AffineMap m = *this;
        m.bias_ = RationalVector(rows_.size());
        return m;
    }

    friend bool operator==(const AffineMap&, const AffineMap&) = default;

private:
    std::size_t in_ = 0;
    std::vector<std::vector<Entry>> rows_;
    RationalVector bias_;
};

/// Returns Qx + b.
inline RationalVector affine_apply(const AffineMap& map, const RationalVector& x) {
    if (x.width() != map.in_width())
        throw DimensionError("affine_apply: map expects width " + std::to_string(map.in_width()) + ", got " +
                             std::to_string(x.width()));
    std::vector<Rational> out;
    out.reserve(map.out_width());
    for (std::size_t r = 0; r < map.out_width(); ++r) {
        const auto& row = map.row(r);
        if (row.empty()) {
            out.push_back(map.bias()[r]);
            continue;
        }
        mpq_class acc = map.bias()[r].raw();
        for (const auto& e : row)
            if (!x[e.col].is_zero()) acc += e.coeff.raw() * x[e.col].raw();
        out.push_back(Rational::from_canonical(std::move(acc)));
    }
    return RationalVector(std::move(out));
}

/// Applies a map over the concatenation (u, v) without materializing it.
inline RationalVector affine_apply(const AffineMap& map, const RationalVector& u, const RationalVector& v) {
    if (u.width() + v.width() != map.in_width())
        throw DimensionError("affine_apply: map expects width " + std::to_string(map.in_width()) + ", got " +
                             std::to_string(u.width() + v.width()));
    const std::size_t split = u.width();
    std::vector<Rational> out;
    out.reserve(map.out_width());
    for (std::size_t r = 0; r < map.out_width(); ++r) {
        mpq_class acc = map.bias()[r].raw();
        for (const auto& e : map.row(r)) {
            const Rational& x = e.col < split ? u[e.col] : v[e.col - split];
            if (!x.is_zero()) acc += e.coeff.raw() * x.raw();
        }
        out.push_back(Rational::from_canonical(std::move(acc)));
    }
    return RationalVector(std::move(out));
}

inline std::size_t bit_length(const Rational& x) { return x.bit_length(); }

inline std::size_t bit_length(const RationalVector& v) {
    std::size_t bits = 1;
    for (const auto& x : v) bits = std::max(bits, x.bit_length());
    return bits;
}

}  // namespace hardattn
