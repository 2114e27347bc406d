#pragma once

// Exact rational weights and their extension with infinities.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nqa {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

/// Exact rational number in canonical reduced form (denominator > 0).
class Weight {
public:
    Weight() = default;
    Weight(std::int64_t n) : value_(n) {}  // NOLINT(google-explicit-constructor)
    Weight(std::int64_t n, std::int64_t d) {
        if (d == 0) throw std::invalid_argument("zero denominator");
        value_ = d < 0 ? BigRational(BigInt(-BigInt(n)), BigInt(-BigInt(d))) : BigRational(BigInt(n), BigInt(d));
    }
    Weight(const BigInt& n, const BigInt& d) {
        if (d == 0) throw std::invalid_argument("zero denominator");
        value_ = d < 0 ? BigRational(BigInt(-n), BigInt(-d)) : BigRational(n, d);
    }
    explicit Weight(BigRational v) : value_(std::move(v)) {}

    /// Parses an integer or a `p/q` literal with an optional sign on p.
    static Weight parse(std::string_view text) {
        auto parse_int = [](std::string_view s, bool allow_sign) -> BigInt {
            if (s.empty()) throw std::invalid_argument("empty number");
            std::size_t i = 0;
            bool neg = false;
            if (allow_sign && (s[0] == '-' || s[0] == '+')) {
                neg = s[0] == '-';
                i = 1;
            }
            if (i == s.size()) throw std::invalid_argument("malformed number");
            BigInt out = 0;
            for (; i < s.size(); ++i) {
                if (s[i] < '0' || s[i] > '9')
                    throw std::invalid_argument("malformed number '" + std::string(s) + "'");
                out = out * 10 + (s[i] - '0');
            }
            return neg ? BigInt(-out) : out;
        };
        auto slash = text.find('/');
        if (slash == std::string_view::npos) return Weight(parse_int(text, true), BigInt(1));
        BigInt n = parse_int(text.substr(0, slash), true);
        BigInt d = parse_int(text.substr(slash + 1), false);
        if (d == 0) throw std::invalid_argument("zero denominator");
        return Weight(n, d);
    }

    const BigRational& raw() const { return value_; }
    BigInt numerator() const { return boost::multiprecision::numerator(value_); }
    BigInt denominator() const { return boost::multiprecision::denominator(value_); }

    bool is_integer() const { return denominator() == 1; }
    int sign() const { return value_.sign(); }
    Weight abs() const { return Weight(value_.sign() < 0 ? BigRational(-value_) : value_); }

    /// Smallest multiple of 1/lattice that is >= this value.
    Weight ceil_to_lattice(const BigInt& lattice) const {
        BigRational scaled = value_ * BigRational(lattice);
        BigInt n = boost::multiprecision::numerator(scaled);
        BigInt d = boost::multiprecision::denominator(scaled);
        BigInt q = n / d;
        if (q * d < n) q += 1;
        return Weight(q, lattice);
    }

    double to_double() const { return value_.convert_to<double>(); }

    std::string str() const {
        if (is_integer()) return numerator().str();
        return numerator().str() + "/" + denominator().str();
    }

    friend Weight operator+(const Weight& a, const Weight& b) { return Weight(BigRational(a.value_ + b.value_)); }
    friend Weight operator-(const Weight& a, const Weight& b) { return Weight(BigRational(a.value_ - b.value_)); }
    friend Weight operator*(const Weight& a, const Weight& b) { return Weight(BigRational(a.value_ * b.value_)); }
    friend Weight operator/(const Weight& a, const Weight& b) {
        if (b.sign() == 0) throw std::domain_error("division by zero");
        return Weight(BigRational(a.value_ / b.value_));
    }
    Weight operator-() const { return Weight(BigRational(-value_)); }
    Weight& operator+=(const Weight& o) { value_ += o.value_; return *this; }
    Weight& operator-=(const Weight& o) { value_ -= o.value_; return *this; }

    friend bool operator==(const Weight& a, const Weight& b) { return a.value_ == b.value_; }
    friend std::strong_ordering operator<=>(const Weight& a, const Weight& b) {
        if (a.value_ < b.value_) return std::strong_ordering::less;
        if (a.value_ > b.value_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    friend std::ostream& operator<<(std::ostream& os, const Weight& w) { return os << w.str(); }

    std::size_t hash() const {
        std::size_t h = boost::multiprecision::hash_value(numerator());
        return h ^ (boost::multiprecision::hash_value(denominator()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    }

private:
    BigRational value_{0};
};

/// A weight extended with -inf and +inf.
class ExtValue {
public:
    enum class Kind : std::uint8_t { NegInf, Finite, PosInf };

    ExtValue() : kind_(Kind::NegInf) {}
    ExtValue(Weight w) : kind_(Kind::Finite), value_(std::move(w)) {}  // NOLINT(google-explicit-constructor)
    ExtValue(std::int64_t n) : kind_(Kind::Finite), value_(n) {}       // NOLINT(google-explicit-constructor)

    static ExtValue neg_inf() { return ExtValue(); }
    static ExtValue pos_inf() {
        ExtValue v;
        v.kind_ = Kind::PosInf;
        return v;
    }

    Kind kind() const { return kind_; }
    bool is_finite() const { return kind_ == Kind::Finite; }
    bool is_neg_inf() const { return kind_ == Kind::NegInf; }
    bool is_pos_inf() const { return kind_ == Kind::PosInf; }

    const Weight& finite() const {
        if (!is_finite()) throw std::logic_error("ExtValue is not finite");
        return value_;
    }

    friend ExtValue operator+(const ExtValue& a, const ExtValue& b) {
        if (a.is_finite() && b.is_finite()) return ExtValue(a.value_ + b.value_);
        if ((a.is_neg_inf() && b.is_pos_inf()) || (a.is_pos_inf() && b.is_neg_inf()))
            throw std::domain_error("undefined sum of opposite infinities");
        return a.is_finite() ? b : a;
    }
    ExtValue operator-() const {
        if (is_finite()) return ExtValue(-value_);
        return is_neg_inf() ? pos_inf() : neg_inf();
    }

    friend bool operator==(const ExtValue& a, const ExtValue& b) {
        if (a.kind_ != b.kind_) return false;
        return !a.is_finite() || a.value_ == b.value_;
    }
    friend std::strong_ordering operator<=>(const ExtValue& a, const ExtValue& b) {
        if (a.kind_ != b.kind_) return static_cast<int>(a.kind_) <=> static_cast<int>(b.kind_);
        if (!a.is_finite()) return std::strong_ordering::equal;
        return a.value_ <=> b.value_;
    }

    std::string str() const {
        switch (kind_) {
            case Kind::NegInf: return "-inf";
            case Kind::PosInf: return "+inf";
            default: return value_.str();
        }
    }
    friend std::ostream& operator<<(std::ostream& os, const ExtValue& v) { return os << v.str(); }

    std::size_t hash() const { return is_finite() ? value_.hash() : static_cast<std::size_t>(kind_) * 0x51ed27u; }

private:
    Kind kind_;
    Weight value_;
};

inline const ExtValue& max(const ExtValue& a, const ExtValue& b) { return a < b ? b : a; }
inline const ExtValue& min(const ExtValue& a, const ExtValue& b) { return b < a ? b : a; }

}  // namespace nqa

template <>
struct std::hash<nqa::Weight> {
    std::size_t operator()(const nqa::Weight& w) const { return w.hash(); }
};

template <>
struct std::hash<nqa::ExtValue> {
    std::size_t operator()(const nqa::ExtValue& v) const { return v.hash(); }
};
