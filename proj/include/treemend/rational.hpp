#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace treemend {

// Exact rational arithmetic on int64 numerator/denominator. Similarity
// scores, thresholds and metric ratios are all small fractions, so 64 bits
// are plenty; every narrowing from the 128-bit intermediate is checked and
// throws std::overflow_error instead of wrapping.
class Rational {
public:
    constexpr Rational() = default;

    constexpr Rational(long long value) : num_(value), den_(1) {}

    Rational(long long num, long long den) : num_(num), den_(den) {
        if (den_ == 0) throw std::domain_error("rational: zero denominator");
        normalize();
    }

    long long num() const { return num_; }
    long long den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }

    friend Rational operator+(const Rational& a, const Rational& b) {
        __int128 n = (__int128)a.num_ * b.den_ + (__int128)b.num_ * a.den_;
        __int128 d = (__int128)a.den_ * b.den_;
        return make_checked(n, d);
    }

    friend Rational operator-(const Rational& a, const Rational& b) {
        __int128 n = (__int128)a.num_ * b.den_ - (__int128)b.num_ * a.den_;
        __int128 d = (__int128)a.den_ * b.den_;
        return make_checked(n, d);
    }

    friend Rational operator*(const Rational& a, const Rational& b) {
        return make_checked((__int128)a.num_ * b.num_, (__int128)a.den_ * b.den_);
    }

    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational: division by zero");
        return make_checked((__int128)a.num_ * b.den_, (__int128)a.den_ * b.num_);
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }

    friend bool operator<(const Rational& a, const Rational& b) {
        return (__int128)a.num_ * b.den_ < (__int128)b.num_ * a.den_;
    }

    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    // Canonical text form: integers plain, everything else "p/q".
    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    // Decimal rendering, exact when the expansion terminates within
    // max_digits, otherwise rounded half-up at the last digit.
    std::string decimal_str(int max_digits = 12) const {
        long long n = num_;
        std::string sign;
        if (n < 0) {
            sign = "-";
            n = -n;
        }
        long long whole = n / den_;
        long long rem = n % den_;
        std::string frac;
        for (int i = 0; i < max_digits && rem != 0; ++i) {
            rem *= 10;
            frac.push_back(char('0' + rem / den_));
            rem %= den_;
        }
        if (rem != 0 && 2 * rem >= den_) {
            // round half-up with carry propagation
            int i = (int)frac.size() - 1;
            while (i >= 0 && frac[i] == '9') frac[i--] = '0';
            if (i >= 0) {
                ++frac[i];
            } else {
                ++whole;
            }
        }
        while (!frac.empty() && frac.back() == '0') frac.pop_back();
        std::string out = sign + std::to_string(whole);
        if (!frac.empty()) out += "." + frac;
        return out;
    }

    // "99.18%": percentage rounded half-up to two decimals.
    std::string percent_str() const {
        __int128 scaled = (__int128)num_ * 10000;   // basis points * den
        bool neg = scaled < 0;
        if (neg) scaled = -scaled;
        __int128 bp = (2 * scaled + den_) / (2 * (__int128)den_);
        long long whole = (long long)(bp / 100);
        int cents = (int)(bp % 100);
        std::string out = neg ? "-" : "";
        out += std::to_string(whole);
        out += '.';
        out += char('0' + cents / 10);
        out += char('0' + cents % 10);
        out += '%';
        return out;
    }

    double to_double() const { return (double)num_ / (double)den_; }

    // Accepts "p/q", decimal ("0.85"), or integer text.
    static std::optional<Rational> parse(std::string_view text) {
        if (text.empty()) return std::nullopt;
        size_t slash = text.find('/');
        if (slash != std::string_view::npos) {
            auto n = parse_int(text.substr(0, slash));
            auto d = parse_int(text.substr(slash + 1));
            if (!n || !d || *d == 0) return std::nullopt;
            return Rational(*n, *d);
        }
        size_t dot = text.find('.');
        if (dot == std::string_view::npos) {
            auto n = parse_int(text);
            if (!n) return std::nullopt;
            return Rational(*n);
        }
        std::string_view whole = text.substr(0, dot);
        std::string_view frac = text.substr(dot + 1);
        if (frac.empty() || frac.size() > 18) return std::nullopt;
        bool neg = !whole.empty() && whole.front() == '-';
        if (neg) whole.remove_prefix(1);
        auto w = whole.empty() ? std::optional<long long>(0) : parse_int(whole);
        auto f = parse_int(frac);
        if (!w || !f || *w < 0 || *f < 0) return std::nullopt;
        long long scale = 1;
        for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
        Rational r = Rational(*w) + Rational(*f, scale);
        if (neg) r = Rational(0) - r;
        return r;
    }

private:
    long long num_ = 0;
    long long den_ = 1;

    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
        if (num_ == 0) den_ = 1;
    }

    static Rational make_checked(__int128 n, __int128 d) {
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) {
            n /= g;
            d /= g;
        }
        if (n == 0) d = 1;
        constexpr __int128 lo = INT64_MIN, hi = INT64_MAX;
        if (n < lo || n > hi || d > hi) throw std::overflow_error("rational: overflow");
        Rational r;
        r.num_ = (long long)n;
        r.den_ = (long long)d;
        return r;
    }

    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        return a < 0 ? -a : a;
    }

    static std::optional<long long> parse_int(std::string_view s) {
        if (s.empty()) return std::nullopt;
        bool neg = s.front() == '-';
        if (neg) s.remove_prefix(1);
        if (s.empty() || s.size() > 18) return std::nullopt;
        long long v = 0;
        for (char c : s) {
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + (c - '0');
        }
        return neg ? -v : v;
    }
};

}  // namespace treemend
