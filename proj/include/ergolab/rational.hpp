#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <stdexcept>

#include "ergolab/errors.hpp"

namespace ergolab {

// Exact rational arithmetic on 128-bit integers. Wide enough for every
// exact computation in scope (tower DP with k*n <= 20, quotient weights);
// overflow throws rather than wrapping.
class Rational {
public:
    using Int = __int128;

    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}
    Rational(long long n, long long d) : num_(n), den_(d) { normalize(); }

    static Rational from_int128(Int n, Int d) {
        Rational r;
        r.num_ = n;
        r.den_ = d;
        r.normalize();
        return r;
    }

    Int num() const { return num_; }
    Int den() const { return den_; }

    double to_double() const {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }
    long double to_long_double() const {
        return static_cast<long double>(num_) / static_cast<long double>(den_);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return from_int128(checked_add(checked_mul(a.num_, b.den_), checked_mul(b.num_, a.den_)),
                           checked_mul(a.den_, b.den_));
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return from_int128(checked_sub(checked_mul(a.num_, b.den_), checked_mul(b.num_, a.den_)),
                           checked_mul(a.den_, b.den_));
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_int128(checked_mul(a.num_, b.num_), checked_mul(a.den_, b.den_));
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
        return from_int128(checked_mul(a.num_, b.den_), checked_mul(a.den_, b.num_));
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return checked_mul(a.num_, b.den_) < checked_mul(b.num_, a.den_);
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return b <= a; }

    Rational pow(int e) const {
        Rational r(1);
        for (int i = 0; i < e; ++i) r = r * *this;
        return r;
    }

    std::string to_string() const {
        if (den_ == 1) return int128_str(num_);
        return int128_str(num_) + "/" + int128_str(den_);
    }

    // Parses "a/b" or "a".
    static Rational parse(const std::string& s) {
        auto slash = s.find('/');
        try {
            if (slash == std::string::npos) return Rational(std::stoll(s));
            return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
        } catch (const std::exception&) {
            throw ConfigError("invalid rational literal: " + s);
        }
    }

    static std::string int128_str(Int v) {
        if (v == 0) return "0";
        bool neg = v < 0;
        unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1
                                  : static_cast<unsigned __int128>(v);
        std::string out;
        while (u > 0) {
            out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
            u /= 10;
        }
        return neg ? "-" + out : out;
    }

private:
    static Int checked_mul(Int a, Int b) {
        if (a == 0 || b == 0) return 0;
        Int r = a * b;
        if (r / b != a) throw BudgetExceeded("Rational: 128-bit overflow in multiply");
        return r;
    }
    static Int checked_add(Int a, Int b) {
        Int r = a + b;
        if ((b > 0 && r < a) || (b < 0 && r > a))
            throw BudgetExceeded("Rational: 128-bit overflow in add");
        return r;
    }
    static Int checked_sub(Int a, Int b) { return checked_add(a, -b); }

    static Int gcd128(Int a, Int b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            Int t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    void normalize() {
        if (den_ == 0) throw std::domain_error("Rational: zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        Int g = gcd128(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    Int num_;
    Int den_;
};

}  // namespace ergolab
