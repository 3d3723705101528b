#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace conformal {

// Exact arithmetic scalar used by the idealised engine and the verifier.
// All idealised quantities (p-values, criterion values, optimality
// decisions) are exact when computed over Rational.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double x) { return x; }

namespace detail {

inline bool parse_bigint(std::string_view s, BigInt& out) {
    if (s.empty()) return false;
    size_t i = 0;
    bool neg = false;
    if (s[0] == '+' || s[0] == '-') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) return false;
    BigInt v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = neg ? -v : v;
    return true;
}

} // namespace detail

// Accepts "p/q", integers and plain decimals ("0.25", "-1.5").
inline bool parse_rational(std::string_view s, Rational& out) {
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        BigInt num, den;
        if (!detail::parse_bigint(s.substr(0, slash), num)) return false;
        if (!detail::parse_bigint(s.substr(slash + 1), den)) return false;
        if (den == 0) return false;
        out = Rational(num, den);
        return true;
    }
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
        std::string_view ip = s.substr(0, dot), fp = s.substr(dot + 1);
        BigInt num;
        if (ip.empty() || ip == "-" || ip == "+") {
            num = 0;
        } else if (!detail::parse_bigint(ip, num)) {
            return false;
        }
        bool neg = !ip.empty() && ip[0] == '-';
        BigInt scale = 1;
        for (char c : fp) {
            if (c < '0' || c > '9') return false;
            num = num * 10 + (neg ? -(c - '0') : (c - '0'));
            scale *= 10;
        }
        out = Rational(num, scale);
        return true;
    }
    BigInt num;
    if (!detail::parse_bigint(s, num)) return false;
    out = num;
    return true;
}

template <class T>
bool parse_scalar(std::string_view s, T& out);

template <>
inline bool parse_scalar<Rational>(std::string_view s, Rational& out) {
    return parse_rational(s, out);
}

template <>
inline bool parse_scalar<double>(std::string_view s, double& out) {
    // double mode accepts the same grammar, plus exponent notation
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        Rational r;
        if (!parse_rational(s, r)) return false;
        out = to_double(r);
        return true;
    }
    std::string buf(s);
    char* end = nullptr;
    out = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size() && !buf.empty();
}

// CSV form: rationals as "p/q" (or "p" when integral), doubles with 17
// significant digits so that parsing the output reproduces the bits.
inline std::string format_scalar(const Rational& r) {
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

inline std::string format_scalar(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace conformal
