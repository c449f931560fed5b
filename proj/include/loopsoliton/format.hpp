#ifndef LOOPSOLITON_FORMAT_HPP
#define LOOPSOLITON_FORMAT_HPP

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "common.hpp"
#include "errors.hpp"

namespace loopsoliton {

// 17 significant digits round-trips a double exactly.
inline std::string fmt_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// Complex numbers in text I/O as `a+bi`, e.g. "1.5-0.25i".
inline std::string fmt_cx(const cx& z) {
    std::string s = fmt_real(z.real());
    s += (z.imag() < 0 || (z.imag() == 0 && std::signbit(z.imag()))) ? "" : "+";
    s += fmt_real(z.imag());
    s += "i";
    return s;
}

// Parses "a+bi", "a-bi", "a" (pure real), "bi" (pure imaginary).
inline cx parse_cx(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw ParseError("empty complex literal");

    bool has_i = s.back() == 'i' || s.back() == 'I';
    std::string body = has_i ? s.substr(0, s.size() - 1) : s;
    if (!has_i) {
        char* end = nullptr;
        double re = std::strtod(body.c_str(), &end);
        if (end != body.c_str() + body.size())
            throw ParseError("bad complex literal: " + text);
        return cx(re, 0.0);
    }
    // Split body at the last '+'/'-' that is not part of an exponent and
    // not the leading sign.
    std::size_t split = std::string::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        char c = body[k];
        if ((c == '+' || c == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    if (split == std::string::npos) {
        // Pure imaginary: "bi", "i", "-i".
        if (body.empty() || body == "+") return cx(0.0, 1.0);
        if (body == "-") return cx(0.0, -1.0);
        char* end = nullptr;
        double im = std::strtod(body.c_str(), &end);
        if (end != body.c_str() + body.size())
            throw ParseError("bad complex literal: " + text);
        return cx(0.0, im);
    }
    std::string re_s = body.substr(0, split);
    std::string im_s = body.substr(split);
    if (im_s == "+") im_s = "1";
    if (im_s == "-") im_s = "-1";
    char* end = nullptr;
    double re = std::strtod(re_s.c_str(), &end);
    if (end != re_s.c_str() + re_s.size())
        throw ParseError("bad complex literal: " + text);
    double im = std::strtod(im_s.c_str(), &end);
    if (end != im_s.c_str() + im_s.size())
        throw ParseError("bad complex literal: " + text);
    return cx(re, im);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// FNV-1a, used to stamp output files with the curve-spec hash.
inline std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace loopsoliton

#endif
