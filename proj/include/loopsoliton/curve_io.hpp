#ifndef LOOPSOLITON_CURVE_IO_HPP
#define LOOPSOLITON_CURVE_IO_HPP

#include <fstream>
#include <sstream>
#include <string>

#include "curve.hpp"
#include "errors.hpp"
#include "format.hpp"

namespace loopsoliton {

// Curve specification files are line oriented key/value text:
//
//   # comment
//   genus 2
//   lambda 0+0i,4+0i,0+0i,-5+0i,0+0i,1+0i
//
// `lambda` lists the 2g+2 coefficients of f in ascending order with the
// complex literal grammar a+bi; `genus` is cross-checked against it.
struct CurveSpecFile {
    HyperellipticCurve curve;
    std::string raw;
    std::uint64_t hash = 0;
};

inline CurveSpecFile parse_curve_spec_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    long genus = -1;
    cvec lambda;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t sp = t.find_first_of(" \t");
        if (sp == std::string::npos)
            throw ParseError("line " + std::to_string(line_no) + ": expected 'key value'");
        std::string key = t.substr(0, sp);
        std::string value = trim(t.substr(sp + 1));
        if (key == "genus") {
            try {
                genus = std::stol(value);
            } catch (...) {
                throw ParseError("line " + std::to_string(line_no) + ": bad genus");
            }
        } else if (key == "lambda") {
            for (const std::string& tok : split(value, ',')) {
                try {
                    lambda.push_back(parse_cx(tok));
                } catch (const ParseError& e) {
                    throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
                }
            }
        } else {
            throw ParseError("line " + std::to_string(line_no) + ": unknown key '" +
                             key + "'");
        }
    }
    if (lambda.empty()) throw ParseError("missing 'lambda' line");
    if (genus >= 0 && lambda.size() != 2 * std::size_t(genus) + 2)
        throw ParseError("genus/lambda length mismatch");
    CurveSpecFile out;
    out.curve = make_curve(lambda);
    out.raw = text;
    out.hash = fnv1a(text);
    return out;
}

inline CurveSpecFile load_curve_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open curve spec: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_curve_spec_text(ss.str());
}

inline std::string curve_spec_text(const HyperellipticCurve& c) {
    std::string s = "genus " + std::to_string(c.genus) + "\nlambda ";
    for (std::size_t k = 0; k < c.lambda.size(); ++k) {
        if (k) s += ",";
        s += fmt_cx(c.lambda[k]);
    }
    s += "\n";
    return s;
}

} // namespace loopsoliton

#endif
