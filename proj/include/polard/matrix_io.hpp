#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "polard/matrix.hpp"

namespace polard {

// Matrix text format, shared repo-wide:
//   line 1: "rows cols field"  with field in {real, complex}
//   then one line per row of whitespace-separated entries; complex entries
//   are written as re+imj with no interior spaces, e.g. 1.5-0.25j.
// Values carry 17 significant digits so round-trips are bit-faithful.

namespace detail {

inline bool parse_double(const std::string& tok, double& out) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end != begin + tok.size()) return false;
    return std::isfinite(out);
}

inline bool parse_complex_token(const std::string& tok, Complex& out) {
    if (tok.size() < 2 || tok.back() != 'j') return false;
    const std::string body = tok.substr(0, tok.size() - 1);
    // split at the sign of the imaginary part (not an exponent sign)
    std::size_t split = std::string::npos;
    for (std::size_t i = body.size(); i-- > 1;) {
        const char c = body[i];
        if ((c == '+' || c == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    if (split == std::string::npos) return false;
    double re = 0.0, im = 0.0;
    if (!parse_double(body.substr(0, split), re)) return false;
    if (!parse_double(body.substr(split), im)) return false;
    out = Complex(re, im);
    return true;
}

inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_complex(const Complex& v) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g%+.17gj", v.real(), v.imag());
    return buf;
}

}  // namespace detail

inline Matrix read_matrix(std::istream& in) {
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ParseError(1, "missing header line");
    ++lineno;
    std::istringstream head(line);
    long long rows = 0, cols = 0;
    std::string field;
    if (!(head >> rows >> cols >> field))
        throw ParseError(lineno, "header must be 'rows cols field'");
    std::string extra;
    if (head >> extra) throw ParseError(lineno, "trailing tokens after header");
    if (rows <= 0 || cols <= 0) throw ParseError(lineno, "rows and cols must be positive");
    const bool complex_field = field == "complex";
    if (!complex_field && field != "real")
        throw ParseError(lineno, "field must be 'real' or 'complex', got '" + field + "'");

    Matrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (long long i = 0; i < rows; ++i) {
        if (!std::getline(in, line))
            throw ParseError(lineno + 1, "unexpected end of input, expected row " +
                                             std::to_string(i + 1));
        ++lineno;
        std::istringstream row(line);
        std::string tok;
        for (long long j = 0; j < cols; ++j) {
            if (!(row >> tok))
                throw ParseError(lineno, "row has fewer than " + std::to_string(cols) +
                                             " entries");
            Complex v;
            if (complex_field) {
                if (!detail::parse_complex_token(tok, v))
                    throw ParseError(lineno, "bad complex entry '" + tok + "'");
            } else {
                double re = 0.0;
                if (!detail::parse_double(tok, re))
                    throw ParseError(lineno, "bad real entry '" + tok + "'");
                v = Complex(re, 0.0);
            }
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
        }
        if (row >> tok) throw ParseError(lineno, "row has more than " + std::to_string(cols) +
                                                     " entries");
    }
    return m;
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
    const bool complex_field = !m.is_real();
    out << m.rows() << ' ' << m.cols() << ' ' << (complex_field ? "complex" : "real") << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            out << (complex_field ? detail::format_complex(m(i, j))
                                  : detail::format_real(m(i, j).real()));
        }
        out << '\n';
    }
}

inline Matrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return read_matrix(in);
}

inline void write_matrix_file(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_matrix(out, m);
}

}  // namespace polard
