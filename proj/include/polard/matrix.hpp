#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polard {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

struct SingularMatrixError : std::runtime_error {
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

struct RankDeficientError : std::runtime_error {
    explicit RankDeficientError(const std::string& what) : std::runtime_error(what) {}
};

struct NotHermitianError : std::runtime_error {
    explicit NotHermitianError(const std::string& what) : std::runtime_error(what) {}
};

struct NotPositiveDefiniteError : std::runtime_error {
    explicit NotPositiveDefiniteError(const std::string& what) : std::runtime_error(what) {}
};

struct NotConvergedError : std::runtime_error {
    explicit NotConvergedError(const std::string& what) : std::runtime_error(what) {}
};

struct ComplexInputError : std::runtime_error {
    explicit ComplexInputError(const std::string& what) : std::runtime_error(what) {}
};

struct OverflowError : std::runtime_error {
    explicit OverflowError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by the matrix text reader; `line` is 1-based.
struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what), line(line_) {}
};

// ---------------------------------------------------------------------------
// Dense complex matrix, row-major, sized for desk-scale problems.
// ---------------------------------------------------------------------------

class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, Complex(0.0, 0.0)) {}

    /// Row-wise literal, e.g. Matrix{{1, 2}, {3, 4}}. Entries must be finite.
    Matrix(std::initializer_list<std::initializer_list<Complex>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw std::invalid_argument("Matrix literal: ragged rows");
            for (const Complex& v : r) {
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                    throw std::invalid_argument("Matrix literal: non-finite entry");
                data_.push_back(v);
            }
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix I(n, n);
        for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }
    bool is_square() const { return rows_ == cols_; }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<Complex>& data() const { return data_; }
    std::vector<Complex>& data() { return data_; }

    Matrix& operator+=(const Matrix& o) {
        check_same_shape(o, "+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    Matrix& operator-=(const Matrix& o) {
        check_same_shape(o, "-=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }

    Matrix& operator*=(Complex s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    /// Conjugate transpose.
    Matrix adjoint() const {
        Matrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
        return out;
    }

    /// Plain transpose, no conjugation.
    Matrix transpose() const {
        Matrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
        return out;
    }

    Matrix conjugate() const {
        Matrix out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = std::conj(data_[i]);
        return out;
    }

    Matrix real_part() const {
        Matrix out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i].real();
        return out;
    }

    Matrix imag_part() const {
        Matrix out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = data_[i].imag();
        return out;
    }

    bool is_real() const {
        for (const auto& v : data_)
            if (v.imag() != 0.0) return false;
        return true;
    }

    bool all_finite() const {
        for (const auto& v : data_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    /// Columns [0, ncols) as a new matrix.
    Matrix leading_columns(std::size_t ncols) const {
        if (ncols > cols_) throw std::invalid_argument("leading_columns: too many columns");
        Matrix out(rows_, ncols);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < ncols; ++j) out(i, j) = (*this)(i, j);
        return out;
    }

private:
    void check_same_shape(const Matrix& o, const char* op) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument(std::string("Matrix ") + op + ": shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator*(Matrix a, Complex s) { return a *= s; }
inline Matrix operator*(Complex s, Matrix a) { return a *= s; }
inline Matrix operator*(Matrix a, double s) { return a *= Complex(s, 0.0); }
inline Matrix operator*(double s, Matrix a) { return a *= Complex(s, 0.0); }

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("Matrix *: inner dimension mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex(0.0, 0.0)) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

inline Matrix operator-(const Matrix& a) {
    Matrix out = a;
    return out *= Complex(-1.0, 0.0);
}

// ---------------------------------------------------------------------------
// Adjoint mode: the complex-step method evaluates the iteration with plain
// transposes instead of conjugate transposes.
// ---------------------------------------------------------------------------

enum class AdjointMode { conjugate_transpose, plain_transpose };

inline Matrix adjoint_of(const Matrix& m, AdjointMode mode) {
    return mode == AdjointMode::conjugate_transpose ? m.adjoint() : m.transpose();
}

/// Hermitian part (B + B*)/2 in the given adjoint mode.
inline Matrix sym(const Matrix& b, AdjointMode mode = AdjointMode::conjugate_transpose) {
    if (!b.is_square()) throw std::invalid_argument("sym: matrix must be square");
    return (b + adjoint_of(b, mode)) * 0.5;
}

/// Skew-Hermitian part (B - B*)/2 in the given adjoint mode.
inline Matrix skew(const Matrix& b, AdjointMode mode = AdjointMode::conjugate_transpose) {
    if (!b.is_square()) throw std::invalid_argument("skew: matrix must be square");
    return (b - adjoint_of(b, mode)) * 0.5;
}

// ---------------------------------------------------------------------------
// Elementary norms. The spectral norm lives in factorizations.hpp (needs svd).
// ---------------------------------------------------------------------------

inline double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (const auto& v : m.data()) s += std::norm(v);
    return std::sqrt(s);
}

/// Max absolute column sum.
inline double one_norm(const Matrix& m) {
    double best = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
        best = std::max(best, s);
    }
    return best;
}

/// Max absolute row sum.
inline double infinity_norm(const Matrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += std::abs(m(i, j));
        best = std::max(best, s);
    }
    return best;
}

inline double max_abs(const Matrix& m) {
    double best = 0.0;
    for (const auto& v : m.data()) best = std::max(best, std::abs(v));
    return best;
}

}  // namespace polard
