#pragma once

#include <cstdint>
#include <numbers>

#include "polard/factorizations.hpp"

namespace polard {

// ---------------------------------------------------------------------------
// Seeded Gaussian sampling: SplitMix64 + Box-Muller, fully deterministic.
// ---------------------------------------------------------------------------

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1].
    double next_unit() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = rng_.next_unit();
        const double u2 = rng_.next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    SplitMix64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

enum class Field { real, complex };

/// N(0,1) entries, row-major draw order; complex entries draw the real part
/// first, then the imaginary part, each independently N(0,1).
inline Matrix random_gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed,
                              Field field = Field::real) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("random_gaussian: empty shape");
    GaussianStream g(seed);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const double re = g.next();
            const double im = field == Field::complex ? g.next() : 0.0;
            m(i, j) = Complex(re, im);
        }
    return m;
}

// ---------------------------------------------------------------------------
// Test matrices
// ---------------------------------------------------------------------------

/// Moler matrix with parameter -1: entry (i,j) = min(i,j) - 2 off the
/// diagonal and i on it (1-based). Symmetric positive definite.
inline Matrix moler(std::size_t n) {
    if (n < 2) throw std::invalid_argument("moler: n must be >= 2");
    Matrix m(n, n);
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= n; ++j)
            m(i - 1, j - 1) = i == j ? static_cast<double>(i)
                                     : static_cast<double>(std::min(i, j)) - 2.0;
    return m;
}

/// Orthonormal eigenvector factor of moler(n), column signs fixed so the
/// largest-magnitude entry of each column is positive real, plus 1e-3 on
/// every entry. A nearly orthogonal matrix.
inline Matrix nearly_orthogonal(std::size_t n) {
    const EigFactors e = eig_hermitian(moler(n));
    Matrix q = e.q;
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t imax = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = std::abs(q(i, j));
            if (v > best) {
                best = v;
                imax = i;
            }
        }
        const Complex top = q(imax, j);
        if (std::abs(top) > 0.0) {
            const Complex phase = std::conj(top / std::abs(top));
            for (std::size_t i = 0; i < n; ++i) q(i, j) *= phase;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) q(i, j) += 1e-3;
    return q;
}

namespace detail {

// Pascal triangle in exact 64-bit integers, C(r, k) for r <= 40.
inline std::int64_t binom_coeff(int r, int k) {
    if (k < 0 || k > r) return 0;
    static const auto table = [] {
        std::vector<std::vector<std::int64_t>> t(41);
        for (int i = 0; i <= 40; ++i) {
            t[i].assign(i + 1, 1);
            for (int j = 1; j < i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
        }
        return t;
    }();
    return table[r][k];
}

}  // namespace detail

/// Order-(n-1) Krawtchouk matrix, built in exact integer arithmetic.
/// Satisfies B*B = 2^(n-1) I exactly.
inline Matrix binomial(std::size_t n) {
    if (n < 2 || n > 40) throw std::invalid_argument("binomial: n must be in [2, 40]");
    const int nn = static_cast<int>(n);
    Matrix b(n, n);
    constexpr double kMaxExact = 9007199254740992.0;  // 2^53
    for (int i = 1; i <= nn; ++i) {
        for (int j = 1; j <= nn; ++j) {
            std::int64_t sum = 0;
            const int lo = std::max(0, i - 1 - (nn - j));
            const int hi = std::min(i - 1, j - 1);
            for (int k = lo; k <= hi; ++k) {
                const std::int64_t term =
                    detail::binom_coeff(j - 1, k) * detail::binom_coeff(nn - j, i - 1 - k);
                sum += (k % 2 == 0) ? term : -term;
            }
            const double v = static_cast<double>(sum);
            if (std::abs(v) > kMaxExact)
                throw OverflowError("binomial: entry exceeds exact double range");
            b(i - 1, j - 1) = v;
        }
    }
    return b;
}

/// Frank matrix: upper Hessenberg, entry (i,j) = n+1-max(i,j) for j >= i-1.
inline Matrix frank(std::size_t n) {
    if (n < 2) throw std::invalid_argument("frank: n must be >= 2");
    Matrix f(n, n);
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= n; ++j)
            if (j + 1 >= i) f(i - 1, j - 1) = static_cast<double>(n + 1 - std::max(i, j));
    return f;
}

/// Frank matrix with the second smallest singular value clamped down to the
/// smallest, rebuilt from its SVD.
inline Matrix frank_modified(std::size_t n) {
    if (n < 3) throw std::invalid_argument("frank_modified: n must be >= 3");
    const SvdFactors f = svd(frank(n));
    std::vector<double> s = f.sigma;
    s[n - 2] = s[n - 1];
    Matrix scaled = f.p;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= s[j];
    return scaled * f.q.adjoint();
}

/// First ncols columns of binomial(n).
inline Matrix rect_binomial(std::size_t n, std::size_t ncols) {
    if (ncols == 0 || ncols > n) throw std::invalid_argument("rect_binomial: need 1 <= ncols <= n");
    return binomial(n).leading_columns(ncols);
}

// ---------------------------------------------------------------------------
// Named gallery dispatch, used by the CLI.
// ---------------------------------------------------------------------------

enum class GalleryName { moler_orth, binomial, frank, frank_modified, rect_binomial, random };

struct GallerySpec {
    GalleryName name = GalleryName::moler_orth;
    std::size_t n = 16;          // column count (matrix order for the square kinds)
    std::size_t m = 0;           // row count, rect/random only; m >= n
    std::uint64_t seed = 0;      // random only
    Field field = Field::real;   // random only
};

inline Matrix make_gallery(const GallerySpec& spec) {
    if (spec.m && spec.m < spec.n)
        throw std::invalid_argument("make_gallery: requires m >= n");
    switch (spec.name) {
        case GalleryName::moler_orth:
            return nearly_orthogonal(spec.n);
        case GalleryName::binomial:
            return binomial(spec.n);
        case GalleryName::frank:
            return frank(spec.n);
        case GalleryName::frank_modified:
            return frank_modified(spec.n);
        case GalleryName::rect_binomial:
            return rect_binomial(spec.m ? spec.m : spec.n, spec.n);
        case GalleryName::random:
            return random_gaussian(spec.m ? spec.m : spec.n, spec.n, spec.seed, spec.field);
    }
    throw std::invalid_argument("make_gallery: unknown name");
}

inline GalleryName gallery_name_from_string(const std::string& s) {
    if (s == "moler-orth") return GalleryName::moler_orth;
    if (s == "binomial") return GalleryName::binomial;
    if (s == "frank") return GalleryName::frank;
    if (s == "frank-modified") return GalleryName::frank_modified;
    if (s == "rect-binomial") return GalleryName::rect_binomial;
    if (s == "random") return GalleryName::random;
    throw std::invalid_argument("unknown gallery name '" + s + "'");
}

}  // namespace polard
