#pragma once

#include <algorithm>
#include <numeric>

#include "polard/matrix.hpp"

namespace polard {

// ---------------------------------------------------------------------------
// LU with partial pivoting
// ---------------------------------------------------------------------------

struct LuFactors {
    Matrix lu;               // unit-lower L below the diagonal, U on and above
    std::vector<int> pivot;  // row swaps, pivot[k] = row swapped into position k
    int swap_parity = 1;

    std::size_t order() const { return lu.rows(); }

    /// Solve (P A) x = b column by column.
    Matrix solve(const Matrix& b) const {
        const std::size_t n = order();
        if (b.rows() != n) throw std::invalid_argument("LuFactors::solve: shape mismatch");
        Matrix x = b;
        for (std::size_t k = 0; k < n; ++k) {
            if (static_cast<std::size_t>(pivot[k]) != k)
                for (std::size_t j = 0; j < x.cols(); ++j)
                    std::swap(x(k, j), x(static_cast<std::size_t>(pivot[k]), j));
        }
        // forward substitution with unit lower triangle
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = k + 1; i < n; ++i) {
                const Complex l = lu(i, k);
                if (l == Complex(0.0, 0.0)) continue;
                for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= l * x(k, j);
            }
        // back substitution
        for (std::size_t k = n; k-- > 0;) {
            for (std::size_t j = 0; j < x.cols(); ++j) x(k, j) /= lu(k, k);
            for (std::size_t i = 0; i < k; ++i) {
                const Complex u = lu(i, k);
                if (u == Complex(0.0, 0.0)) continue;
                for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= u * x(k, j);
            }
        }
        return x;
    }
};

inline LuFactors lu_factor(const Matrix& m) {
    if (!m.is_square()) throw std::invalid_argument("lu_factor: matrix must be square");
    const std::size_t n = m.rows();
    LuFactors f;
    f.lu = m;
    f.pivot.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(f.lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(f.lu(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        f.pivot[k] = static_cast<int>(p);
        if (p != k) {
            f.swap_parity = -f.swap_parity;
            for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(p, j));
        }
        if (best < 1e-300) throw SingularMatrixError("lu_factor: pivot underflow at column " +
                                                     std::to_string(k));
        const Complex piv = f.lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex l = f.lu(i, k) / piv;
            f.lu(i, k) = l;
            if (l == Complex(0.0, 0.0)) continue;
            for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= l * f.lu(k, j);
        }
    }
    return f;
}

inline Matrix inverse(const Matrix& m) {
    return lu_factor(m).solve(Matrix::identity(m.rows()));
}

inline Complex determinant(const Matrix& m) {
    LuFactors f;
    try {
        f = lu_factor(m);
    } catch (const SingularMatrixError&) {
        return Complex(0.0, 0.0);
    }
    Complex det(static_cast<double>(f.swap_parity), 0.0);
    for (std::size_t k = 0; k < f.order(); ++k) det *= f.lu(k, k);
    return det;
}

// ---------------------------------------------------------------------------
// Reduced Householder QR, deterministic through the R_ii > 0 convention.
// ---------------------------------------------------------------------------

struct QrFactors {
    Matrix q;  // m x n, orthonormal columns
    Matrix r;  // n x n, upper triangular with positive real diagonal
};

inline QrFactors qr_reduced(const Matrix& a) {
    const std::size_t m = a.rows(), n = a.cols();
    if (m < n) throw std::invalid_argument("qr_reduced: requires rows >= cols");
    if (m == 0 || n == 0) throw std::invalid_argument("qr_reduced: empty matrix");
    const double scale = frobenius_norm(a);

    Matrix r = a;
    Matrix q = Matrix::identity(m);
    std::vector<Complex> v(m);
    for (std::size_t k = 0; k < n; ++k) {
        double alpha = 0.0;
        for (std::size_t i = k; i < m; ++i) alpha += std::norm(r(i, k));
        alpha = std::sqrt(alpha);
        if (alpha == 0.0) continue;  // zero column, caught by the rank test below
        const Complex x0 = r(k, k);
        const Complex phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Complex(1.0, 0.0);
        for (std::size_t i = k; i < m; ++i) v[i] = r(i, k);
        v[k] += phase * alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < m; ++i) vnorm2 += std::norm(v[i]);
        if (vnorm2 == 0.0) continue;
        const double beta = 2.0 / vnorm2;
        // R <- (I - beta v v*) R on the trailing block
        for (std::size_t j = k; j < n; ++j) {
            Complex dot(0.0, 0.0);
            for (std::size_t i = k; i < m; ++i) dot += std::conj(v[i]) * r(i, j);
            dot *= beta;
            for (std::size_t i = k; i < m; ++i) r(i, j) -= dot * v[i];
        }
        // Q <- Q (I - beta v v*)
        for (std::size_t i = 0; i < m; ++i) {
            Complex dot(0.0, 0.0);
            for (std::size_t l = k; l < m; ++l) dot += q(i, l) * v[l];
            dot *= beta;
            for (std::size_t l = k; l < m; ++l) q(i, l) -= dot * std::conj(v[l]);
        }
    }

    QrFactors f;
    f.q = Matrix(m, n);
    f.r = Matrix(n, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) f.q(i, j) = q(i, j);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) f.r(i, j) = r(i, j);

    for (std::size_t i = 0; i < n; ++i) {
        const Complex d = f.r(i, i);
        if (std::abs(d) <= 1e-14 * scale)
            throw RankDeficientError("qr_reduced: |R(" + std::to_string(i) + "," +
                                     std::to_string(i) + ")| below rank threshold");
        const Complex phase = d / std::abs(d);
        const Complex ph_conj = std::conj(phase);
        for (std::size_t j = i; j < n; ++j) f.r(i, j) *= ph_conj;
        f.r(i, i) = Complex(f.r(i, i).real(), 0.0);
        for (std::size_t l = 0; l < m; ++l) f.q(l, i) *= phase;
    }
    return f;
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
// ---------------------------------------------------------------------------

struct EigFactors {
    Matrix q;                    // n x n unitary, columns are eigenvectors
    std::vector<double> lambda;  // ascending
};

namespace detail {

// tan of the Jacobi angle for the 2x2 Hermitian block [[app, b],[conj(b), aqq]]
inline double jacobi_tangent(double app, double aqq, double babs) {
    const double tau = (aqq - app) / (2.0 * babs);
    if (tau == 0.0) return 1.0;
    const double t = 1.0 / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
    return tau > 0.0 ? t : -t;
}

inline double offdiagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

}  // namespace detail

inline EigFactors eig_hermitian(const Matrix& m) {
    if (!m.is_square()) throw std::invalid_argument("eig_hermitian: matrix must be square");
    const std::size_t n = m.rows();
    const double scale = frobenius_norm(m);
    if (frobenius_norm(m - m.adjoint()) > 1e-10 * scale)
        throw NotHermitianError("eig_hermitian: input is not Hermitian to working accuracy");

    Matrix a = sym(m);  // symmetrize away roundoff-level asymmetry
    Matrix q = Matrix::identity(n);
    if (scale == 0.0) return {q, std::vector<double>(n, 0.0)};

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (detail::offdiagonal_norm(a) <= 1e-14 * scale) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t r = p + 1; r < n; ++r) {
                const Complex apq = a(p, r);
                const double babs = std::abs(apq);
                if (babs <= 1e-300) continue;
                const Complex phase = apq / babs;
                const double t = detail::jacobi_tangent(a(p, p).real(), a(r, r).real(), babs);
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const Complex sp = s * phase;
                const Complex spc = std::conj(sp);
                // A <- J* A J with J = [[c, s phase], [-s conj(phase), c]] in (p, r)
                for (std::size_t i = 0; i < n; ++i) {
                    const Complex aip = a(i, p), air = a(i, r);
                    a(i, p) = c * aip - spc * air;
                    a(i, r) = sp * aip + c * air;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const Complex apj = a(p, j), arj = a(r, j);
                    a(p, j) = c * apj - sp * arj;
                    a(r, j) = spc * apj + c * arj;
                }
                a(p, r) = 0.0;
                a(r, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(r, r) = a(r, r).real();
                for (std::size_t i = 0; i < n; ++i) {
                    const Complex qip = q(i, p), qir = q(i, r);
                    q(i, p) = c * qip - spc * qir;
                    q(i, r) = sp * qip + c * qir;
                }
            }
        }
    }

    std::vector<double> lambda(n);
    for (std::size_t i = 0; i < n; ++i) lambda[i] = a(i, i).real();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return lambda[x] < lambda[y]; });

    EigFactors f;
    f.q = Matrix(n, n);
    f.lambda.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        f.lambda[j] = lambda[order[j]];
        for (std::size_t i = 0; i < n; ++i) f.q(i, j) = q(i, order[j]);
    }
    return f;
}

// ---------------------------------------------------------------------------
// SVD by one-sided Jacobi. Small singular values come out with high relative
// accuracy, which the ill-conditioned test matrices depend on.
// ---------------------------------------------------------------------------

struct SvdFactors {
    Matrix p;                   // m x r, orthonormal columns
    std::vector<double> sigma;  // descending, non-negative
    Matrix q;                   // n x r, orthonormal columns
};

namespace detail {

// One-sided Jacobi on a tall-or-square matrix; returns (w, v) with a = w v*,
// w having orthogonal columns whose norms are the singular values.
inline void onesided_jacobi(Matrix& w, Matrix& v) {
    const std::size_t m = w.rows(), n = w.cols();
    v = Matrix::identity(n);
    constexpr double kTol = 1e-15;
    constexpr int kMaxSweeps = 60;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t r = p + 1; r < n; ++r) {
                double app = 0.0, aqq = 0.0;
                Complex apq(0.0, 0.0);
                for (std::size_t i = 0; i < m; ++i) {
                    app += std::norm(w(i, p));
                    aqq += std::norm(w(i, r));
                    apq += std::conj(w(i, p)) * w(i, r);
                }
                const double babs = std::abs(apq);
                if (app == 0.0 || aqq == 0.0) continue;
                if (babs <= kTol * std::sqrt(app * aqq)) continue;
                rotated = true;
                const Complex phase = apq / babs;
                const double t = jacobi_tangent(app, aqq, babs);
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const Complex sp = s * phase;
                const Complex spc = std::conj(sp);
                for (std::size_t i = 0; i < m; ++i) {
                    const Complex wp = w(i, p), wq = w(i, r);
                    w(i, p) = c * wp - spc * wq;
                    w(i, r) = sp * wp + c * wq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const Complex vp = v(i, p), vq = v(i, r);
                    v(i, p) = c * vp - spc * vq;
                    v(i, r) = sp * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }
}

// Replace near-null columns of p by unit vectors orthogonal to the others.
inline void complete_null_columns(Matrix& p, const std::vector<double>& sigma) {
    const std::size_t m = p.rows(), n = p.cols();
    for (std::size_t j = 0; j < n; ++j) {
        if (sigma[j] > 1e-300) continue;
        for (std::size_t trial = 0; trial < m; ++trial) {
            std::vector<Complex> cand(m, Complex(0.0, 0.0));
            cand[trial] = 1.0;
            for (std::size_t l = 0; l < n; ++l) {
                if (l == j) continue;
                Complex dot(0.0, 0.0);
                for (std::size_t i = 0; i < m; ++i) dot += std::conj(p(i, l)) * cand[i];
                for (std::size_t i = 0; i < m; ++i) cand[i] -= dot * p(i, l);
            }
            double nrm = 0.0;
            for (const auto& cv : cand) nrm += std::norm(cv);
            nrm = std::sqrt(nrm);
            if (nrm > 0.5) {
                for (std::size_t i = 0; i < m; ++i) p(i, j) = cand[i] / nrm;
                break;
            }
        }
    }
}

}  // namespace detail

inline SvdFactors svd(const Matrix& a) {
    if (a.empty()) throw std::invalid_argument("svd: empty matrix");
    const bool wide = a.rows() < a.cols();
    Matrix w = wide ? a.adjoint() : a;
    const std::size_t m = w.rows(), n = w.cols();
    Matrix v;
    detail::onesided_jacobi(w, v);

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += std::norm(w(i, j));
        sigma[j] = std::sqrt(s);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    Matrix p(m, n), q(n, n);
    std::vector<double> s_sorted(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        s_sorted[j] = sigma[src];
        const double inv = sigma[src] > 1e-300 ? 1.0 / sigma[src] : 0.0;
        for (std::size_t i = 0; i < m; ++i) p(i, j) = w(i, src) * inv;
        for (std::size_t i = 0; i < n; ++i) q(i, j) = v(i, src);
    }
    detail::complete_null_columns(p, s_sorted);

    SvdFactors f;
    if (wide) {
        f.p = q;
        f.q = p;
    } else {
        f.p = p;
        f.q = q;
    }
    f.sigma = std::move(s_sorted);
    return f;
}

// ---------------------------------------------------------------------------
// Hermitian positive definite square roots via the eigendecomposition.
// ---------------------------------------------------------------------------

namespace detail {

inline Matrix hpd_function(const Matrix& m, double (*fn)(double), const char* name) {
    const EigFactors e = eig_hermitian(m);
    const double lmax = e.lambda.empty() ? 0.0 : e.lambda.back();
    if (lmax <= 0.0) throw NotPositiveDefiniteError(std::string(name) + ": not positive definite");
    for (double l : e.lambda)
        if (l <= 1e-14 * lmax)
            throw NotPositiveDefiniteError(std::string(name) + ": eigenvalue below PD threshold");
    const std::size_t n = m.rows();
    Matrix scaled = e.q;
    for (std::size_t j = 0; j < n; ++j) {
        const double f = fn(e.lambda[j]);
        for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= f;
    }
    return sym(scaled * e.q.adjoint());
}

inline double sqrt_fn(double x) { return std::sqrt(x); }
inline double inv_sqrt_fn(double x) { return 1.0 / std::sqrt(x); }

}  // namespace detail

inline Matrix sqrtm_hpd(const Matrix& m) {
    return detail::hpd_function(m, detail::sqrt_fn, "sqrtm_hpd");
}

inline Matrix invsqrtm_hpd(const Matrix& m) {
    return detail::hpd_function(m, detail::inv_sqrt_fn, "invsqrtm_hpd");
}

// ---------------------------------------------------------------------------
// Unified norm entry point (two-norm goes through the SVD).
// ---------------------------------------------------------------------------

enum class Norm { one, inf, fro, two };

inline double norm(const Matrix& m, Norm kind) {
    if (m.empty()) throw std::invalid_argument("norm: empty matrix");
    switch (kind) {
        case Norm::one:
            return one_norm(m);
        case Norm::inf:
            return infinity_norm(m);
        case Norm::fro:
            return frobenius_norm(m);
        case Norm::two:
            return svd(m).sigma.front();
    }
    throw std::invalid_argument("norm: unknown kind");
}

}  // namespace polard
