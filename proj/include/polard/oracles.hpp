#pragma once

#include "polard/gallery.hpp"
#include "polard/polar_iteration.hpp"

namespace polard {

// ---------------------------------------------------------------------------
// Independent reference methods for the polar factor and its derivative,
// used to cross-check the coupled iterations.
// ---------------------------------------------------------------------------

enum class OracleMethod { svd_explicit, lyapunov, complex_step, central_difference };

struct FrechetOracleResult {
    Matrix u;
    Matrix du;
    OracleMethod method = OracleMethod::svd_explicit;
    double step_size = 0.0;      // finite-difference / complex step size
    bool near_singular = false;  // svd route: some sigma_i + sigma_j underflowed the guard
};

namespace detail {

// Square-case explicit solution: G_ij = (F_ij - conj(F_ji)) / (sigma_i + sigma_j).
inline FrechetOracleResult svd_frechet_square(const Matrix& a, const Matrix& e) {
    const SvdFactors f = svd(a);
    const std::size_t n = a.cols();
    FrechetOracleResult out;
    out.method = OracleMethod::svd_explicit;
    out.u = f.p * f.q.adjoint();
    const Matrix fm = f.p.adjoint() * e * f.q;
    Matrix g(n, n);
    const double guard = 1e-13 * (f.sigma.empty() ? 0.0 : f.sigma.front());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double denom = f.sigma[i] + f.sigma[j];
            if (denom < guard) out.near_singular = true;
            g(i, j) = (fm(i, j) - std::conj(fm(j, i))) / denom;
        }
    out.du = f.p * g * f.q.adjoint();
    return out;
}

}  // namespace detail

/// Ground-truth oracle. Rectangular inputs go through the QR reduction first,
/// recombining with the range-perpendicular term E_perp H^-1.
inline FrechetOracleResult svd_frechet(const Matrix& a, const Matrix& e) {
    if (e.rows() != a.rows() || e.cols() != a.cols())
        throw std::invalid_argument("svd_frechet: A and E must have the same shape");
    if (a.is_square()) return detail::svd_frechet_square(a, e);
    if (a.rows() < a.cols()) throw std::invalid_argument("svd_frechet: requires rows >= cols");
    const QrFactors qr = qr_reduced(a);
    const Matrix qe = qr.q.adjoint() * e;
    FrechetOracleResult inner = detail::svd_frechet_square(qr.r, qe);
    const Matrix h = sym(inner.u.adjoint() * qr.r);
    const Matrix hinv = inverse(h);
    FrechetOracleResult out;
    out.method = OracleMethod::svd_explicit;
    out.near_singular = inner.near_singular;
    out.u = qr.q * inner.u;
    out.du = qr.q * inner.du + (e - qr.q * qe) * hinv;
    return out;
}

/// Lyapunov route: H Y + Y H = U*E - E*U solved through eig_hermitian(H),
/// then dU = U Y + (I - UU*) E H^-1.
inline FrechetOracleResult lyapunov_frechet(const Matrix& a, const Matrix& e) {
    if (e.rows() != a.rows() || e.cols() != a.cols())
        throw std::invalid_argument("lyapunov_frechet: A and E must have the same shape");
    if (a.rows() < a.cols()) throw std::invalid_argument("lyapunov_frechet: requires rows >= cols");
    const Matrix h = sqrtm_hpd(sym(a.adjoint() * a));
    const Matrix hinv = inverse(h);
    const Matrix u = a * hinv;
    const Matrix ua = u.adjoint();
    const Matrix c = ua * e - e.adjoint() * u;
    const EigFactors eh = eig_hermitian(h);
    Matrix ct = eh.q.adjoint() * c * eh.q;
    const std::size_t n = h.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) ct(i, j) /= eh.lambda[i] + eh.lambda[j];
    const Matrix y = eh.q * ct * eh.q.adjoint();
    FrechetOracleResult out;
    out.method = OracleMethod::lyapunov;
    out.du = u * y + (e - u * (ua * e)) * hinv;
    out.u = u;
    return out;
}

/// Complex-step approximation Im(f(A + ihE))/h, valid for real A, E when the
/// iteration's adjoints are taken as plain transposes. Cancellation-free, so
/// h can sit far below sqrt(machine epsilon).
inline FrechetOracleResult complex_step_frechet(const Matrix& a, const Matrix& e,
                                                double h = 1e-100) {
    if (e.rows() != a.rows() || e.cols() != a.cols())
        throw std::invalid_argument("complex_step_frechet: A and E must have the same shape");
    if (!a.is_real() || !e.is_real())
        throw ComplexInputError("complex_step_frechet: inputs must be real");
    if (!a.is_square())
        throw std::invalid_argument("complex_step_frechet: requires a square input");
    if (h <= 0.0) throw std::invalid_argument("complex_step_frechet: h must be positive");

    IterationConfig config;
    config.scheme = Scheme::newton_square;
    config.scaling = Scaling::one_inf;
    config.adjoint = AdjointMode::plain_transpose;
    const Matrix zero(a.rows(), a.cols());

    Matrix shifted = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            shifted(i, j) = Complex(a(i, j).real(), h * e(i, j).real());
    const CoupledResult run_ih = run_coupled(shifted, zero, config);
    const CoupledResult run_re = run_coupled(a, zero, config);

    FrechetOracleResult out;
    out.method = OracleMethod::complex_step;
    out.step_size = h;
    out.u = run_re.u;
    out.du = (run_ih.u - run_re.u).imag_part() * (1.0 / h);
    return out;
}

/// Plain central difference (P(A + hE) - P(A - hE)) / 2h with P evaluated
/// through the SVD. Truncation-limited sanity oracle.
inline FrechetOracleResult central_difference_frechet(const Matrix& a, const Matrix& e,
                                                      double h = 6e-6) {
    if (e.rows() != a.rows() || e.cols() != a.cols())
        throw std::invalid_argument("central_difference_frechet: shape mismatch");
    if (a.rows() < a.cols())
        throw std::invalid_argument("central_difference_frechet: requires rows >= cols");
    if (h <= 0.0) throw std::invalid_argument("central_difference_frechet: h must be positive");
    const auto polar_u = [](const Matrix& m) {
        const SvdFactors f = svd(m);
        if (f.sigma.back() <= 2.3e-16 * f.sigma.front())
            throw RankDeficientError("central_difference_frechet: argument numerically singular");
        return f.p * f.q.adjoint();
    };
    FrechetOracleResult out;
    out.method = OracleMethod::central_difference;
    out.step_size = h;
    out.u = polar_u(a);
    out.du = (polar_u(a + e * h) - polar_u(a - e * h)) * (0.5 / h);
    return out;
}

// ---------------------------------------------------------------------------
// Newton iteration for the matrix sign function, and the block identities
// tying sign(.) to U* L(A, E).
// ---------------------------------------------------------------------------

/// Z <- (Z + Z^-1)/2 until the step is small; the limit squares to I.
inline Matrix sign_newton(const Matrix& z0, double tol = 1e-13, int max_iter = 100) {
    if (!z0.is_square()) throw std::invalid_argument("sign_newton: matrix must be square");
    Matrix z = z0;
    for (int k = 0; k < max_iter; ++k) {
        Matrix zn = (z + inverse(z)) * 0.5;
        const double step = frobenius_norm(zn - z);
        const double size = frobenius_norm(z);
        z = std::move(zn);
        if (step <= tol * size) return z;
    }
    throw NotConvergedError("sign_newton: no convergence within max_iter");
}

struct SignCheckReport {
    Matrix lhs;        // sign of the assembled block matrix
    Matrix rhs;        // identity-predicted right side
    double deviation;  // Frobenius distance
};

struct BlockSignChecks {
    SignCheckReport skew_variant;                  // sign([[H,W],[0,-H]]) vs [[I,U*dU],[0,-I]]
    SignCheckReport sym_variant;                   // sign([[H,S],[0,H]]) vs I
    std::optional<SignCheckReport> polar_variant;  // square only: sign([[0,A],[A*,0]])
};

namespace detail {

inline Matrix assemble_block2x2(const Matrix& a11, const Matrix& a12, const Matrix& a21,
                                const Matrix& a22) {
    const std::size_t n = a11.rows(), m = a11.cols();
    Matrix z(n + a21.rows(), m + a12.cols());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) z(i, j) = a11(i, j);
    for (std::size_t i = 0; i < a12.rows(); ++i)
        for (std::size_t j = 0; j < a12.cols(); ++j) z(i, j + m) = a12(i, j);
    for (std::size_t i = 0; i < a21.rows(); ++i)
        for (std::size_t j = 0; j < a21.cols(); ++j) z(i + n, j) = a21(i, j);
    for (std::size_t i = 0; i < a22.rows(); ++i)
        for (std::size_t j = 0; j < a22.cols(); ++j) z(i + n, j + m) = a22(i, j);
    return z;
}

}  // namespace detail

/// Check the two block-sign identities (and, for square A, the classic
/// polar/sign identity) against the SVD oracle's U and dU.
inline BlockSignChecks verify_block_sign(const Matrix& a, const Matrix& e) {
    const SvdFactors f = svd(a);
    const std::size_t n = a.cols();
    const Matrix u = f.p * f.q.adjoint();
    Matrix sig_scaled = f.q;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) sig_scaled(i, j) *= f.sigma[j];
    const Matrix h = sym(sig_scaled * f.q.adjoint());
    const Matrix du = svd_frechet(a, e).du;
    const Matrix ue = u.adjoint() * e;
    const Matrix omega = skew(ue);
    const Matrix s = sym(ue);
    const Matrix zero(n, n);
    const Matrix eye = Matrix::identity(n);

    BlockSignChecks checks;
    {
        const Matrix z = detail::assemble_block2x2(h, omega, zero, -h);
        SignCheckReport rep;
        rep.lhs = sign_newton(z);
        rep.rhs = detail::assemble_block2x2(eye, u.adjoint() * du, zero, -eye);
        rep.deviation = frobenius_norm(rep.lhs - rep.rhs);
        checks.skew_variant = std::move(rep);
    }
    {
        const Matrix z = detail::assemble_block2x2(h, s, zero, h);
        SignCheckReport rep;
        rep.lhs = sign_newton(z);
        rep.rhs = Matrix::identity(2 * n);
        rep.deviation = frobenius_norm(rep.lhs - rep.rhs);
        checks.sym_variant = std::move(rep);
    }
    if (a.is_square()) {
        const Matrix z = detail::assemble_block2x2(zero, a, a.adjoint(), zero);
        SignCheckReport rep;
        rep.lhs = sign_newton(z);
        rep.rhs = detail::assemble_block2x2(zero, u, u.adjoint(), zero);
        rep.deviation = frobenius_norm(rep.lhs - rep.rhs);
        checks.polar_variant = std::move(rep);
    }
    return checks;
}

// ---------------------------------------------------------------------------
// Condition numbers of the unitary-factor map
// ---------------------------------------------------------------------------

/// kappa(P, A) = 1 / sigma_min(A).
inline double condition_polar(const Matrix& a) {
    const SvdFactors f = svd(a);
    const double smin = f.sigma.back();
    if (smin <= 1e-300) throw RankDeficientError("condition_polar: rank deficient input");
    return 1.0 / smin;
}

/// Real square case, real perturbations: 2 / (sigma_n + sigma_{n-1}).
inline double condition_polar_real_square(const Matrix& a) {
    if (!a.is_square() || a.rows() < 2)
        throw std::invalid_argument("condition_polar_real_square: needs a square input, n >= 2");
    if (!a.is_real())
        throw ComplexInputError("condition_polar_real_square: input must be real");
    const SvdFactors f = svd(a);
    const std::size_t n = a.rows();
    const double denom = f.sigma[n - 1] + f.sigma[n - 2];
    if (denom <= 1e-300)
        throw RankDeficientError("condition_polar_real_square: rank deficient input");
    return 2.0 / denom;
}

/// Estimate sigma_min through the power method on (A*A)^-1: one LU
/// factorization, then repeated solves.
inline double power_sigma_min(const Matrix& a, int iters, std::uint64_t seed) {
    if (a.rows() < a.cols()) throw std::invalid_argument("power_sigma_min: requires rows >= cols");
    if (iters <= 0) throw std::invalid_argument("power_sigma_min: iters must be positive");
    const std::size_t n = a.cols();
    const Matrix gram = sym(a.adjoint() * a);
    const LuFactors lu = lu_factor(gram);
    Matrix x = random_gaussian(n, 1, seed, Field::real);
    double lambda = 0.0;
    for (int k = 0; k < iters; ++k) {
        const double nx = frobenius_norm(x);
        if (nx == 0.0) throw SingularMatrixError("power_sigma_min: zero iterate");
        x *= 1.0 / nx;
        Matrix y = lu.solve(x);
        Complex rayleigh(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) rayleigh += std::conj(x(i, 0)) * y(i, 0);
        lambda = rayleigh.real();
        x = std::move(y);
    }
    if (lambda <= 0.0) throw SingularMatrixError("power_sigma_min: nonpositive Rayleigh quotient");
    return 1.0 / std::sqrt(lambda);
}

// ---------------------------------------------------------------------------
// Second-order accuracy probe for the computable residuals
// ---------------------------------------------------------------------------

struct ResidualProbeResult {
    double beta_error;          // || beta - (H W - W H) ||_F
    double gamma_error;         // || gamma - (H S + S H) ||_F
    double identity_residual;   // || (beta + gamma) - (X*E + E*X) ||_F
    double x_norm;
    double e_norm;
};

/// Build X = U(I + t D), E = U(W + S) with seeded unit-norm Hermitian D and
/// skew/Hermitian W, S scaled by t, then compare the computable residuals
/// against the exact commutator forms. Both errors shrink as O(t^2).
inline ResidualProbeResult residual_accuracy_probe(std::uint64_t seed, double t) {
    if (t <= 0.0 || t > 0.5)
        throw std::invalid_argument("residual_accuracy_probe: t must lie in (0, 0.5]");
    constexpr std::size_t n = 8;
    SplitMix64 subseeds(seed);
    const std::uint64_t s0 = subseeds.next(), s1 = subseeds.next(), s2 = subseeds.next(),
                        s3 = subseeds.next();

    Matrix delta = sym(random_gaussian(n, n, s0, Field::complex));
    delta *= 1.0 / frobenius_norm(delta);
    const Matrix h = Matrix::identity(n) + delta * t;
    const Matrix omega = skew(random_gaussian(n, n, s1, Field::complex)) * t;
    const Matrix s = sym(random_gaussian(n, n, s2, Field::complex)) * t;
    const Matrix u = qr_reduced(random_gaussian(n, n, s3, Field::complex)).q;

    const Matrix x = u * h;
    const Matrix e = u * (omega + s);
    const Matrix beta = residual_beta(x, e);
    const Matrix gamma = residual_gamma(x, e);
    const Matrix beta_exact = h * omega - omega * h;
    const Matrix gamma_exact = h * s + s * h;

    ResidualProbeResult out;
    out.beta_error = frobenius_norm(beta - beta_exact);
    out.gamma_error = frobenius_norm(gamma - gamma_exact);
    out.identity_residual =
        frobenius_norm(beta + gamma - (x.adjoint() * e + e.adjoint() * x));
    out.x_norm = frobenius_norm(x);
    out.e_norm = frobenius_norm(e);
    return out;
}

}  // namespace polard
