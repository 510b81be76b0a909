#pragma once

#include <functional>
#include <optional>
#include <ostream>

#include "polard/factorizations.hpp"

namespace polard {

// ---------------------------------------------------------------------------
// Coupled iterations computing the unitary polar factor U and the Frechet
// derivative of the unitary-factor map in a direction E, simultaneously.
// ---------------------------------------------------------------------------

enum class Scheme { newton_square, newton_rect, newton_schulz };
enum class Scaling { none, one_inf, frobenius, one_inf_rect, frobenius_rect };

struct IterationConfig {
    Scheme scheme = Scheme::newton_square;
    Scaling scaling = Scaling::none;
    double delta = 1e-14;    // relative tolerance on the factor residual
    double epsilon = 1e-14;  // relative tolerance on the derivative residual
    int max_iter = 100;
    AdjointMode adjoint = AdjointMode::conjugate_transpose;
    // When set, each trace row also records relative errors and the exact
    // residual norms computed against this (U, dU) reference.
    std::optional<std::pair<Matrix, Matrix>> diagnostic_reference;
};

struct TraceRow {
    int k = 0;
    double alpha_norm = 0.0;
    double beta_norm = 0.0;
    double gamma_norm = 0.0;
    double mu = 1.0;
    std::optional<double> err_x;
    std::optional<double> err_e;
    std::optional<double> beta_exact_norm;
    std::optional<double> gamma_exact_norm;
};

struct CoupledResult {
    Matrix u;   // m x n, orthonormal columns at convergence
    Matrix du;  // m x n, derivative iterate
    Matrix h;   // n x n, Hermitian factor reported as sym(U* A)
    int iterations = 0;
    bool converged = false;
    std::vector<TraceRow> trace;
};

// ---------------------------------------------------------------------------
// Residuals driving termination: alpha approximates H^2 - I, beta and gamma
// approximate the commutator/anticommutator blocks of the sign iterates.
// ---------------------------------------------------------------------------

inline Matrix residual_alpha(const Matrix& x,
                             AdjointMode mode = AdjointMode::conjugate_transpose) {
    return adjoint_of(x, mode) * x - Matrix::identity(x.cols());
}

inline Matrix residual_beta(const Matrix& x, const Matrix& e,
                            AdjointMode mode = AdjointMode::conjugate_transpose) {
    const Matrix xtx = adjoint_of(x, mode) * x;
    const Matrix xte = adjoint_of(x, mode) * e;
    return (xtx * xte - xte * xtx) * 0.5;
}

inline Matrix residual_gamma(const Matrix& x, const Matrix& e,
                             AdjointMode mode = AdjointMode::conjugate_transpose) {
    const Matrix xte = adjoint_of(x, mode) * e;
    return xte + adjoint_of(e, mode) * x - residual_beta(x, e, mode);
}

inline bool should_terminate(const TraceRow& row, double x_norm, double e_norm,
                             const IterationConfig& config) {
    if (row.alpha_norm > config.delta * x_norm) return false;
    if (e_norm == 0.0) return true;  // vacuous derivative test
    return row.beta_norm + row.gamma_norm <= config.epsilon * e_norm;
}

// ---------------------------------------------------------------------------
// Scale factors
// ---------------------------------------------------------------------------

inline double scale_factor(const Matrix& x, Scaling scaling,
                           AdjointMode mode = AdjointMode::conjugate_transpose) {
    switch (scaling) {
        case Scaling::none:
            return 1.0;
        case Scaling::one_inf: {
            const Matrix xi = inverse(x);
            return std::pow(one_norm(xi) * infinity_norm(xi) /
                                (one_norm(x) * infinity_norm(x)),
                            0.25);
        }
        case Scaling::frobenius: {
            const Matrix xi = inverse(x);
            return std::sqrt(frobenius_norm(xi) / frobenius_norm(x));
        }
        case Scaling::one_inf_rect: {
            const Matrix g = adjoint_of(x, mode) * x;
            const Matrix gi = inverse(g);
            return std::pow(one_norm(gi) * infinity_norm(gi) /
                                (one_norm(g) * infinity_norm(g)),
                            0.125);
        }
        case Scaling::frobenius_rect: {
            const Matrix g = adjoint_of(x, mode) * x;
            const Matrix gi = inverse(g);
            return std::pow(frobenius_norm(gi) / frobenius_norm(g), 0.25);
        }
    }
    throw std::invalid_argument("scale_factor: unknown scaling");
}

// ---------------------------------------------------------------------------
// Single steps of the three shipped schemes
// ---------------------------------------------------------------------------

/// X' = (mu X + mu^-1 X^-*)/2,  E' = (mu E - mu^-1 X^-* E* X^-*)/2.
inline std::pair<Matrix, Matrix> newton_step_square(
    const Matrix& x, const Matrix& e, double mu,
    AdjointMode mode = AdjointMode::conjugate_transpose) {
    if (!x.is_square()) throw std::invalid_argument("newton_step_square: X must be square");
    const Matrix xia = adjoint_of(inverse(x), mode);
    const double mi = 1.0 / mu;
    Matrix xn = (x * mu + xia * mi) * 0.5;
    Matrix en = (e * mu - (xia * adjoint_of(e, mode) * xia) * mi) * 0.5;
    return {std::move(xn), std::move(en)};
}

/// Rectangular Newton step through the Gram matrix; with nu = mu X,
/// X' = nu (I + (nu* nu)^-1)/2 and E' the derivative of the same map.
inline std::pair<Matrix, Matrix> newton_step_rect(
    const Matrix& x, const Matrix& e, double mu,
    AdjointMode mode = AdjointMode::conjugate_transpose) {
    if (x.rows() < x.cols()) throw std::invalid_argument("newton_step_rect: requires rows >= cols");
    const std::size_t n = x.cols();
    const Matrix gram = adjoint_of(x, mode) * x;
    Matrix w;
    try {
        w = inverse(gram);
    } catch (const SingularMatrixError&) {
        throw SingularMatrixError("newton_step_rect: X*X numerically singular");
    }
    w *= 1.0 / (mu * mu);  // (nu* nu)^-1
    const Matrix iw = Matrix::identity(n) + w;
    const Matrix me = e * mu;
    const Matrix nu = x * mu;
    const Matrix cross = adjoint_of(me, mode) * nu + adjoint_of(nu, mode) * me;
    Matrix xn = (nu * iw) * 0.5;
    Matrix en = (me * iw - nu * w * cross * w) * 0.5;
    return {std::move(xn), std::move(en)};
}

/// X' = X (3I - X*X)/2,  E' = E (3I - X*X)/2 - X (E*X + X*E)/2. No inverse.
inline std::pair<Matrix, Matrix> newton_schulz_step(
    const Matrix& x, const Matrix& e,
    AdjointMode mode = AdjointMode::conjugate_transpose) {
    if (x.rows() < x.cols())
        throw std::invalid_argument("newton_schulz_step: requires rows >= cols");
    const std::size_t n = x.cols();
    const Matrix xtx = adjoint_of(x, mode) * x;
    const Matrix three = Matrix::identity(n) * 3.0 - xtx;
    const Matrix cross = adjoint_of(e, mode) * x + adjoint_of(x, mode) * e;
    Matrix xn = (x * three) * 0.5;
    Matrix en = (e * three) * 0.5 - (x * cross) * 0.5;
    return {std::move(xn), std::move(en)};
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

/// Step hook: (X, E, mu) -> (X', E'). Any map of the form g(X) = X h(X*X)
/// paired with its derivative fits here; the three shipped schemes are wired
/// through run_coupled.
using StepFn = std::function<std::pair<Matrix, Matrix>(const Matrix&, const Matrix&, double)>;

namespace detail {

inline void validate_config(const IterationConfig& c, const Matrix& a, const Matrix& e) {
    if (a.empty()) throw std::invalid_argument("run_coupled: empty input");
    if (e.rows() != a.rows() || e.cols() != a.cols())
        throw std::invalid_argument("run_coupled: A and E must have the same shape");
    if (a.rows() < a.cols())
        throw std::invalid_argument("run_coupled: requires rows >= cols");
    if (c.delta <= 0.0 || c.epsilon <= 0.0)
        throw std::invalid_argument("run_coupled: tolerances must be positive");
    if (c.max_iter <= 0) throw std::invalid_argument("run_coupled: max_iter must be positive");
    switch (c.scheme) {
        case Scheme::newton_square:
            if (!a.is_square())
                throw std::invalid_argument("run_coupled: newton_square needs a square input");
            if (c.scaling == Scaling::one_inf_rect || c.scaling == Scaling::frobenius_rect)
                throw std::invalid_argument("run_coupled: rect scalings pair with newton_rect");
            break;
        case Scheme::newton_rect:
            if (c.scaling == Scaling::one_inf || c.scaling == Scaling::frobenius)
                throw std::invalid_argument(
                    "run_coupled: one_inf/frobenius scalings pair with newton_square");
            break;
        case Scheme::newton_schulz:
            if (c.scaling != Scaling::none)
                throw std::invalid_argument("run_coupled: newton_schulz is unscaled");
            break;
    }
    if (c.diagnostic_reference) {
        const auto& [u, du] = *c.diagnostic_reference;
        if (u.rows() != a.rows() || u.cols() != a.cols() || du.rows() != a.rows() ||
            du.cols() != a.cols())
            throw std::invalid_argument("run_coupled: diagnostic reference shape mismatch");
    }
}

inline void fill_diagnostics(TraceRow& row, const Matrix& x, const Matrix& e,
                             const IterationConfig& config) {
    const auto& [u_ref, du_ref] = *config.diagnostic_reference;
    const double un = frobenius_norm(u_ref);
    const double kn = frobenius_norm(du_ref);
    row.err_x = frobenius_norm(x - u_ref) / (un > 0.0 ? un : 1.0);
    row.err_e = frobenius_norm(e - du_ref) / (kn > 0.0 ? kn : 1.0);
    // Exact residuals through the reference factor: H_k = sym(U* X_k),
    // Omega_k / S_k the skew and Hermitian parts of U* E_k.
    const Matrix ua = u_ref.adjoint();
    const Matrix hk = sym(ua * x);
    const Matrix ue = ua * e;
    const Matrix omega = skew(ue);
    const Matrix s = sym(ue);
    row.beta_exact_norm = frobenius_norm(hk * omega - omega * hk);
    row.gamma_exact_norm = frobenius_norm(hk * s + s * hk);
}

// A Newton-Schulz run whose singular values start outside (0, sqrt(3)) can
// settle on a sign-flipped orthonormal limit that still satisfies the
// residual criteria. The flip shows up as a strongly indefinite sym(U* A),
// which is Hermitian positive definite at the true polar factor.
inline bool spurious_schulz_limit(const Matrix& h) {
    const EigFactors e = eig_hermitian(h);
    const double lmax = std::max(std::abs(e.lambda.front()), std::abs(e.lambda.back()));
    return lmax > 0.0 && e.lambda.front() < -0.25 * lmax;
}

}  // namespace detail

inline CoupledResult run_coupled_custom(const Matrix& a, const Matrix& e0,
                                        const IterationConfig& config, const StepFn& step) {
    detail::validate_config(config, a, e0);
    Matrix x = a;
    Matrix e = e0;
    CoupledResult result;
    for (int k = 0;; ++k) {
        TraceRow row;
        row.k = k;
        row.mu = config.scaling == Scaling::none
                     ? 1.0
                     : scale_factor(x, config.scaling, config.adjoint);
        row.alpha_norm = frobenius_norm(residual_alpha(x, config.adjoint));
        const Matrix beta = residual_beta(x, e, config.adjoint);
        const Matrix xte = adjoint_of(x, config.adjoint) * e;
        const Matrix gamma = xte + adjoint_of(e, config.adjoint) * x - beta;
        row.beta_norm = frobenius_norm(beta);
        row.gamma_norm = frobenius_norm(gamma);
        if (config.diagnostic_reference) detail::fill_diagnostics(row, x, e, config);
        result.trace.push_back(row);
        if (should_terminate(row, frobenius_norm(x), frobenius_norm(e), config)) {
            result.converged = true;
            break;
        }
        if (k >= config.max_iter) {
            result.converged = false;
            break;
        }
        std::tie(x, e) = step(x, e, row.mu);
    }
    result.u = std::move(x);
    result.du = std::move(e);
    result.h = sym(adjoint_of(result.u, config.adjoint) * a, config.adjoint);
    result.iterations = result.trace.back().k;
    if (result.converged && config.scheme == Scheme::newton_schulz &&
        config.adjoint == AdjointMode::conjugate_transpose &&
        detail::spurious_schulz_limit(result.h))
        result.converged = false;
    return result;
}

/// Run the configured coupled iteration from X_0 = A, E_0 = E.
/// Non-convergence within max_iter is reported, never thrown.
inline CoupledResult run_coupled(const Matrix& a, const Matrix& e,
                                 const IterationConfig& config) {
    const AdjointMode mode = config.adjoint;
    StepFn step;
    switch (config.scheme) {
        case Scheme::newton_square:
            step = [mode](const Matrix& x, const Matrix& ek, double mu) {
                return newton_step_square(x, ek, mu, mode);
            };
            break;
        case Scheme::newton_rect:
            step = [mode](const Matrix& x, const Matrix& ek, double mu) {
                return newton_step_rect(x, ek, mu, mode);
            };
            break;
        case Scheme::newton_schulz:
            step = [mode](const Matrix& x, const Matrix& ek, double) {
                return newton_schulz_step(x, ek, mode);
            };
            break;
    }
    return run_coupled_custom(a, e, config, step);
}

/// Reduce a rectangular problem to the square case: A = QR, iterate on
/// (R, Q*E), then U = Q P(R) and the derivative picks up the perpendicular
/// term (I - QQ*) E H^-1.
inline CoupledResult polar_via_qr(const Matrix& a, const Matrix& e,
                                  const IterationConfig& config) {
    if (e.rows() != a.rows() || e.cols() != a.cols())
        throw std::invalid_argument("polar_via_qr: A and E must have the same shape");
    const QrFactors qr = qr_reduced(a);
    IterationConfig inner = config;
    if (inner.scheme == Scheme::newton_rect) inner.scheme = Scheme::newton_square;
    if (inner.scaling == Scaling::one_inf_rect) inner.scaling = Scaling::one_inf;
    if (inner.scaling == Scaling::frobenius_rect) inner.scaling = Scaling::frobenius;
    if (config.diagnostic_reference) {
        // The reduced problem converges to (Q* U, Q* dU): the perpendicular
        // part of the reference is invisible to the inner iteration.
        const auto& [u_ref, du_ref] = *config.diagnostic_reference;
        inner.diagnostic_reference =
            std::make_pair(qr.q.adjoint() * u_ref, qr.q.adjoint() * du_ref);
    }
    const Matrix qe = qr.q.adjoint() * e;
    CoupledResult res = run_coupled(qr.r, qe, inner);
    const Matrix hinv = inverse(res.h);
    const Matrix perp = e - qr.q * qe;
    CoupledResult out;
    out.u = qr.q * res.u;
    out.du = qr.q * res.du + perp * hinv;
    out.h = res.h;
    out.iterations = res.iterations;
    out.converged = res.converged;
    out.trace = std::move(res.trace);
    return out;
}

// ---------------------------------------------------------------------------
// Trace export
// ---------------------------------------------------------------------------

namespace detail {

inline std::string sci6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

inline std::string sci6_opt(const std::optional<double>& v) {
    return v ? sci6(*v) : std::string();
}

}  // namespace detail

/// CSV schema: k,alpha,beta,gamma,mu,err_x,err_e,beta_exact,gamma_exact with
/// 6 significant digits and empty fields for absent diagnostics.
inline void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
    out << "k,alpha,beta,gamma,mu,err_x,err_e,beta_exact,gamma_exact\n";
    for (const TraceRow& r : trace) {
        out << r.k << ',' << detail::sci6(r.alpha_norm) << ',' << detail::sci6(r.beta_norm)
            << ',' << detail::sci6(r.gamma_norm) << ',' << detail::sci6(r.mu) << ','
            << detail::sci6_opt(r.err_x) << ',' << detail::sci6_opt(r.err_e) << ','
            << detail::sci6_opt(r.beta_exact_norm) << ',' << detail::sci6_opt(r.gamma_exact_norm)
            << '\n';
    }
}

}  // namespace polard
