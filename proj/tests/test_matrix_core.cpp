#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "test_support.hpp"

using namespace polard;
using testutil::diag;
using testutil::rel_diff;

TEST_CASE("norms on simple matrices") {
    CHECK(norm(Matrix::identity(2), Norm::fro) == Catch::Approx(std::sqrt(2.0)));
    CHECK(norm(diag({4.0, 1.0}), Norm::one) == Catch::Approx(4.0));
    CHECK(norm(diag({4.0, 1.0}), Norm::inf) == Catch::Approx(4.0));

    const Matrix m = random_gaussian(6, 6, 42, Field::complex);
    const double two = norm(m, Norm::two);
    CHECK(std::abs(two - testutil::power_two_norm(m)) <= 1e-12 * two);
}

TEST_CASE("norm ordering two <= fro <= sqrt(min(m,n)) * two") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t m = 2 + seed % 7, n = 2 + (seed / 2) % 7;
        const Matrix a = random_gaussian(m, n, 300 + seed, Field::complex);
        const double two = norm(a, Norm::two);
        const double fro = norm(a, Norm::fro);
        CHECK(two <= fro * (1.0 + 1e-12));
        CHECK(fro <= std::sqrt(static_cast<double>(std::min(m, n))) * two * (1.0 + 1e-12));
    }
}

TEST_CASE("inverse") {
    CHECK(rel_diff(inverse(Matrix::identity(3)), Matrix::identity(3)) < 1e-15);
    CHECK(rel_diff(inverse(diag({2.0, 4.0})), diag({0.5, 0.25})) < 1e-15);

    const Matrix m = random_gaussian(8, 8, 7, Field::complex) + Matrix::identity(8) * 4.0;
    CHECK(frobenius_norm(m * inverse(m) - Matrix::identity(8)) <= 1e-12);

    Matrix singular(2, 2);
    singular(0, 0) = 1.0;
    singular(0, 1) = 2.0;
    singular(1, 0) = 0.5;
    singular(1, 1) = 1.0;
    CHECK_THROWS_AS(inverse(singular), SingularMatrixError);
}

TEST_CASE("determinant via LU") {
    CHECK(std::abs(determinant(diag({2.0, 3.0})) - Complex(6.0, 0.0)) < 1e-14);
    CHECK(std::abs(determinant(Matrix{{0.0, 1.0}, {1.0, 0.0}}) - Complex(-1.0, 0.0)) < 1e-14);
}

TEST_CASE("qr_reduced basics") {
    // orthonormal input reproduces itself with R = I
    const Matrix u = qr_reduced(random_gaussian(6, 6, 11, Field::complex)).q;
    const QrFactors f = qr_reduced(u);
    CHECK(rel_diff(f.q, u) < 1e-13);
    CHECK(rel_diff(f.r, Matrix::identity(6)) < 1e-13);

    const QrFactors g = qr_reduced(Matrix{{2.0}, {0.0}});
    CHECK(rel_diff(g.q, Matrix{{1.0}, {0.0}}) < 1e-15);
    CHECK(std::abs(g.r(0, 0) - Complex(2.0, 0.0)) < 1e-15);

    const Matrix a = random_gaussian(16, 5, 3, Field::complex);
    const QrFactors h = qr_reduced(a);
    CHECK(frobenius_norm(h.q * h.r - a) <= 1e-13 * frobenius_norm(a));
    CHECK(frobenius_norm(h.q.adjoint() * h.q - Matrix::identity(5)) <= 1e-13);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(h.r(i, i).real() > 0.0);
        CHECK(h.r(i, i).imag() == 0.0);
        for (std::size_t j = 0; j < i; ++j) CHECK(std::abs(h.r(i, j)) == 0.0);
    }

    Matrix deficient(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        deficient(i, 0) = 1.0;
        deficient(i, 1) = 2.0;  // second column parallel to the first
    }
    CHECK_THROWS_AS(qr_reduced(deficient), RankDeficientError);
}

TEST_CASE("eig_hermitian basics") {
    const EigFactors e = eig_hermitian(diag({3.0, 1.0}));
    REQUIRE(e.lambda.size() == 2);
    CHECK(e.lambda[0] == Catch::Approx(1.0));
    CHECK(e.lambda[1] == Catch::Approx(3.0));

    const EigFactors id = eig_hermitian(Matrix::identity(5));
    for (double l : id.lambda) CHECK(l == Catch::Approx(1.0));

    const Matrix m = testutil::random_hermitian(10, 21);
    const EigFactors f = eig_hermitian(m);
    Matrix lam(10, 10);
    for (std::size_t i = 0; i < 10; ++i) lam(i, i) = f.lambda[i];
    CHECK(frobenius_norm(f.q * lam * f.q.adjoint() - m) <= 1e-12 * frobenius_norm(m));
    CHECK(frobenius_norm(f.q.adjoint() * f.q - Matrix::identity(10)) <= 1e-12 * 10);
    for (std::size_t i = 1; i < 10; ++i) CHECK(f.lambda[i - 1] <= f.lambda[i]);

    CHECK_THROWS_AS(eig_hermitian(Matrix{{0.0, 1.0}, {0.0, 0.0}}), NotHermitianError);
}

TEST_CASE("svd basics") {
    const SvdFactors i4 = svd(Matrix::identity(4));
    for (double s : i4.sigma) CHECK(s == Catch::Approx(1.0));

    const SvdFactors d = svd(diag({3.0, -4.0}));
    CHECK(d.sigma[0] == Catch::Approx(4.0));
    CHECK(d.sigma[1] == Catch::Approx(3.0));
    Matrix sig(2, 2);
    sig(0, 0) = d.sigma[0];
    sig(1, 1) = d.sigma[1];
    CHECK(rel_diff(d.p * sig * d.q.adjoint(), diag({3.0, -4.0})) < 1e-14);

    // Frank matrix n=16: tiny smallest singular value resolved to within a
    // factor of two; this is where one-sided Jacobi earns its keep.
    const SvdFactors f = svd(frank(16));
    CHECK(f.sigma.back() > 3.5e-13 / 2.0);
    CHECK(f.sigma.back() < 3.5e-13 * 2.0);

    // rank deficiency reports near-zero sigmas, no throw
    Matrix low(3, 2);
    low(0, 0) = 1.0;
    low(0, 1) = 2.0;
    const SvdFactors r = svd(low);
    CHECK(r.sigma[1] <= 1e-14 * r.sigma[0]);
    CHECK(frobenius_norm(r.p.adjoint() * r.p - Matrix::identity(2)) <= 1e-12);
}

TEST_CASE("svd handles wide matrices") {
    const Matrix a = random_gaussian(4, 9, 5, Field::complex);
    const SvdFactors f = svd(a);
    REQUIRE(f.sigma.size() == 4);
    Matrix sig(4, 4);
    for (std::size_t i = 0; i < 4; ++i) sig(i, i) = f.sigma[i];
    CHECK(frobenius_norm(f.p * sig * f.q.adjoint() - a) <= 1e-12 * frobenius_norm(a));
}

TEST_CASE("sqrtm_hpd and invsqrtm_hpd") {
    CHECK(rel_diff(sqrtm_hpd(diag({4.0, 9.0})), diag({2.0, 3.0})) < 1e-14);
    CHECK(rel_diff(invsqrtm_hpd(Matrix::identity(3)), Matrix::identity(3)) < 1e-14);

    const Matrix m = testutil::random_hpd(8, 9);
    const Matrix s = sqrtm_hpd(m);
    CHECK(frobenius_norm(s * s - m) <= 1e-11 * frobenius_norm(m));
    const Matrix si = invsqrtm_hpd(m);
    CHECK(frobenius_norm(si * m * si - Matrix::identity(8)) <= 1e-11);

    CHECK_THROWS_AS(sqrtm_hpd(diag({1.0, -2.0})), NotPositiveDefiniteError);
    CHECK_THROWS_AS(invsqrtm_hpd(diag({1.0, 0.0})), NotPositiveDefiniteError);
}

TEST_CASE("factorization residuals over 200 seeded inputs") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const std::size_t n = 2 + seed % 15;
        const std::size_t m = n + (seed % 3);
        const Field field = seed % 2 ? Field::complex : Field::real;
        const Matrix a = random_gaussian(m, n, 1000 + seed, field);

        const SvdFactors sf = svd(a);
        Matrix sig(n, n);
        for (std::size_t i = 0; i < n; ++i) sig(i, i) = sf.sigma[i];
        REQUIRE(frobenius_norm(sf.p * sig * sf.q.adjoint() - a) <= 1e-12 * frobenius_norm(a));
        REQUIRE(frobenius_norm(sf.p.adjoint() * sf.p - Matrix::identity(n)) <=
                1e-12 * static_cast<double>(n));
        REQUIRE(frobenius_norm(sf.q.adjoint() * sf.q - Matrix::identity(n)) <=
                1e-12 * static_cast<double>(n));

        const QrFactors qf = qr_reduced(a);
        REQUIRE(frobenius_norm(qf.q * qf.r - a) <= 1e-12 * frobenius_norm(a));

        const Matrix h = testutil::random_hermitian(n, 5000 + seed);
        const EigFactors ef = eig_hermitian(h);
        Matrix lam(n, n);
        for (std::size_t i = 0; i < n; ++i) lam(i, i) = ef.lambda[i];
        REQUIRE(frobenius_norm(ef.q * lam * ef.q.adjoint() - h) <= 1e-12 * frobenius_norm(h));
    }
}

TEST_CASE("svd and eig agree on Hermitian positive definite inputs") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t n = 3 + seed % 6;
        const Matrix m = testutil::random_hpd(n, 400 + seed);
        const SvdFactors sf = svd(m);
        const EigFactors ef = eig_hermitian(m);
        for (std::size_t i = 0; i < n; ++i) {
            const double lam = ef.lambda[n - 1 - i];  // descending
            REQUIRE(std::abs(sf.sigma[i] - lam) <= 1e-11 * lam);
        }
    }
}

TEST_CASE("matrix text format round-trips at full precision") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const Field field = seed % 2 ? Field::complex : Field::real;
        const Matrix a = random_gaussian(5, 3, 60 + seed, field);
        std::ostringstream out;
        write_matrix(out, a);
        std::istringstream in(out.str());
        const Matrix b = read_matrix(in);
        REQUIRE(b.rows() == a.rows());
        REQUIRE(b.cols() == a.cols());
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) REQUIRE(b(i, j) == a(i, j));
    }
}

TEST_CASE("matrix text format flags errors with line numbers") {
    const auto expect_line = [](const std::string& text, int line) {
        std::istringstream in(text);
        try {
            read_matrix(in);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == line);
        }
    };
    expect_line("2 2 real\n1 2\n3\n", 3);          // short row
    expect_line("2 2 real\n1 2 9\n3 4\n", 2);      // long row
    expect_line("1 1 quaternion\n1\n", 1);         // bad field
    expect_line("1 2 real\n1 nan\n", 2);           // non-finite entry
    expect_line("1 1 complex\n5\n", 2);            // real token in complex field
    expect_line("0 2 real\n", 1);                  // non-positive dimension
}
