#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <string>

#include "clab/linalg.hpp"
#include "clab/rng.hpp"
#include "doctest.h"

using namespace clab;

TEST_CASE("matvec and matmul against hand-computed values") {
    Mat a(2, 3);
    a(0, 0) = 1;
    a(0, 1) = 2;
    a(0, 2) = 3;
    a(1, 0) = 4;
    a(1, 1) = 5;
    a(1, 2) = 6;
    const Vec x = {1.0, 0.0, -1.0};
    const Vec y = matvec(a, x);
    CHECK(y[0] == doctest::Approx(-2.0));
    CHECK(y[1] == doctest::Approx(-2.0));

    const Mat at = transpose(a);
    const Mat prod = matmul(a, at);  // 2x2 gram matrix
    CHECK(prod(0, 0) == doctest::Approx(14.0));
    CHECK(prod(0, 1) == doctest::Approx(32.0));
    CHECK(prod(1, 0) == doctest::Approx(32.0));
    CHECK(prod(1, 1) == doctest::Approx(77.0));
}

TEST_CASE("axpy, dot, norms") {
    Vec y = {1.0, 2.0};
    axpy(2.0, Vec{3.0, -1.0}, y);
    CHECK(y[0] == doctest::Approx(7.0));
    CHECK(y[1] == doctest::Approx(0.0));
    CHECK(dot(Vec{1, 2, 3}, Vec{4, 5, 6}) == doctest::Approx(32.0));
    CHECK(norm2(Vec{3.0, 4.0}) == doctest::Approx(5.0));
    CHECK(norm_inf(Vec{-7.0, 2.0}) == doctest::Approx(7.0));
}

TEST_CASE("jacobi eigendecomposition on a 2x2 with known spectrum") {
    Mat a(2, 2);
    a(0, 0) = 2;
    a(0, 1) = 1;
    a(1, 0) = 1;
    a(1, 1) = 2;
    const EigenSym eig = jacobi_eigensymmetric(a, true);
    REQUIRE(eig.eigenvalues.size() == 2);
    CHECK(eig.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
    // columns are orthonormal and reconstruct the matrix
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double recon = 0.0;
            for (int k = 0; k < 2; ++k)
                recon += eig.vectors(i, k) * eig.eigenvalues[static_cast<size_t>(k)] *
                         eig.vectors(j, k);
            CHECK(recon == doctest::Approx(a(i, j)).epsilon(1e-10));
        }
}

TEST_CASE("jacobi sorts a random symmetric spectrum descending") {
    DetRng rng(5, Stream::kInit);
    Mat a(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j <= i; ++j) {
            const double v = rng.normal();
            a(i, j) = v;
            a(j, i) = v;
        }
    const EigenSym eig = jacobi_eigensymmetric(a, false);
    for (size_t k = 1; k < eig.eigenvalues.size(); ++k)
        CHECK(eig.eigenvalues[k - 1] >= eig.eigenvalues[k]);
    double tr = 0.0;
    for (double v : eig.eigenvalues) tr += v;
    CHECK(tr == doctest::Approx(trace(a)).epsilon(1e-10));
}

TEST_CASE("spectral norm picks the largest magnitude eigenvalue") {
    Mat a = Mat::identity(3);
    a(0, 0) = 3.0;
    a(1, 1) = -5.0;
    a(2, 2) = 1.0;
    CHECK(spectral_norm_sym(a) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("trace_product equals trace of the product") {
    DetRng rng(9, Stream::kInit);
    Mat a(4, 4), b(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            a(i, j) = rng.normal();
            b(i, j) = rng.normal();
        }
    CHECK(trace_product(a, b) == doctest::Approx(trace(matmul(a, b))).epsilon(1e-12));
    CHECK(elementwise_contract(a, b) ==
          doctest::Approx(trace_product(transpose(a), b)).epsilon(1e-12));
}

TEST_CASE("fit_line recovers an exact line with zero stderr") {
    const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
    const std::vector<double> y = {1.0, 3.0, 5.0, 7.0};
    const LineFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.slope_stderr == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("fit_line stderr grows with scatter") {
    const std::vector<double> x = {0.0, 1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y = {0.0, 1.4, 1.6, 3.3, 3.7};
    const LineFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(0.94).epsilon(0.05));
    CHECK(f.slope_stderr > 0.0);
}

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1234567.875, 0.0}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("matrix symmetry helpers") {
    Mat a(2, 2);
    a(0, 0) = 1.0;
    a(0, 1) = 2.0;
    a(1, 0) = 2.0 + 1e-9;
    a(1, 1) = 4.0;
    CHECK(max_asymmetry(a) == doctest::Approx(1e-9).epsilon(1e-3));
    CHECK(max_abs_offdiag(a) == doctest::Approx(2.0 + 1e-9));
}
