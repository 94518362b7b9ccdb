#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace clab {

using Vec = std::vector<double>;

// Dense row-major matrix. Small and explicit on purpose: every reduction in
// this project must run in a fixed index order so reruns are bit-identical.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Mat identity(int n);
    bool square() const { return rows == cols; }
};

Vec operator+(const Vec& x, const Vec& y);
Vec operator-(const Vec& x, const Vec& y);
Vec operator*(double s, const Vec& x);
void axpy(double s, const Vec& x, Vec& y);  // y += s*x

double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double norm_inf(const Vec& x);

Vec matvec(const Mat& m, const Vec& x);
Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& m);
Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator*(double s, const Mat& m);

double trace(const Mat& m);
double frobenius_norm(const Mat& m);
double max_abs_offdiag(const Mat& m);
double max_asymmetry(const Mat& m);  // max |m_ij - m_ji|

// Sum_{ij} a_ij * b_ij in row-major order.
double elementwise_contract(const Mat& a, const Mat& b);

// Tr(A*B) for square matrices of equal size, accumulated in row-major order.
double trace_product(const Mat& a, const Mat& b);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Eigenvalues are returned in descending order; vectors[:, k] (column k of
// `vectors`) is the unit eigenvector for eigenvalues[k] when requested.
struct EigenSym {
    Vec eigenvalues;
    Mat vectors;  // empty when not requested
};

EigenSym jacobi_eigensymmetric(Mat m, bool want_vectors, double tol = 1e-10);

// Largest eigenvalue of a symmetric matrix (descending-sorted Jacobi front).
double spectral_norm_sym(const Mat& m);

// Ordinary least squares fit y = intercept + slope*x with the slope's
// standard error from residual variance. Requires >= 2 points.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

std::string format_double(double v);  // shortest round-trip decimal form

}  // namespace clab
