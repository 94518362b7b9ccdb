#include "clab/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace clab {

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vec operator+(const Vec& x, const Vec& y) {
    assert(x.size() == y.size());
    Vec out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
    return out;
}

Vec operator-(const Vec& x, const Vec& y) {
    assert(x.size() == y.size());
    Vec out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
    return out;
}

Vec operator*(double s, const Vec& x) {
    Vec out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = s * x[i];
    return out;
}

void axpy(double s, const Vec& x, Vec& y) {
    assert(x.size() == y.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

double dot(const Vec& x, const Vec& y) {
    assert(x.size() == y.size());
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double norm_inf(const Vec& x) {
    double acc = 0.0;
    for (double v : x) acc = std::max(acc, std::fabs(v));
    return acc;
}

Vec matvec(const Mat& m, const Vec& x) {
    assert(static_cast<size_t>(m.cols) == x.size());
    Vec out(static_cast<size_t>(m.rows), 0.0);
    for (int i = 0; i < m.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m.cols; ++j) acc += m(i, j) * x[j];
        out[i] = acc;
    }
    return out;
}

Mat matmul(const Mat& a, const Mat& b) {
    assert(a.cols == b.rows);
    Mat out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < b.cols; ++j) {
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += a(i, k) * b(k, j);
            out(i, j) = acc;
        }
    return out;
}

Mat transpose(const Mat& m) {
    Mat out(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
    return out;
}

Mat operator+(const Mat& a, const Mat& b) {
    assert(a.rows == b.rows && a.cols == b.cols);
    Mat out(a.rows, a.cols);
    for (size_t i = 0; i < a.a.size(); ++i) out.a[i] = a.a[i] + b.a[i];
    return out;
}

Mat operator-(const Mat& a, const Mat& b) {
    assert(a.rows == b.rows && a.cols == b.cols);
    Mat out(a.rows, a.cols);
    for (size_t i = 0; i < a.a.size(); ++i) out.a[i] = a.a[i] - b.a[i];
    return out;
}

Mat operator*(double s, const Mat& m) {
    Mat out(m.rows, m.cols);
    for (size_t i = 0; i < m.a.size(); ++i) out.a[i] = s * m.a[i];
    return out;
}

double trace(const Mat& m) {
    assert(m.square());
    double acc = 0.0;
    for (int i = 0; i < m.rows; ++i) acc += m(i, i);
    return acc;
}

double frobenius_norm(const Mat& m) {
    double acc = 0.0;
    for (double v : m.a) acc += v * v;
    return std::sqrt(acc);
}

double max_abs_offdiag(const Mat& m) {
    double acc = 0.0;
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j)
            if (i != j) acc = std::max(acc, std::fabs(m(i, j)));
    return acc;
}

double max_asymmetry(const Mat& m) {
    assert(m.square());
    double acc = 0.0;
    for (int i = 0; i < m.rows; ++i)
        for (int j = i + 1; j < m.cols; ++j) acc = std::max(acc, std::fabs(m(i, j) - m(j, i)));
    return acc;
}

double elementwise_contract(const Mat& a, const Mat& b) {
    assert(a.rows == b.rows && a.cols == b.cols);
    double acc = 0.0;
    for (size_t i = 0; i < a.a.size(); ++i) acc += a.a[i] * b.a[i];
    return acc;
}

double trace_product(const Mat& a, const Mat& b) {
    assert(a.square() && b.square() && a.rows == b.rows);
    double acc = 0.0;
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) acc += a(i, k) * b(k, i);
    return acc;
}

EigenSym jacobi_eigensymmetric(Mat m, bool want_vectors, double tol) {
    if (!m.square()) throw std::invalid_argument("jacobi_eigensymmetric: matrix must be square");
    const int n = m.rows;
    if (max_asymmetry(m) > 1e-9 * std::max(1.0, frobenius_norm(m)))
        throw std::invalid_argument("jacobi_eigensymmetric: matrix is not symmetric");
    // Work on the exactly symmetrized copy so rotations preserve symmetry.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double s = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = s;
            m(j, i) = s;
        }

    Mat v = want_vectors ? Mat::identity(n) : Mat();
    const double scale = std::max(1.0, frobenius_norm(m));
    const int max_sweeps = 100 * std::max(1, n);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::fabs(m(p, q)));
        if (off <= tol * scale) break;
        if (sweep == max_sweeps - 1)
            throw std::runtime_error("jacobi_eigensymmetric: sweep cap reached before convergence");

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = m(p, q);
                if (std::fabs(apq) <= tol * scale * 1e-3) continue;
                double app = m(p, p), aqq = m(q, q);
                double theta = 0.5 * (aqq - app) / apq;
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                double tau = s / (1.0 + c);

                m(p, p) = app - t * apq;
                m(q, q) = aqq + t * apq;
                m(p, q) = 0.0;
                m(q, p) = 0.0;
                for (int k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    double akp = m(k, p), akq = m(k, q);
                    m(k, p) = akp - s * (akq + tau * akp);
                    m(p, k) = m(k, p);
                    m(k, q) = akq + s * (akp - tau * akq);
                    m(q, k) = m(k, q);
                }
                if (want_vectors) {
                    for (int k = 0; k < n; ++k) {
                        double vkp = v(k, p), vkq = v(k, q);
                        v(k, p) = vkp - s * (vkq + tau * vkp);
                        v(k, q) = vkq + s * (vkp - tau * vkq);
                    }
                }
            }
        }
    }

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return m(i, i) > m(j, j); });

    EigenSym out;
    out.eigenvalues.resize(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) out.eigenvalues[static_cast<size_t>(k)] = m(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]);
    if (want_vectors) {
        out.vectors = Mat(n, n);
        for (int k = 0; k < n; ++k)
            for (int r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[static_cast<size_t>(k)]);
    }
    return out;
}

double spectral_norm_sym(const Mat& m) {
    EigenSym e = jacobi_eigensymmetric(m, false);
    double top = 0.0;
    for (double lam : e.eigenvalues) top = std::max(top, std::fabs(lam));
    return top;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissa");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double rss = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            double r = y[i] - (f.intercept + f.slope * x[i]);
            rss += r * r;
        }
        f.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
    }
    return f;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace clab
