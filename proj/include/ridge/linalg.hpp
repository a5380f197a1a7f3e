#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

// Minimal dense linear algebra for small dimensions (the experiments run in
// d = 2 or 3; nothing here is tuned for large d).

namespace ridge {

using Vec = std::vector<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Dense row-major matrix.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return a_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return a_[i * cols_ + j];
    }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    bool operator==(const Mat&) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    Vec a_;
};

inline double dot(const Vec& x, const Vec& y) {
    assert(x.size() == y.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm(const Vec& x) { return std::sqrt(dot(x, x)); }

inline double dist(const Vec& x, const Vec& y) {
    assert(x.size() == y.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// y += a * x
inline void axpy(double a, const Vec& x, Vec& y) {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline Vec operator+(Vec x, const Vec& y) {
    axpy(1.0, y, x);
    return x;
}

inline Vec operator-(Vec x, const Vec& y) {
    axpy(-1.0, y, x);
    return x;
}

inline Vec operator*(double a, Vec x) {
    for (double& v : x) v *= a;
    return x;
}

inline Mat operator+(Mat x, const Mat& y) {
    assert(x.rows() == y.rows() && x.cols() == y.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) += y(i, j);
    return x;
}

inline Mat operator-(Mat x, const Mat& y) {
    assert(x.rows() == y.rows() && x.cols() == y.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= y(i, j);
    return x;
}

inline Mat operator*(double a, Mat x) {
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) *= a;
    return x;
}

inline Vec mat_vec(const Mat& m, const Vec& x) {
    assert(m.cols() == x.size());
    Vec y(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) y[i] += m(i, j) * x[j];
    return y;
}

inline Mat mat_mul(const Mat& a, const Mat& b) {
    assert(a.cols() == b.rows());
    Mat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double v = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += v * b(k, j);
        }
    return c;
}

// m += a * x x^T
inline void add_outer(Mat& m, double a, const Vec& x) {
    assert(m.rows() == x.size() && m.cols() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) m(i, j) += a * x[i] * x[j];
}

inline double frobenius_norm(const Mat& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

inline double max_abs(const Mat& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s = std::max(s, std::abs(m(i, j)));
    return s;
}

} // namespace ridge
