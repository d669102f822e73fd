#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace hsm {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

/// Dense symmetric-friendly 2x2 matrix; all the covariance algebra in this
/// project is two-dimensional, so closed forms beat a linear-algebra library.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    static Mat2 outer(const Vec2& u, const Vec2& v) {
        return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
    }
    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    Mat2 operator+(const Mat2& o) const {
        return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
    }
    Mat2 operator-(const Mat2& o) const {
        return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
    }
    Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Vec2 operator*(const Vec2& v) const {
        return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
    }

    double det() const { return a11 * a22 - a12 * a21; }
    double trace() const { return a11 + a22; }

    Mat2 transpose() const { return {a11, a21, a12, a22}; }

    Mat2 inverse() const {
        const double d = det();
        if (d == 0.0) throw std::domain_error("Mat2: singular matrix");
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }

    /// Eigenvalues of the symmetrized matrix, ascending.
    std::array<double, 2> sym_eigenvalues() const {
        const double s12 = 0.5 * (a12 + a21);
        const double m = 0.5 * (a11 + a22);
        const double r = std::sqrt(0.25 * (a11 - a22) * (a11 - a22) + s12 * s12);
        return {m - r, m + r};
    }

    /// Frobenius norm.
    double norm() const {
        return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22);
    }

    /// Lower-triangular Cholesky factor of the symmetrized matrix; tiny
    /// negative pivots (round-off) are clamped to zero.
    Mat2 cholesky() const {
        const double s12 = 0.5 * (a12 + a21);
        const double l11 = std::sqrt(std::max(a11, 0.0));
        const double l21 = l11 > 0.0 ? s12 / l11 : 0.0;
        const double l22 = std::sqrt(std::max(a22 - l21 * l21, 0.0));
        return {l11, 0.0, l21, l22};
    }
};

}  // namespace hsm
