#pragma once

#include "critjac/scalar.hpp"

#include <array>
#include <functional>
#include <vector>

namespace critjac {

struct Vec2 {
    std::array<Complex, 2> c;

    Vec2() = default;
    Vec2(Complex x, Complex y) : c{std::move(x), std::move(y)} {}

    const Complex& operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    Complex& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

// 2x2 complex matrix, row-major.
struct Mat2 {
    std::array<Complex, 4> e;

    Mat2() = default;
    Mat2(Complex a, Complex b, Complex c, Complex d)
        : e{std::move(a), std::move(b), std::move(c), std::move(d)} {}

    static Mat2 identity() { return {1, 0, 0, 1}; }
    static Mat2 zero() { return {0, 0, 0, 0}; }
    static Mat2 diag(Complex a, Complex d) { return {std::move(a), 0, 0, std::move(d)}; }

    const Complex& operator()(int i, int j) const { return e[static_cast<std::size_t>(2 * i + j)]; }
    Complex& operator()(int i, int j) { return e[static_cast<std::size_t>(2 * i + j)]; }

    friend bool operator==(const Mat2&, const Mat2&) = default;
};

std::ostream& operator<<(std::ostream& os, const Mat2& m);
std::ostream& operator<<(std::ostream& os, const Vec2& v);

Mat2 operator*(const Mat2& a, const Mat2& b);
Vec2 operator*(const Mat2& a, const Vec2& v);
Mat2 operator+(const Mat2& a, const Mat2& b);
Mat2 operator-(const Mat2& a, const Mat2& b);
Mat2 operator*(const Complex& s, const Mat2& a);
Vec2 operator+(const Vec2& a, const Vec2& b);
Vec2 operator-(const Vec2& a, const Vec2& b);
Vec2 operator*(const Complex& s, const Vec2& v);

inline Mat2 mul(const Mat2& a, const Mat2& b) { return a * b; }

Complex det(const Mat2& m);
Complex trace(const Mat2& m);
Complex discriminant(const Mat2& m);  // trace^2 - 4 det

/// Max absolute entry.
Real norm(const Mat2& m);
/// Max absolute component.
Real norm(const Vec2& v);
/// Operator norm induced by the max-component vector norm (max row sum).
Real row_sum_norm(const Mat2& m);
Real euclidean_norm(const Vec2& v);

class SingularMatrix : public std::runtime_error {
public:
    explicit SingularMatrix(const std::string& what, Index index = -1)
        : std::runtime_error(what), index_(index) {}
    Index index() const { return index_; }

private:
    Index index_;
};

/// Adjugate over determinant. Throws SingularMatrix when
/// |det| < 10^{-(digits-10)} * norm^2.
Mat2 inverse(const Mat2& m);
bool invertible(const Mat2& m);

using MatSampler = std::function<Mat2(Index)>;
using RealSampler = std::function<Real(Index)>;
using ComplexSampler = std::function<Complex(Index)>;

/// factors(n2) * ... * factors(n1).
Mat2 chrono_product(const MatSampler& factors, Index n1, Index n2);

struct TelescopeResult {
    MatSampler conjugated;  // C_n = T_{n+1}^{-1} A_n T_n
    Real identity_check;    // ||prod A - T_{n2+1} (prod C) T_{n1}^{-1}|| / ||prod A||
};

/// Conjugates the sequence A_n by T_n and checks the telescoped product
/// identity over [n1, n2]. Throws SingularMatrix naming the first singular T_n.
TelescopeResult telescope(const MatSampler& a, const MatSampler& t, Index n1, Index n2);

}  // namespace critjac
