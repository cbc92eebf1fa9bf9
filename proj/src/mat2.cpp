#include "critjac/mat2.hpp"

#include <algorithm>

namespace critjac {

Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
            a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1)};
}

Vec2 operator*(const Mat2& a, const Vec2& v) {
    return {a(0, 0) * v[0] + a(0, 1) * v[1], a(1, 0) * v[0] + a(1, 1) * v[1]};
}

Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.e[0] + b.e[0], a.e[1] + b.e[1], a.e[2] + b.e[2], a.e[3] + b.e[3]};
}

Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.e[0] - b.e[0], a.e[1] - b.e[1], a.e[2] - b.e[2], a.e[3] - b.e[3]};
}

Mat2 operator*(const Complex& s, const Mat2& a) {
    return {s * a.e[0], s * a.e[1], s * a.e[2], s * a.e[3]};
}

Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
Vec2 operator*(const Complex& s, const Vec2& v) { return {s * v[0], s * v[1]}; }

std::ostream& operator<<(std::ostream& os, const Mat2& m) {
    return os << '[' << m(0, 0) << ' ' << m(0, 1) << "; " << m(1, 0) << ' ' << m(1, 1) << ']';
}

std::ostream& operator<<(std::ostream& os, const Vec2& v) {
    return os << '[' << v[0] << ' ' << v[1] << ']';
}

Complex det(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

Complex trace(const Mat2& m) { return m(0, 0) + m(1, 1); }

Complex discriminant(const Mat2& m) {
    // (a-d)^2 + 4bc avoids cancelling tr^2 against 4 det
    Complex diff = m(0, 0) - m(1, 1);
    return diff * diff + Complex(4) * m(0, 1) * m(1, 0);
}

Real norm(const Mat2& m) {
    Real best = abs(m.e[0]);
    for (std::size_t i = 1; i < 4; ++i) best = std::max(best, abs(m.e[i]));
    return best;
}

Real norm(const Vec2& v) { return std::max(abs(v[0]), abs(v[1])); }

Real row_sum_norm(const Mat2& m) {
    return std::max(abs(m(0, 0)) + abs(m(0, 1)), abs(m(1, 0)) + abs(m(1, 1)));
}

Real euclidean_norm(const Vec2& v) {
    return boost::multiprecision::sqrt(critjac::norm(v[0]) + critjac::norm(v[1]));
}

bool invertible(const Mat2& m) {
    Real n = norm(m);
    if (n == 0) return false;
    return abs(det(m)) >= precision_tolerance(10) * n * n;
}

Mat2 inverse(const Mat2& m) {
    if (!invertible(m)) throw SingularMatrix("matrix is singular at working precision");
    Complex d = det(m);
    return {m(1, 1) / d, -m(0, 1) / d, -m(1, 0) / d, m(0, 0) / d};
}

Mat2 chrono_product(const MatSampler& factors, Index n1, Index n2) {
    if (n1 > n2) throw std::invalid_argument("chrono_product requires n1 <= n2");
    Mat2 acc = factors(n1);
    for (Index n = n1 + 1; n <= n2; ++n) acc = factors(n) * acc;
    return acc;
}

TelescopeResult telescope(const MatSampler& a, const MatSampler& t, Index n1, Index n2) {
    if (n1 > n2) throw std::invalid_argument("telescope requires n1 <= n2");
    std::vector<Mat2> t_values;
    std::vector<Mat2> t_inverses;
    t_values.reserve(static_cast<std::size_t>(n2 - n1 + 2));
    t_inverses.reserve(t_values.capacity());
    for (Index n = n1; n <= n2 + 1; ++n) {
        Mat2 tn = t(n);
        if (!invertible(tn)) {
            throw SingularMatrix("affinity matrix T_" + std::to_string(n) + " is singular", n);
        }
        t_inverses.push_back(inverse(tn));
        t_values.push_back(std::move(tn));
    }

    MatSampler conjugated = [a, t](Index n) { return inverse(t(n + 1)) * a(n) * t(n); };

    Mat2 direct = chrono_product(a, n1, n2);
    Mat2 inner = Mat2::identity();
    for (Index n = n1; n <= n2; ++n) {
        auto k = static_cast<std::size_t>(n - n1);
        inner = t_inverses[k + 1] * a(n) * t_values[k] * inner;
    }
    Mat2 rebuilt = t_values.back() * inner * t_inverses.front();
    Real scale = norm(direct);
    Real residual = norm(direct - rebuilt);
    if (scale > 0) residual /= scale;
    return {std::move(conjugated), residual};
}

}  // namespace critjac
