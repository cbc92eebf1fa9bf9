#include "critjac/scalar.hpp"

#include <cmath>

namespace critjac {

PrecisionContext::PrecisionContext(int d) : digits(d) {
    if (d < kMinDigits) {
        throw std::invalid_argument("precision must be at least " + std::to_string(kMinDigits) +
                                    " digits, got " + std::to_string(d));
    }
}

PrecisionScope::PrecisionScope(PrecisionContext ctx) : previous_(Real::default_precision()) {
    Real::default_precision(static_cast<unsigned>(ctx.digits));
}

PrecisionScope::~PrecisionScope() { Real::default_precision(previous_); }

int current_digits() { return static_cast<int>(Real::default_precision()); }

Real precision_tolerance(int slack) {
    return boost::multiprecision::pow(Real(10), Real(slack - current_digits()));
}

Real parse_real(std::string_view text) {
    try {
        return Real(std::string(text));
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    }
}

Complex& Complex::operator+=(const Complex& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
}

Complex& Complex::operator-=(const Complex& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
}

Complex& Complex::operator*=(const Complex& o) {
    if (im_ == 0 && o.im_ == 0) {
        re_ *= o.re_;
        return *this;
    }
    Real re = re_ * o.re_ - im_ * o.im_;
    im_ = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(re);
    return *this;
}

Complex& Complex::operator/=(const Complex& o) {
    if (o.im_ == 0) {
        re_ /= o.re_;
        im_ /= o.re_;
        return *this;
    }
    // Smith's scaling keeps the denominator well conditioned.
    if (boost::multiprecision::abs(o.re_) >= boost::multiprecision::abs(o.im_)) {
        Real r = o.im_ / o.re_;
        Real den = o.re_ + o.im_ * r;
        Real re = (re_ + im_ * r) / den;
        im_ = (im_ - re_ * r) / den;
        re_ = std::move(re);
    } else {
        Real r = o.re_ / o.im_;
        Real den = o.re_ * r + o.im_;
        Real re = (re_ * r + im_) / den;
        im_ = (im_ * r - re_) / den;
        re_ = std::move(re);
    }
    return *this;
}

Real abs(const Complex& z) {
    if (z.imag() == 0) return boost::multiprecision::abs(z.real());
    return boost::multiprecision::hypot(z.real(), z.imag());
}

Real norm(const Complex& z) { return z.real() * z.real() + z.imag() * z.imag(); }

Complex conj(const Complex& z) { return {z.real(), -z.imag()}; }

Complex exp(const Complex& z) {
    Real m = boost::multiprecision::exp(z.real());
    if (z.imag() == 0) return {m, Real(0)};
    return {m * boost::multiprecision::cos(z.imag()), m * boost::multiprecision::sin(z.imag())};
}

Complex sqrt(const Complex& z) {
    if (z.imag() == 0) {
        if (z.real() >= 0) return {boost::multiprecision::sqrt(z.real()), Real(0)};
        return {Real(0), boost::multiprecision::sqrt(-z.real())};
    }
    Real r = abs(z);
    Real re = boost::multiprecision::sqrt((r + z.real()) / 2);
    Real im = boost::multiprecision::sqrt((r - z.real()) / 2);
    if (z.imag() < 0) im = -im;
    return {re, im};
}

bool is_finite(const Complex& z) {
    return boost::multiprecision::isfinite(z.real()) && boost::multiprecision::isfinite(z.imag());
}

std::ostream& operator<<(std::ostream& os, const Complex& z) {
    return os << '(' << z.real() << ',' << z.imag() << ')';
}

}  // namespace critjac
