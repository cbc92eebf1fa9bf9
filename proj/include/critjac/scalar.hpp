#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace critjac {

using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;
using Index = std::int64_t;

constexpr int kMinDigits = 30;

class InsufficientPrecision : public std::runtime_error {
public:
    InsufficientPrecision(int have, int need)
        : std::runtime_error("insufficient precision: have " + std::to_string(have) +
                             " digits, need " + std::to_string(need)),
          have_(have), need_(need) {}
    int have() const { return have_; }
    int need() const { return need_; }

private:
    int have_;
    int need_;
};

// Working precision in decimal digits. Values created while a context is
// active carry its precision; arithmetic results take the widest operand.
struct PrecisionContext {
    int digits = 50;

    explicit PrecisionContext(int d);
};

// Installs a precision as the process default for its lifetime.
//
// Boost keeps the MPFR default precision in a process-wide static, so scopes
// must not be opened concurrently from different threads. Parallel callers
// open one scope up front and share it.
class PrecisionScope {
public:
    explicit PrecisionScope(PrecisionContext ctx);
    ~PrecisionScope();
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned previous_;
};

int current_digits();

/// 10^{-(digits - slack)} at the current precision.
Real precision_tolerance(int slack);

Real parse_real(std::string_view text);

// Complex scalar at working precision.
class Complex {
public:
    Complex() : re_(0), im_(0) {}
    Complex(Real re) : re_(std::move(re)), im_(0) {}  // NOLINT(google-explicit-constructor)
    Complex(Real re, Real im) : re_(std::move(re)), im_(std::move(im)) {}
    template <class T>
        requires std::is_arithmetic_v<T>
    Complex(T v) : re_(v), im_(0) {}  // NOLINT(google-explicit-constructor)

    const Real& real() const { return re_; }
    const Real& imag() const { return im_; }

    Complex& operator+=(const Complex& o);
    Complex& operator-=(const Complex& o);
    Complex& operator*=(const Complex& o);
    Complex& operator/=(const Complex& o);

    friend Complex operator+(Complex a, const Complex& b) { return a += b; }
    friend Complex operator-(Complex a, const Complex& b) { return a -= b; }
    friend Complex operator*(Complex a, const Complex& b) { return a *= b; }
    friend Complex operator/(Complex a, const Complex& b) { return a /= b; }
    friend Complex operator-(const Complex& a) { return {-a.re_, -a.im_}; }
    friend bool operator==(const Complex& a, const Complex& b) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }

private:
    Real re_;
    Real im_;
};

Real abs(const Complex& z);
Real norm(const Complex& z);  // |z|^2
Complex conj(const Complex& z);
Complex exp(const Complex& z);
Complex sqrt(const Complex& z);  // principal branch
bool is_finite(const Complex& z);

std::ostream& operator<<(std::ostream& os, const Complex& z);

inline double to_double(const Real& x) { return x.convert_to<double>(); }

}  // namespace critjac
