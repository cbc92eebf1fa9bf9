#include "critjac/recurrence.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace critjac {

namespace mp = boost::multiprecision;

namespace {

void check_budget(const ModelParams& p, Index n) {
    const int need = required_digits(p, n);
    if (current_digits() < need) throw InsufficientPrecision(current_digits(), need);
}

std::string sci(const Real& x) { return x.str(16, std::ios_base::scientific); }

}  // namespace

SolutionTrace forward_solve(const ModelParams& p, const Vec2& seed, Index n_start, Index n_max) {
    if (n_start < 2) throw std::invalid_argument("forward_solve needs n_start >= 2");
    if (n_max < n_start) throw std::invalid_argument("forward_solve needs n_max >= n_start");
    if (abs(seed[0]) == 0 && abs(seed[1]) == 0) throw std::invalid_argument("forward_solve seed is zero");
    check_budget(p, n_max);

    SolutionTrace t;
    t.first_index = 2 * n_start - 2;
    const Index last = 2 * n_max + 1;
    t.values.reserve(static_cast<std::size_t>(last - t.first_index + 1));
    t.values.push_back(seed[0]);
    t.values.push_back(seed[1]);
    const Complex lambda(p.lambda());
    Real a_prev = weight(2 * n_start - 2, p);
    for (Index k = 2 * n_start - 1; k < last; ++k) {
        const Real a_k = weight(k, p);
        const auto i = static_cast<std::size_t>(k - t.first_index);
        Complex next = (lambda - Complex(diag(k, p))) * t.values[i] - Complex(a_prev) * t.values[i - 1];
        next /= Complex(a_k);
        t.values.push_back(std::move(next));
        a_prev = a_k;
    }
    return t;
}

namespace {

std::vector<Complex> backward_run(const ModelParams& p, Index k_top, Index k_bottom, Complex top,
                                  Complex below_top) {
    // values[j] holds u_{k_bottom + j}
    std::vector<Complex> v(static_cast<std::size_t>(k_top - k_bottom + 1));
    v.back() = std::move(top);
    v[v.size() - 2] = std::move(below_top);
    const Complex lambda(p.lambda());
    for (Index k = k_top - 1; k > k_bottom; --k) {
        const auto i = static_cast<std::size_t>(k - k_bottom);
        Complex prev = (lambda - Complex(diag(k, p))) * v[i] - Complex(weight(k, p)) * v[i + 1];
        prev /= Complex(weight(k - 1, p));
        v[i - 1] = std::move(prev);
    }
    return v;
}

}  // namespace

SolutionTrace backward_solve(const ModelParams& p, Index n_far, Index n_stop) {
    if (n_stop < 2) throw std::invalid_argument("backward_solve needs n_stop >= 2");
    if (n_far <= n_stop) throw std::invalid_argument("backward_solve needs n_far > n_stop");
    check_budget(p, n_far);

    const Index k_bottom = 2 * n_stop - 2;
    const Index k_top = 2 * n_far + 1;
    auto first = backward_run(p, k_top, k_bottom, Complex(1), Complex(0));
    auto second = backward_run(p, k_top, k_bottom, Complex(Real(1) / 3), Complex(1));

    const std::size_t anchor = 2;  // u_{2 n_stop}
    if (abs(first[anchor]) == 0 || abs(second[anchor]) == 0)
        throw std::runtime_error("backward_solve: solution vanishes at n_stop");
    const Complex s1 = Complex(1) / first[anchor];
    const Complex s2 = Complex(1) / second[anchor];
    for (auto& x : first) x *= s1;

    Real gap = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        Complex other = second[i] * s2;
        gap = std::max(gap, abs(first[i] - other) / std::max(abs(first[i]), Real(1)));
    }

    SolutionTrace t;
    t.first_index = k_bottom;
    t.values = std::move(first);
    t.seed_agreement = to_double(gap);
    return t;
}

SolutionTrace backward_solve(const ModelParams& p, Index n_stop) { return backward_solve(p, 4 * n_stop, n_stop); }

Complex wronskian(const ModelParams& p, const SolutionTrace& u, const SolutionTrace& v, Index k) {
    if (!u.has(k) || !u.has(k + 1) || !v.has(k) || !v.has(k + 1))
        throw std::out_of_range("wronskian outside the common range at " + std::to_string(k));
    return Complex(weight(k, p)) * (u.u(k + 1) * v.u(k) - u.u(k) * v.u(k + 1));
}

double wronskian_drift(const ModelParams& p, const SolutionTrace& u, const SolutionTrace& v) {
    const Index lo = std::max(u.first_index, v.first_index);
    const Index hi = std::min(u.last_index(), v.last_index()) - 1;
    if (hi < lo) throw std::invalid_argument("traces do not overlap");
    const Complex w0 = wronskian(p, u, v, lo);
    const Real w0_abs = abs(w0);
    Real worst = 0;
    for (Index k = lo + 1; k <= hi; ++k) worst = std::max(worst, abs(wronskian(p, u, v, k) - w0));
    if (w0_abs == 0) return worst == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return to_double(worst / w0_abs);
}

EnvelopeReport envelope_check(const SolutionTrace& trace, const AsymptoticAnsatz& a, const ModelParams& p,
                              int sign, std::optional<Index> lo, std::optional<Index> hi) {
    EnvelopeReport r;
    r.sign = sign >= 0 ? 1 : -1;
    r.last_pair = hi.value_or(trace.last_pair());
    r.first_pair = lo.value_or(r.last_pair / 2);
    if (r.first_pair < trace.first_pair() || r.last_pair > trace.last_pair() || r.first_pair > r.last_pair)
        throw std::out_of_range("envelope window outside the trace");

    const Real quarter = p.alpha() / 4;
    std::vector<Real> ratios;
    for (Index n = r.first_pair; n <= r.last_pair; ++n) {
        Real phase = a.A * mp::pow(Real(n), a.delta);
        if (r.sign > 0) phase = -phase;
        Real scale = mp::pow(Real(n), quarter) * mp::exp(phase);
        if (n % 2) scale = -scale;
        ratios.push_back((trace.even(n) * Complex(scale)).real());
    }
    const Real& last = ratios.back();
    Real worst = 0;
    bool same_sign = true;
    for (const auto& x : ratios) {
        worst = std::max(worst, mp::abs(x - last));
        same_sign = same_sign && ((x > 0) == (last > 0)) && x != 0;
        r.ratios.push_back(to_double(x));
    }
    r.drift = last == 0 ? std::numeric_limits<double>::infinity() : to_double(worst / mp::abs(last));
    r.sign_alternation = same_sign;

    const Index n = r.last_pair;
    const Complex odd_even = trace.odd(n) / trace.even(n);
    r.odd_even_ratio = to_double(odd_even.real() * mp::pow(Real(n), p.alpha() / 2));
    const Real base = mp::sqrt(p.lambda() / (mp::pow(Real(2), p.alpha()) * p.b()));
    r.theorem_constant = r.sign * to_double(base * a.delta);
    r.reassembly_constant = r.sign * to_double(a.B / p.b());
    r.theorem_rel_err = std::abs(r.odd_even_ratio / r.theorem_constant - 1);
    r.reassembly_rel_err = std::abs(r.odd_even_ratio / r.reassembly_constant - 1);
    return r;
}

void attach(SolutionTrace& trace, const EnvelopeReport& report) {
    trace.envelope_first_pair = report.first_pair;
    trace.envelope_ratios = report.ratios;
}

void write_csv(std::ostream& os, const SolutionTrace& trace) {
    os << "n,re_u_even,im_u_even,re_u_odd,im_u_odd,envelope_ratio,wronskian_drift\n";
    if (trace.empty()) return;
    const Index first = (trace.first_index + 1) / 2;
    char drift[32];
    std::snprintf(drift, sizeof drift, "%.6e", trace.wronskian_drift);
    for (Index n = first; n <= trace.last_pair(); ++n) {
        const Complex& e = trace.even(n);
        const Complex& o = trace.odd(n);
        os << n << ',' << sci(e.real()) << ',' << sci(e.imag()) << ',' << sci(o.real()) << ',' << sci(o.imag())
           << ',';
        const Index j = n - trace.envelope_first_pair;
        if (!trace.envelope_ratios.empty() && j >= 0 && j < static_cast<Index>(trace.envelope_ratios.size())) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.10e", trace.envelope_ratios[static_cast<std::size_t>(j)]);
            os << buf;
        }
        os << ',' << drift << '\n';
    }
}

}  // namespace critjac
