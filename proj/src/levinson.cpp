#include "critjac/levinson.hpp"

#include <algorithm>
#include <cmath>

namespace critjac {

namespace mp = boost::multiprecision;

Mat2 SystemSpec::step(Index n) const {
    return Mat2::identity() + Complex(p(n)) * V(n) + R(n);
}

namespace {

bool before(const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

Vec2 normalize_phase(Vec2 v) {
    const Real len = mp::sqrt(norm(v[0]) + norm(v[1]));
    if (len == 0) return v;
    Complex s = Complex(1) / Complex(len);
    v = s * v;
    const Real cut = precision_tolerance(10);
    const Complex& lead = abs(v[0]) > cut ? v[0] : v[1];
    const Real a = abs(lead);
    return (conj(lead) / Complex(a)) * v;
}

Vec2 eigenvector(const Mat2& m, const Complex& mu) {
    Vec2 first{m(0, 1), mu - m(0, 0)};
    Vec2 second{mu - m(1, 1), m(1, 0)};
    return normalize_phase(euclidean_norm(first) >= euclidean_norm(second) ? first : second);
}

std::vector<Index> decade_checkpoints(Index from, Index n_max) {
    std::vector<Index> out;
    for (Index c = 10; c < n_max; c *= 10) {
        if (c >= from) out.push_back(c);
    }
    out.push_back(n_max);
    return out;
}

Mat2 columns(const Vec2& a, const Vec2& b) { return {a[0], b[0], a[1], b[1]}; }

// Eigen-decomposition of V_n with labels matched to the limit. Returns false
// when the discriminant vanishes or the matching is ambiguous.
bool labelled(const Mat2& v, const Eigen2& limit, Eigen2& out) {
    try {
        out = eigen(v);
    } catch (const LevinsonError&) {
        return false;
    }
    const Real keep = abs(out.mu1 - limit.mu1) + abs(out.mu2 - limit.mu2);
    const Real swap = abs(out.mu1 - limit.mu2) + abs(out.mu2 - limit.mu1);
    if (swap < keep) {
        std::swap(out.mu1, out.mu2);
        std::swap(out.x1, out.x2);
    }
    return abs(out.mu1 - limit.mu1) < abs(out.mu1 - limit.mu2) &&
           abs(out.mu2 - limit.mu2) < abs(out.mu2 - limit.mu1);
}

// Variation of parameters for x_{n+1} = (I - diag(p_n, 0) + R_n) x_n.
VectorTrace vop(const ComplexSampler& p, const MatSampler& r, const Vec2& seed, Index n0, Index n_max) {
    VectorTrace t;
    t.first_index = n0;
    t.values.reserve(static_cast<std::size_t>(std::max<Index>(n_max - n0 + 1, 1)));
    t.values.push_back(seed);
    Complex prod(1);
    Vec2 acc{0, 0};
    for (Index n = n0; n < n_max; ++n) {
        const Complex damp = Complex(1) - p(n);
        prod *= damp;
        acc = Vec2{damp * acc[0], acc[1]} + r(n) * t.values.back();
        t.values.push_back(Vec2{prod * seed[0] + acc[0], seed[1] + acc[1]});
    }
    return t;
}

LargerSolution larger_with_retry(const ComplexSampler& p, const MatSampler& r, Index n0, Index n_max) {
    LargerSolution out;
    const Real floor("1e-3");
    for (int attempt = 0;; ++attempt) {
        if (n0 > n_max / 2) throw LevinsonError("n0 too small", n0);
        out.trace = vop(p, r, Vec2{0, 1}, n0, n_max);
        out.n0 = n0;
        out.retries = attempt;
        out.limit = out.trace.values.back();
        if (abs(out.limit[1]) >= floor) break;
        if (attempt == 6) throw LevinsonError("n0 too small", n0);
        out.notes.push_back("n0 too small at " + std::to_string(n0) + "; retrying with " + std::to_string(2 * n0));
        n0 *= 2;
    }
    out.drift = to_double(norm(out.trace.at(n_max) - out.trace.at(std::max(n0, n_max / 2))));
    return out;
}

Index unit_interval_start(const SystemSpec& spec, Index n_max) {
    Index start = spec.start_index;
    for (Index n = spec.start_index; n <= n_max; ++n) {
        const Real pn = spec.p(n);
        if (!(pn > 0 && pn < 1)) start = n + 1;
    }
    return start;
}

Complex product_skipping_zeros(const RealSampler& p, const ComplexSampler& mu, Index n0, Index n) {
    Complex prod(1);
    for (Index k = n0; k < n; ++k) {
        Complex f = Complex(1) + Complex(p(k)) * mu(k);
        if (abs(f) != 0) prod *= f;
    }
    return prod;
}

}  // namespace

Eigen2 eigen(const Mat2& m) {
    const Complex disc = discriminant(m);
    const Real scale = std::max(Real(1), norm(m));
    if (abs(disc) <= precision_tolerance(10) * scale * scale)
        throw LevinsonError("discriminant vanishes");
    const Complex tr = trace(m);
    const Complex s = sqrt(disc);
    Complex lo = (tr - s) / Complex(2);
    Complex hi = (tr + s) / Complex(2);
    if (before(hi, lo)) std::swap(lo, hi);
    Eigen2 out;
    out.mu1 = lo;
    out.mu2 = hi;
    out.x1 = eigenvector(m, lo);
    out.x2 = eigenvector(m, hi);
    return out;
}

Real direction_gap(const Vec2& a, const Vec2& b) {
    const Real na = norm(a[0]) + norm(a[1]);
    const Real nb = norm(b[0]) + norm(b[1]);
    if (na == 0 || nb == 0) return 1;
    const Complex inner = conj(a[0]) * b[0] + conj(a[1]) * b[1];
    const Real cos2 = norm(inner) / (na * nb);
    return cos2 >= 1 ? Real(0) : mp::sqrt(1 - cos2);
}

const Vec2& VectorTrace::at(Index n) const {
    if (n < first_index || n > last_index()) throw std::out_of_range("vector trace has no index " + std::to_string(n));
    return values[static_cast<std::size_t>(n - first_index)];
}

Diagonalization d1_diagonalize(const MatSampler& V, Index start, Index n_max) {
    if (n_max < 2 * std::max<Index>(start, 1)) throw std::invalid_argument("d1_diagonalize needs n_max >= 2 start");
    Diagonalization d;
    d.n_max = n_max;
    d.limit = eigen(V(n_max));
    d.limit_gap = to_double(norm(V(n_max) - V(n_max / 2)));

    const Eigen2 limit = d.limit;
    auto at = [V, limit](Index n) {
        Eigen2 e;
        if (!labelled(V(n), limit, e)) throw LevinsonError("eigenvalue labelling fails at " + std::to_string(n), n);
        return e;
    };
    d.T = [at](Index n) {
        Eigen2 e = at(n);
        return columns(e.x1, e.x2);
    };
    d.mu1 = [at](Index n) { return at(n).mu1; };
    d.mu2 = [at](Index n) { return at(n).mu2; };

    Index last_bad = start - 1;
    std::vector<Mat2> ts;
    ts.reserve(static_cast<std::size_t>(n_max - start + 2));
    for (Index n = start; n <= n_max + 1; ++n) {
        Eigen2 e;
        if (!labelled(V(n), limit, e)) {
            last_bad = n;
            ts.clear();
            continue;
        }
        ts.push_back(columns(e.x1, e.x2));
    }
    if (last_bad >= n_max / 2) throw LevinsonError("discriminant vanishes or labels cross at " + std::to_string(last_bad), last_bad);
    d.threshold = last_bad + 1;

    d.checkpoints = decade_checkpoints(d.threshold, n_max);
    Real sum = 0;
    std::size_t next = 0;
    for (Index n = d.threshold; n <= n_max && next < d.checkpoints.size(); ++n) {
        const auto i = static_cast<std::size_t>(n - d.threshold);
        sum += norm(ts[i + 1] - ts[i]);
        if (n == d.checkpoints[next]) {
            d.variation_sums.push_back(to_double(sum));
            ++next;
        }
    }
    return d;
}

Real variation_tail(const Diagonalization& d, Index from, Index to) {
    Real sum = 0;
    Mat2 prev = d.T(from);
    for (Index n = from + 1; n <= to; ++n) {
        Mat2 cur = d.T(n);
        sum += norm(cur - prev);
        prev = std::move(cur);
    }
    return sum;
}

VectorTrace vop_solve(const SystemSpec& spec, const Vec2& seed, Index n0, Index n_max) {
    const RealSampler p = spec.p;
    return vop([p](Index n) { return Complex(p(n)); }, spec.R, seed, n0, n_max);
}

LargerSolution larger_solution(const SystemSpec& spec, Index n_max, std::optional<Index> n0) {
    const Index first = std::max(n0.value_or(spec.start_index), unit_interval_start(spec, n_max));
    const RealSampler p = spec.p;
    return larger_with_retry([p](Index n) { return Complex(p(n)); }, spec.R, first, n_max);
}

BoundednessCertificate boundedness_certificate(const SystemSpec& spec, Index n_max) {
    BoundednessCertificate c;
    c.start = unit_interval_start(spec, n_max);
    c.bound = 1;
    for (Index n = c.start; n <= n_max; ++n) c.bound *= 1 + row_sum_norm(spec.R(n));
    return c;
}

namespace {

HypothesisDiagnostics diagnose(const SystemSpec& spec, const Diagonalization& d, Index n_max) {
    HypothesisDiagnostics h;
    h.checkpoints = decade_checkpoints(spec.start_index, n_max);
    Real p_sum = 0, r_sum = 0, p_tail = 0, r_tail = 0;
    std::size_t next = 0;
    h.p_positive_from = spec.start_index;
    for (Index n = spec.start_index; n <= n_max; ++n) {
        const Real pn = spec.p(n);
        const Real rn = row_sum_norm(spec.R(n));
        if (!(pn > 0)) h.p_positive_from = n + 1;
        p_sum += pn;
        r_sum += rn;
        if (n >= n_max / 2) {
            p_tail += pn;
            r_tail += rn;
        }
        if (next < h.checkpoints.size() && n == h.checkpoints[next]) {
            h.p_partial_sums.push_back(to_double(p_sum));
            h.r_partial_sums.push_back(to_double(r_sum));
            ++next;
        }
    }
    h.p_last = to_double(spec.p(n_max));
    h.r_tail = to_double(r_tail);
    Real v_tail = 0;
    for (Index n = n_max / 2; n < n_max; ++n) v_tail += norm(spec.V(n + 1) - spec.V(n));
    h.v_variation_tail = to_double(v_tail);
    h.limit_discriminant = to_double(abs(discriminant(spec.V(n_max))));
    h.limit_gap = d.limit_gap;

    if (p_tail < Real("0.1")) h.warnings.push_back("sum of p_n may converge");
    if (h.p_positive_from > n_max / 2) h.warnings.push_back("p_n not positive on the tail");
    if (r_sum > 0 && r_tail > Real("0.1") * r_sum) h.warnings.push_back("R_n tail not small; l1 not evident");
    if (h.limit_gap > 1e-2) h.warnings.push_back("no limit of V_n detected");
    if (h.v_variation_tail > 1e-2) h.warnings.push_back("V_n variation tail not small");
    return h;
}

}  // namespace

AsymptoticBasis asymptotic_basis(const SystemSpec& spec, Index n_max) {
    AsymptoticBasis out;
    out.n_max = n_max;
    out.diagonalization = d1_diagonalize(spec.V, spec.start_index, n_max);
    const Diagonalization& d = out.diagonalization;
    out.diagnostics = diagnose(spec, d, n_max);

    const RealSampler p = spec.p;
    const MatSampler R = spec.R;
    const MatSampler T = d.T;
    const ComplexSampler mu1 = d.mu1, mu2 = d.mu2;
    const Index n0 = std::max(d.threshold, spec.start_index);
    out.n0 = n0;
    out.scalar_product_1 = [p, mu1, n0](Index n) { return product_skipping_zeros(p, mu1, n0, n); };
    out.scalar_product_2 = [p, mu2, n0](Index n) { return product_skipping_zeros(p, mu2, n0, n); };
    const Index mid = std::max(n0, n_max / 2);

    // reduced system I - diag(p~, 0) + R~ in the eigenbasis
    ComplexSampler p_red = [p, mu1, mu2](Index n) {
        const Complex pn(p(n));
        return pn * (mu2(n) - mu1(n)) / (Complex(1) + pn * mu2(n));
    };
    MatSampler r_red = [p, R, T, mu1, mu2](Index n) {
        const Complex pn(p(n));
        const Mat2 t_n = T(n);
        const Mat2 t_next_inv = inverse(T(n + 1));
        const Mat2 scaled = Mat2::identity() + pn * Mat2::diag(mu1(n), mu2(n));
        const Mat2 q = t_next_inv * (t_n - T(n + 1)) * scaled + t_next_inv * R(n) * t_n;
        return (Complex(1) / (Complex(1) + pn * mu2(n))) * q;
    };

    LargerSolution w = larger_with_retry(p_red, r_red, n0, n_max);
    out.larger.mu = d.limit.mu2;
    out.larger.direction = d.limit.x2;
    out.larger.method = "variation of parameters";
    out.larger.normalized_mid = T(mid) * w.trace.at(mid);
    out.larger.normalized_end = T(n_max) * w.trace.at(n_max);

    out.smaller.mu = d.limit.mu1;
    out.smaller.direction = d.limit.x1;
    const bool split = d.limit.mu2.real() - d.limit.mu1.real() > precision_tolerance(10);
    if (split) {
        out.smaller.method = "backward recursion";
        // direction at n_max from a far seed, then the true scale back to mid
        Vec2 at_end = T(2 * n_max) * Vec2{1, 0};
        for (Index n = 2 * n_max; n > n_max; --n) {
            at_end = inverse(spec.step(n - 1)) * at_end;
            at_end = Complex(Real(1) / norm(at_end)) * at_end;
        }
        Vec2 y = at_end;
        for (Index n = n_max; n > mid; --n) y = inverse(spec.step(n - 1)) * y;
        out.smaller.normalized_end = (Complex(1) / out.scalar_product_1(n_max)) * at_end;
        out.smaller.normalized_mid = (Complex(1) / out.scalar_product_1(mid)) * y;
    } else {
        out.smaller.method = "forward recursion";
        Vec2 x = T(n0) * Vec2{1, 0};
        Vec2 x_mid = x;
        for (Index n = n0; n < n_max; ++n) {
            x = spec.step(n) * x;
            if (n + 1 == mid) x_mid = x;
        }
        out.smaller.normalized_mid = (Complex(1) / out.scalar_product_1(mid)) * x_mid;
        out.smaller.normalized_end = (Complex(1) / out.scalar_product_1(n_max)) * x;
    }

    for (BasisSolution* b : {&out.smaller, &out.larger}) {
        b->tail_residual = to_double(direction_gap(b->normalized_end, b->direction));
        const Real a = euclidean_norm(b->normalized_mid);
        const Real e = euclidean_norm(b->normalized_end);
        b->norm_ratio_drift = a == 0 ? 1.0 : to_double(mp::abs(e / a - 1));
    }
    return out;
}

}  // namespace critjac
