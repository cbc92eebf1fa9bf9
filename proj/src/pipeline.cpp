#include "critjac/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace critjac {

namespace mp = boost::multiprecision;

namespace {

Real power(Index n, const Real& e) { return mp::pow(Real(n), e); }

Real sign_power(Index n) { return n % 2 == 0 ? Real(1) : Real(-1); }

// exp(2 A n^delta)
Real skew(Index n, const AsymptoticAnsatz& a) { return mp::exp(2 * a.A * power(n, a.delta)); }

Mat2 x_inverse(Index n, const AsymptoticAnsatz& a) {
    return Mat2::diag(Complex(mp::exp(-2 * a.A * power(n, a.delta))), 1);
}

Real alpha_of(const AsymptoticAnsatz& a) { return 2 * (1 - a.delta); }

}  // namespace

AsymptoticAnsatz ansatz(const ModelParams& p) {
    const Real product = p.b() * p.lambda();
    if (!(product > 0)) throw AnsatzUndefined();
    AsymptoticAnsatz a;
    a.gamma = -p.alpha() / 4;
    a.delta = 1 - p.alpha() / 2;
    a.B = mp::sqrt(product / mp::pow(Real(2), p.alpha()));
    a.A = a.B / a.delta;
    return a;
}

int required_digits(const AsymptoticAnsatz& a, Index n_max) {
    const double exponent =
        2 * to_double(a.A) * std::pow(static_cast<double>(n_max), to_double(a.delta)) * std::log10(std::exp(1.0));
    return static_cast<int>(std::ceil(exponent)) + 30;
}

int required_digits(const ModelParams& p, Index n_max) {
    if (!p.hyperbolic()) return kMinDigits + 20;
    return std::max(required_digits(ansatz(p), n_max), kMinDigits + 20);
}

void require_budget(const AsymptoticAnsatz& a, Index n) {
    const int need = required_digits(a, n);
    if (current_digits() < need) throw InsufficientPrecision(current_digits(), need);
}

Mat2 companion_limit() { return {0, 1, -1, 2}; }

Mat2 commutator(const Mat2& a, const Mat2& b) { return a * b - b * a; }

CommutatorSolution commutator_solve(const Complex& f1, const Complex& f2, const Complex& c1,
                                    const Complex& c2) {
    // In Y-coordinates [Y, [[0,1],[0,0]]] = [[-y3, y1 - y4], [0, y3]] must equal
    // [[f1 + f2, f2], [x1 + x2 - f1 - f2, x2 - f2]].
    CommutatorSolution out;
    out.x2 = -f1;
    out.x1 = Complex(2) * f1 + f2;
    const Complex y3 = -(f1 + f2);
    const Complex y4 = c1;
    const Complex y1 = f2 + y4;
    const Complex y2 = c2;
    const Mat2 y{y1, y2, y3, y4};
    const Mat2 left_inv{1, 0, 1, 1};   // inverse of [[1,0],[-1,1]]
    const Mat2 right_inv{1, 0, -1, 1};  // inverse of [[1,0],[1,1]]
    out.X = left_inv * y * right_inv;
    return out;
}

Mat2 step1_T(Index n, const ModelParams& p) {
    if (n < 1) throw std::invalid_argument("step1_T index must be >= 1");
    const Real& b = p.b();
    const Complex lam_term = p.lambda() / mp::pow(Real(2 * n), p.alpha());
    const Complex shift = p.alpha() / Real(2 * n);
    const Mat2 t0{1, Complex(-b), 1, 0};
    const Mat2 t1{Complex(b + 1 / (2 * b)), 0, Complex(1 / (2 * b)), Complex(Real(-1) / 2)};
    const Mat2 t2{0, 0, -1, Complex(b)};
    return Complex(sign_power(n)) * (t0 + lam_term * t1 + shift * t2);
}

Index detect_n0(const ModelParams& p, Index from, Index limit) {
    const Real margin("1e-6");
    for (Index n = std::max<Index>(from, 1); n <= limit; ++n) {
        Mat2 t = step1_T(n, p);
        Real scale = norm(t);
        if (abs(det(t)) > margin * scale * scale) return n;
    }
    throw SingularMatrix("no nonsingular T_n found below " + std::to_string(limit), limit);
}

Mat2 stage_N(Index n, const ModelParams& p) {
    return step1_T(n + 1, p) * paired(n, p) * inverse(step1_T(n, p));
}

Mat2 stage_N_expansion(Index n, const ModelParams& p) {
    const Complex lam_term = p.b() * p.lambda() / mp::pow(Real(2 * n), p.alpha());
    const Complex shift = p.alpha() / Real(n);
    return companion_limit() + lam_term * Mat2{0, 0, 0, 1} + shift * Mat2{0, 0, 1, -1};
}

FCoeffs F_coeffs(Index n, const AsymptoticAnsatz& a, const ModelParams& p) {
    if (n < 1) throw std::invalid_argument("F_coeffs index must be >= 1");
    const Real inv_n = Real(1) / n;
    return {-2 - a.B * a.B / power(n, p.alpha()) + p.alpha() * inv_n, 1 - p.alpha() * inv_n};
}

Real approx_solution(Index n, int sign, const AsymptoticAnsatz& a) {
    if (n < 1) throw std::invalid_argument("approx_solution index must be >= 1");
    const Real phase = sign >= 0 ? a.A * power(n, a.delta) : -a.A * power(n, a.delta);
    return power(n, a.gamma) * mp::exp(phase);
}

Real ansatz_residual(Index n, int sign, const AsymptoticAnsatz& a, const ModelParams& p) {
    if (n < 2) throw std::invalid_argument("ansatz_residual index must be >= 2");
    const FCoeffs f = F_coeffs(n, a, p);
    const Real zn = approx_solution(n, sign, a);
    const Real r = approx_solution(n + 1, sign, a) + f.F1 * zn + f.F2 * approx_solution(n - 1, sign, a);
    return mp::abs(r) / mp::abs(zn);
}

SMatrix step2_S(Index n, const AsymptoticAnsatz& a) {
    if (n < 2) throw std::invalid_argument("step2_S index must be >= 2");
    Mat2 s{Complex(approx_solution(n - 1, -1, a)), Complex(approx_solution(n - 1, 1, a)),
           Complex(approx_solution(n, -1, a)), Complex(approx_solution(n, 1, a))};
    Complex d = det(s);
    return {std::move(s), std::move(d)};
}

Mat2 stage_K(Index n, const ModelParams& p, const AsymptoticAnsatz& a) {
    require_budget(a, n + 1);
    return inverse(step2_S(n + 1, a).S) * stage_N(n, p) * step2_S(n, a).S;
}

Mat2 step3_X(Index n, const AsymptoticAnsatz& a) { return Mat2::diag(Complex(skew(n, a)), 1); }

Mat2 step3_L(Index n, const AsymptoticAnsatz& a, const MatSampler& stage_k) {
    require_budget(a, n + 1);
    return x_inverse(n + 1, a) * stage_k(n) * step3_X(n, a);
}

Mat2 stage_L(Index n, const ModelParams& p, const AsymptoticAnsatz& a) {
    return step3_L(n, a, [&](Index k) { return stage_K(k, p, a); });
}

Real L_main_diagonal(Index n, const AsymptoticAnsatz& a) {
    return mp::exp(2 * a.A * (power(n, a.delta) - power(n + 1, a.delta)));
}

Real L_main_series(Index n, const AsymptoticAnsatz& a) {
    const Real c = 2 * a.A * a.delta;
    const Real alpha = alpha_of(a);
    return 1 - c / power(n, alpha / 2) + c * c / (2 * power(n, alpha));
}

Real levinson_rate(Index n, const AsymptoticAnsatz& a) {
    return 2 * a.A * a.delta / power(n, alpha_of(a) / 2);
}

std::string to_string(StageName s) {
    switch (s) {
        case StageName::M: return "M";
        case StageName::N: return "N";
        case StageName::K: return "K";
        case StageName::L: return "L";
    }
    return "?";
}

PipelineStage make_stage(StageName s, const ModelParams& p) {
    PipelineStage out;
    out.stage_name = s;
    const double alpha = p.alpha_d();
    switch (s) {
        case StageName::M:
            out.matrix_sampler = [p](Index n) { return paired(n, p); };
            out.certified_residual_exponent = -2 * alpha;
            break;
        case StageName::N:
            out.matrix_sampler = [p](Index n) { return stage_N(n, p); };
            out.certified_residual_exponent = -2 * alpha;
            break;
        case StageName::K: {
            auto a = ansatz(p);
            out.matrix_sampler = [p, a](Index n) { return stage_K(n, p, a); };
            out.certified_residual_exponent = -1.5 * alpha;
            break;
        }
        case StageName::L: {
            auto a = ansatz(p);
            out.matrix_sampler = [p, a](Index n) { return stage_L(n, p, a); };
            out.certified_residual_exponent = -1.5 * alpha;
            break;
        }
    }
    return out;
}

Mat2 step4_prefactor(Index n, const ModelParams& p, const AsymptoticAnsatz& a) {
    require_budget(a, n);
    return inverse(step1_T(n, p)) * step2_S(n, a).S * step3_X(n, a);
}

namespace {

Mat2 prefactor_inverse(Index n, const ModelParams& p, const AsymptoticAnsatz& a) {
    return x_inverse(n, a) * inverse(step2_S(n, a).S) * step1_T(n, p);
}

}  // namespace

Real route_equivalence(const ModelParams& p, Index n0, Index steps) {
    if (n0 < 2 || steps < 1) throw std::invalid_argument("route_equivalence needs n0 >= 2, steps >= 1");
    const auto a = ansatz(p);
    const Index last = n0 + steps - 1;
    require_budget(a, last + 1);
    Mat2 direct = chrono_product([&](Index k) { return paired(k, p); }, n0, last);
    Mat2 l_product = chrono_product([&](Index k) { return stage_L(k, p, a); }, n0, last);
    Mat2 via = step4_prefactor(last + 1, p, a) * l_product * prefactor_inverse(n0, p, a);
    return norm(direct - via) / norm(direct);
}

Step4Result step4_reassemble(const ModelParams& p, Index n0, Index n_max) {
    const auto a = ansatz(p);
    require_budget(a, n_max + 1);
    Step4Result out;
    n0 = std::max<Index>(n0, 2);
    if (n_max < n0) throw std::invalid_argument("step4_reassemble needs n_max >= n0");

    for (Index n = n0; n <= n_max + 1; ++n) {
        if (!invertible(step1_T(n, p))) {
            out.notes.push_back("T_" + std::to_string(n) + " singular; n0 raised to " + std::to_string(n + 1));
            n0 = n + 1;
        }
    }
    if (n_max < n0) throw SingularMatrix("no nonsingular range for T_n", n0);
    out.n0 = n0;

    auto run = [&](Vec2 w) {
        SolutionTrace trace;
        trace.first_index = 2 * n0 - 2;
        Vec2 y = step4_prefactor(n0, p, a) * w;
        trace.values = {y[0], y[1]};
        for (Index n = n0; n <= n_max; ++n) {
            w = stage_L(n, p, a) * w;
            y = step4_prefactor(n + 1, p, a) * w;
            trace.values.push_back(y[0]);
            trace.values.push_back(y[1]);
        }
        return trace;
    };
    out.dominant = run(Vec2{0, 1});
    out.secondary = run(Vec2{1, 0});
    return out;
}

bool PipelineCertification::passed() const {
    return det_s_passed && std::all_of(slopes.begin(), slopes.end(), [](const auto& s) { return s.passed; });
}

SlopeCertificate certify_stage_n(const ModelParams& p, SampleWindow w) {
    PrecisionScope scope(PrecisionContext(std::max(current_digits(), 60)));
    const ModelParams q = p.rebound();
    return certify_slope("N_n - expansion", w.lo, w.hi, w.points, -2 * q.alpha_d() + kSlopeTolerance,
                         [&](Index n) { return norm(stage_N(n, q) - stage_N_expansion(n, q)); });
}

SlopeCertificate certify_ansatz_residual(const ModelParams& p, int sign, SampleWindow w) {
    PrecisionScope scope(PrecisionContext(std::max(current_digits(), 60)));
    const ModelParams q = p.rebound();
    const auto a = ansatz(q);
    return certify_slope(sign > 0 ? "ansatz residual z+" : "ansatz residual z-", w.lo, w.hi, w.points,
                         -2 * q.alpha_d() + kSlopeTolerance,
                         [&](Index n) { return ansatz_residual(n, sign, a, q); });
}

std::vector<SlopeCertificate> certify_stage_k(const ModelParams& p, SampleWindow w) {
    const int digits = std::max(current_digits(), required_digits(p, w.hi + 1));
    PrecisionScope scope{PrecisionContext(digits)};
    const ModelParams q = p.rebound();
    const auto a = ansatz(q);
    const double bound = -1.5 * q.alpha_d() + kSlopeTolerance;

    // one K_n per grid point, shared by the four entry families
    const auto grid = geometric_grid(w.lo, w.hi, w.points);
    std::vector<std::array<Real, 4>> samples;
    for (Index n : grid) {
        Mat2 d = stage_K(n, q, a) - Mat2::identity();
        Real e = skew(n, a);
        samples.push_back({abs(d(0, 0)), abs(d(0, 1)) / e, abs(d(1, 0)) * e, abs(d(1, 1))});
    }
    static const char* names[4] = {"K_n - I (1,1)", "K_n - I (1,2) e^{-2An^d}", "K_n - I (2,1) e^{2An^d}",
                                   "K_n - I (2,2)"};
    std::vector<SlopeCertificate> out;
    for (std::size_t i = 0; i < 4; ++i) {
        std::vector<Real> col;
        for (const auto& s : samples) col.push_back(s[i]);
        SlopeCertificate c;
        c.name = names[i];
        c.lo = w.lo;
        c.hi = w.hi;
        c.bound = bound;
        c.fit = fit_loglog(std::span<const Index>(grid), std::span<const Real>(col));
        c.passed = c.fit.slope <= bound;
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<SlopeCertificate> certify_stage_l(const ModelParams& p, SampleWindow w) {
    const int digits = std::max(current_digits(), required_digits(p, w.hi + 1));
    PrecisionScope scope{PrecisionContext(digits)};
    const ModelParams q = p.rebound();
    const auto a = ansatz(q);
    const double bound = -1.5 * q.alpha_d() + kSlopeTolerance;

    const auto grid = geometric_grid(w.lo, w.hi, w.points);
    std::vector<std::array<Real, 3>> samples;
    for (Index n : grid) {
        Mat2 l = stage_L(n, q, a);
        Mat2 main = Mat2::diag(Complex(L_main_diagonal(n, a)), 1);
        samples.push_back({abs(l(0, 1)), abs(l(1, 0)), norm(l - main)});
    }
    static const char* names[3] = {"L_n (1,2)", "L_n (2,1)", "L_n - diag(main, 1)"};
    std::vector<SlopeCertificate> out;
    for (std::size_t i = 0; i < 3; ++i) {
        std::vector<Real> col;
        for (const auto& s : samples) col.push_back(s[i]);
        SlopeCertificate c;
        c.name = names[i];
        c.lo = w.lo;
        c.hi = w.hi;
        c.bound = bound;
        c.fit = fit_loglog(std::span<const Index>(grid), std::span<const Real>(col));
        c.passed = c.fit.slope <= bound;
        out.push_back(std::move(c));
    }
    return out;
}

double det_s_ratio(const ModelParams& p, Index n) {
    const int digits = std::max(current_digits(), required_digits(p, n + 1));
    PrecisionScope scope{PrecisionContext(digits)};
    const ModelParams q = p.rebound();
    const auto a = ansatz(q);
    const Real ratio = step2_S(n + 1, a).det.real() * power(n, q.alpha()) / (2 * a.A * a.delta);
    return to_double(ratio);
}

PipelineCertification certify_pipeline(const ModelParams& p, bool include_structure) {
    PipelineCertification out;
    out.slopes.push_back(certify_stage_n(p));
    out.slopes.push_back(certify_ansatz_residual(p, 1));
    out.slopes.push_back(certify_ansatz_residual(p, -1));
    if (include_structure) {
        for (auto& c : certify_stage_k(p)) out.slopes.push_back(std::move(c));
        for (auto& c : certify_stage_l(p)) out.slopes.push_back(std::move(c));
    }
    out.det_s_ratio = det_s_ratio(p, out.det_s_index);
    out.det_s_passed = std::abs(out.det_s_ratio - 1) <= out.det_s_tolerance;
    return out;
}

}  // namespace critjac
