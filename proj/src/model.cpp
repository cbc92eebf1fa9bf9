#include "critjac/model.hpp"

#include "critjac/fit.hpp"

#include <charconv>
#include <cmath>

namespace critjac {

namespace {

void validate(const Real& alpha, const Real& b) {
    if (!(alpha > Real(2) / 3 && alpha < 1)) throw InvalidParams("alpha out of (2/3,1)");
    if (b == 0) throw InvalidParams("b must be nonzero");
}

Real pow_index(Index n, const Real& e) { return boost::multiprecision::pow(Real(n), e); }

}  // namespace

std::string decimal_text(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, end};
}

ModelParams::ModelParams(std::string alpha, std::string b, std::string lambda)
    : alpha_text_(std::move(alpha)),
      b_text_(std::move(b)),
      lambda_text_(std::move(lambda)),
      alpha_(parse_real(alpha_text_)),
      b_(parse_real(b_text_)),
      lambda_(parse_real(lambda_text_)) {
    validate(alpha_, b_);
}

ModelParams::ModelParams(double alpha, double b, double lambda)
    : ModelParams(decimal_text(alpha), decimal_text(b), decimal_text(lambda)) {}

Real weight(Index n, const ModelParams& p) {
    if (n < 1) throw std::invalid_argument("weight index must be >= 1");
    return pow_index(n, p.alpha());
}

Real diag(Index n, const ModelParams& p) {
    if (n < 1) throw std::invalid_argument("diagonal index must be >= 1");
    if (n % 2 == 0) return Real(0);
    return p.b() * pow_index(n, p.alpha());
}

Mat2 transfer(Index n, const ModelParams& p) {
    if (n < 2) throw std::invalid_argument("transfer matrix index must be >= 2");
    Real a_prev = weight(n - 1, p);
    Real a_n = weight(n, p);
    return {0, 1, Complex(-a_prev / a_n), Complex((p.lambda() - diag(n, p)) / a_n)};
}

Mat2 paired(Index n, const ModelParams& p) {
    if (n < 2) throw std::invalid_argument("paired matrix index must be >= 2");
    return transfer(2 * n, p) * transfer(2 * n - 1, p);
}

Mat2 paired_limit(const ModelParams& p) { return {-1, Complex(-p.b()), 0, -1}; }

Mat2 paired_expansion(Index n, const ModelParams& p) {
    Real two_n = Real(2 * n);
    Complex lam_term = p.lambda() / boost::multiprecision::pow(two_n, p.alpha());
    Complex shift = p.alpha() / two_n;
    Mat2 first{0, 1, -1, Complex(-p.b())};
    return paired_limit(p) + lam_term * first + shift * Mat2::identity();
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::CriticalElliptic: return "critical-elliptic";
        case Regime::CriticalHyperbolic: return "critical-hyperbolic";
        case Regime::Degenerate: return "degenerate";
    }
    return "unknown";
}

ClassificationResult classify(const ModelParams& p, Index n_max, int grid_points) {
    if (n_max < 100) throw std::invalid_argument("classify requires n_max >= 100");
    ClassificationResult out;
    out.limit_matrix = paired_limit(p);
    out.expected_leading_coeff =
        to_double(4 * p.b() * p.lambda() / boost::multiprecision::pow(Real(2), p.alpha()));

    const Real sign = p.b() * p.lambda();
    if (p.lambda() == 0) {
        out.regime = Regime::Degenerate;
        return out;
    }
    out.regime = sign > 0 ? Regime::CriticalHyperbolic : Regime::CriticalElliptic;

    auto discr = [&](Index n) { return discriminant(paired(n, p)).real(); };
    SlopeFit fit = fit_loglog(geometric_grid(100, n_max, std::max(grid_points, 20)), discr);
    out.fitted_discr_exponent = fit.slope;

    const Index m = n_max / 2;
    auto scaled = [&](Index n) { return discr(n) * pow_index(n, p.alpha()); };
    const Real two_alpha = boost::multiprecision::pow(Real(2), p.alpha());
    Real coeff = (two_alpha * scaled(2 * m) - scaled(m)) / (two_alpha - 1);
    out.discr_leading_coeff = to_double(coeff);
    return out;
}

CarlemanDiagnostic carleman_check(const ModelParams& p, Index n_max) {
    if (n_max < 1) throw std::invalid_argument("carleman_check requires n_max >= 1");
    CarlemanDiagnostic out;
    Real sum = 0;
    Index next = 1;
    for (Index n = 1; n <= n_max; ++n) {
        sum += 1 / weight(n, p);
        if (n == next || n == n_max) {
            out.checkpoints.push_back(n);
            out.partial_sums.push_back(to_double(sum));
            next *= 10;
        }
    }
    // sum n^{-alpha} diverges for alpha <= 1, and alpha < 1 is a model invariant
    out.divergent = p.alpha() <= 1;
    return out;
}

}  // namespace critjac
