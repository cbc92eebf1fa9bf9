#pragma once

#include "critjac/mat2.hpp"

#include <optional>
#include <string>
#include <vector>

namespace critjac {

class InvalidParams : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Jacobi model: weights a_n = n^alpha, diagonal b_n = b n^alpha on odd n and
/// 0 on even n, spectral parameter lambda.
///
/// Parameters keep their decimal text so they can be re-read at a higher
/// precision (see rebound()); the Real fields hold the value at the precision
/// that was current at construction.
class ModelParams {
public:
    ModelParams(std::string alpha, std::string b, std::string lambda);
    ModelParams(double alpha, double b, double lambda);

    const Real& alpha() const { return alpha_; }
    const Real& b() const { return b_; }
    const Real& lambda() const { return lambda_; }

    const std::string& alpha_text() const { return alpha_text_; }
    const std::string& b_text() const { return b_text_; }
    const std::string& lambda_text() const { return lambda_text_; }

    double alpha_d() const { return to_double(alpha_); }
    double b_d() const { return to_double(b_); }
    double lambda_d() const { return to_double(lambda_); }

    /// b * lambda > 0.
    bool hyperbolic() const { return b_ * lambda_ > 0; }

    /// Same parameters parsed again at the current precision.
    ModelParams rebound() const { return {alpha_text_, b_text_, lambda_text_}; }

private:
    std::string alpha_text_, b_text_, lambda_text_;
    Real alpha_, b_, lambda_;
};

/// Shortest decimal text that round-trips the double.
std::string decimal_text(double v);

Real weight(Index n, const ModelParams& p);
Real diag(Index n, const ModelParams& p);

/// B_n = [[0, 1], [-a_{n-1}/a_n, (lambda - b_n)/a_n]], n >= 2.
Mat2 transfer(Index n, const ModelParams& p);

/// M_n = B_{2n} B_{2n-1}, n >= 2.
Mat2 paired(Index n, const ModelParams& p);

/// Limit of M_n: [[-1, -b], [0, -1]].
Mat2 paired_limit(const ModelParams& p);

/// M + lambda (2n)^{-alpha} [[0,1],[-1,-b]] + (alpha/2n) I.
Mat2 paired_expansion(Index n, const ModelParams& p);

enum class Regime { CriticalElliptic, CriticalHyperbolic, Degenerate };

std::string to_string(Regime r);

struct ClassificationResult {
    Regime regime = Regime::Degenerate;
    Mat2 limit_matrix;
    std::optional<double> discr_leading_coeff;   // c in discr M_n ~ c n^{-alpha}
    std::optional<double> fitted_discr_exponent;
    double expected_leading_coeff = 0;           // 4 b lambda / 2^alpha
};

/// Regime by sign(b lambda). For lambda != 0 the discriminant of M_n is
/// sampled on a geometric grid over [100, n_max]: the exponent comes from a
/// log-log fit, the coefficient from a Richardson step on discr * n^alpha
/// with correction order n^{-alpha}.
ClassificationResult classify(const ModelParams& p, Index n_max, int grid_points = 24);

struct CarlemanDiagnostic {
    std::vector<Index> checkpoints;
    std::vector<double> partial_sums;  // sum_{k<=n} 1/a_k
    bool divergent = true;             // alpha < 1: p-series with exponent < 1
};

CarlemanDiagnostic carleman_check(const ModelParams& p, Index n_max);

}  // namespace critjac
