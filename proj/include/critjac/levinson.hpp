#pragma once

#include "critjac/mat2.hpp"

#include <optional>
#include <string>
#include <vector>

namespace critjac {

// Linear difference systems x_{n+1} = (I + p_n V_n + R_n) x_n in C^2 with
// p_n > 0, p_n -> 0, sum p_n = inf, R in l^1 and V of bounded variation.

struct SystemSpec {
    std::string name;
    RealSampler p;
    MatSampler V;
    MatSampler R;
    Index start_index = 1;

    Mat2 step(Index n) const;  // I + p_n V_n + R_n
};

class LevinsonError : public std::runtime_error {
public:
    explicit LevinsonError(const std::string& what, Index index = -1)
        : std::runtime_error(what), index_(index) {}
    Index index() const { return index_; }

private:
    Index index_;
};

struct Eigen2 {
    Complex mu1;  // Re mu1 <= Re mu2, ties by Im
    Complex mu2;
    Vec2 x1;      // unit norm, first nonzero component positive real
    Vec2 x2;
};

/// Eigen-decomposition with ordered labels. Throws LevinsonError on a
/// (numerically) vanishing discriminant.
Eigen2 eigen(const Mat2& m);

struct Diagonalization {
    /// Columns are eigenvectors labelled continuously towards the limit.
    MatSampler T;
    ComplexSampler mu1;
    ComplexSampler mu2;
    /// First index from which the labelling is unambiguous up to n_max.
    Index threshold = 0;
    Index n_max = 0;
    Eigen2 limit;  // decomposition of V_{n_max}
    /// ||V_{n_max} - V_{n_max/2}||; large values mean no limit was detected.
    double limit_gap = 0;
    /// sum_{n=threshold}^{c} ||T_{n+1} - T_n|| at decade checkpoints c.
    std::vector<Index> checkpoints;
    std::vector<double> variation_sums;
};

Diagonalization d1_diagonalize(const MatSampler& V, Index start, Index n_max);

/// sum_{n=from}^{to-1} ||T_{n+1} - T_n||.
Real variation_tail(const Diagonalization& d, Index from, Index to);

/// A vector solution x_n for n in [first_index, first_index + size).
struct VectorTrace {
    Index first_index = 0;
    std::vector<Vec2> values;

    Index last_index() const { return first_index + static_cast<Index>(values.size()) - 1; }
    const Vec2& at(Index n) const;
};

struct LargerSolution {
    Index n0 = 0;
    int retries = 0;
    VectorTrace trace;  // u_{n0} .. u_{n_max}
    Vec2 limit;         // u_{n_max}
    /// max component change between n_max/2 and n_max.
    double drift = 0;
    std::vector<std::string> notes;
};

/// Solution e2 + o(1) of x_{n+1} = (I - diag(p_n, 0) + R_n) x_n by the
/// variation-of-parameters recursion seeded at x_{n0} = e2. V is ignored.
/// n0 doubles while the second component of the limit is below 1e-3.
LargerSolution larger_solution(const SystemSpec& spec, Index n_max, std::optional<Index> n0 = std::nullopt);

/// Same recursion with an arbitrary seed and no retry.
VectorTrace vop_solve(const SystemSpec& spec, const Vec2& seed, Index n0, Index n_max);

struct BoundednessCertificate {
    Index start = 0;  // first index with 0 < p_n < 1 through n_max
    Real bound;       // prod (1 + ||R_n||_inf)
};

BoundednessCertificate boundedness_certificate(const SystemSpec& spec, Index n_max);

struct HypothesisDiagnostics {
    std::vector<Index> checkpoints;
    std::vector<double> p_partial_sums;
    double p_last = 0;
    Index p_positive_from = 0;
    std::vector<double> r_partial_sums;
    double r_tail = 0;          // sum over [n_max/2, n_max]
    double v_variation_tail = 0;
    double limit_discriminant = 0;  // |discr V_{n_max}|
    double limit_gap = 0;
    std::vector<std::string> warnings;
};

struct BasisSolution {
    Complex mu;
    Vec2 direction;  // x_i
    /// x_n / prod_{k=n0}^{n-1} (1 + p_k mu_i(k)) at n_max/2 and n_max.
    Vec2 normalized_mid;
    Vec2 normalized_end;
    /// sine of the angle between normalized_end and x_i.
    double tail_residual = 0;
    /// relative change of the normalized norm between n_max/2 and n_max.
    double norm_ratio_drift = 0;
    std::string method;
};

struct AsymptoticBasis {
    Index n0 = 0;
    Index n_max = 0;
    BasisSolution smaller;  // mu1
    BasisSolution larger;   // mu2
    ComplexSampler scalar_product_1;  // prod_{k=n0}^{n-1} (1 + p_k mu1(k))
    ComplexSampler scalar_product_2;
    Diagonalization diagonalization;
    HypothesisDiagnostics diagnostics;
};

AsymptoticBasis asymptotic_basis(const SystemSpec& spec, Index n_max);

/// sin of the angle between a and b (phase invariant); 1 if either vanishes.
Real direction_gap(const Vec2& a, const Vec2& b);

}  // namespace critjac
