#pragma once

#include "critjac/scalar.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace critjac {

struct SlopeFit {
    double slope = 0;
    double intercept = 0;  // log of the coefficient
    int points = 0;
};

/// Distinct integers roughly geometrically spaced over [lo, hi].
std::vector<Index> geometric_grid(Index lo, Index hi, int points);

/// Least squares of log|value| against log n.
SlopeFit fit_loglog(std::span<const Index> ns, std::span<const Real> values);

SlopeFit fit_loglog(const std::vector<Index>& ns, const std::function<Real(Index)>& sample);

/// One slope certification: fitted exponent compared against a bound.
struct SlopeCertificate {
    std::string name;
    Index lo = 0;
    Index hi = 0;
    SlopeFit fit;
    double bound = 0;
    bool passed = false;
};

SlopeCertificate certify_slope(std::string name, Index lo, Index hi, int points, double bound,
                               const std::function<Real(Index)>& sample);

}  // namespace critjac
