#include "critjac/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace critjac {

std::vector<Index> geometric_grid(Index lo, Index hi, int points) {
    if (lo < 1 || hi < lo || points < 2) throw std::invalid_argument("bad geometric grid");
    std::vector<Index> out;
    const double llo = std::log(static_cast<double>(lo));
    const double lhi = std::log(static_cast<double>(hi));
    for (int i = 0; i < points; ++i) {
        double t = llo + (lhi - llo) * i / (points - 1);
        auto n = static_cast<Index>(std::llround(std::exp(t)));
        if (i == points - 1) n = hi;
        if (out.empty() || n > out.back()) out.push_back(n);
    }
    return out;
}

SlopeFit fit_loglog(std::span<const Index> ns, std::span<const Real> values) {
    if (ns.size() != values.size() || ns.size() < 2) {
        throw std::invalid_argument("fit_loglog needs matching samples, at least two");
    }
    const auto m = static_cast<double>(ns.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (values[i] == 0) throw std::domain_error("fit_loglog: zero sample at n=" + std::to_string(ns[i]));
        double x = std::log(static_cast<double>(ns[i]));
        double y = to_double(boost::multiprecision::log(boost::multiprecision::abs(values[i])));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return {slope, (sy - slope * sx) / m, static_cast<int>(ns.size())};
}

SlopeFit fit_loglog(const std::vector<Index>& ns, const std::function<Real(Index)>& sample) {
    std::vector<Real> values;
    values.reserve(ns.size());
    for (Index n : ns) values.push_back(sample(n));
    return fit_loglog(std::span<const Index>(ns), std::span<const Real>(values));
}

SlopeCertificate certify_slope(std::string name, Index lo, Index hi, int points, double bound,
                               const std::function<Real(Index)>& sample) {
    SlopeCertificate cert;
    cert.name = std::move(name);
    cert.lo = lo;
    cert.hi = hi;
    cert.bound = bound;
    cert.fit = fit_loglog(geometric_grid(lo, hi, points), sample);
    cert.passed = cert.fit.slope <= bound;
    return cert;
}

}  // namespace critjac
