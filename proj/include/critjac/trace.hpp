#pragma once

#include "critjac/scalar.hpp"

#include <optional>
#include <vector>

namespace critjac {

/// A computed solution u_k of the spectral recurrence over a contiguous range
/// of raw indices k. Pair index n addresses (u_{2n}, u_{2n+1}).
struct SolutionTrace {
    Index first_index = 0;
    std::vector<Complex> values;

    /// Largest relative Wronskian deviation against the partner trace it was
    /// last paired with; 0 when never paired.
    double wronskian_drift = 0;
    /// r_n from the last envelope check, indexed from envelope_first_pair.
    std::vector<double> envelope_ratios;
    Index envelope_first_pair = 0;
    /// Direction agreement of two independent far seeds (backward solves).
    std::optional<double> seed_agreement;

    bool empty() const { return values.empty(); }
    Index last_index() const { return first_index + static_cast<Index>(values.size()) - 1; }
    bool has(Index k) const { return !values.empty() && k >= first_index && k <= last_index(); }
    const Complex& u(Index k) const;

    Index first_pair() const { return (first_index + 1) / 2; }
    Index last_pair() const { return (last_index() - 1) / 2; }
    const Complex& even(Index n) const { return u(2 * n); }
    const Complex& odd(Index n) const { return u(2 * n + 1); }
};

}  // namespace critjac
