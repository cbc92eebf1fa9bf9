#pragma once

#include "critjac/mat2.hpp"
#include "critjac/model.hpp"
#include "critjac/pipeline.hpp"
#include "critjac/trace.hpp"

#include <optional>
#include <ostream>

namespace critjac {

/// Iterates a_{k-1} u_{k-1} + b_k u_k + a_k u_{k+1} = lambda u_k upward from
/// Y_{n_start} = (u_{2 n_start - 2}, u_{2 n_start - 1}) through u_{2 n_max + 1}.
/// Hyperbolic parameters require the exponent budget for n_max.
SolutionTrace forward_solve(const ModelParams& p, const Vec2& seed, Index n_start, Index n_max);

/// Backward recursion from two independent seeds at pair n_far down to
/// u_{2 n_stop - 2}, normalized so that u_{2 n_stop} = 1. The second seed only
/// feeds seed_agreement. n_far defaults to 4 n_stop.
SolutionTrace backward_solve(const ModelParams& p, Index n_far, Index n_stop);
SolutionTrace backward_solve(const ModelParams& p, Index n_stop);

/// W_k = a_k (u_{k+1} v_k - u_k v_{k+1}), raw index k.
Complex wronskian(const ModelParams& p, const SolutionTrace& u, const SolutionTrace& v, Index k);

/// max_k |W_k - W_first| / |W_first| over the common range; 0 when W vanishes
/// identically, +inf when only W_first does.
double wronskian_drift(const ModelParams& p, const SolutionTrace& u, const SolutionTrace& v);

struct EnvelopeReport {
    int sign = 1;
    Index first_pair = 0;
    Index last_pair = 0;
    /// r_n = u_{2n} (-1)^n n^{alpha/4} exp(-+ A n^delta), real parts.
    std::vector<double> ratios;
    /// max_n |r_n - r_last| / |r_last|.
    double drift = 0;
    /// n^{alpha/2} u_{2n+1} / u_{2n} at last_pair.
    double odd_even_ratio = 0;
    /// +- sqrt(lambda / (2^alpha b)) (1 - alpha/2).
    double theorem_constant = 0;
    /// +- B / b, the lower-row coefficient of the reassembly prefactor.
    double reassembly_constant = 0;
    double theorem_rel_err = 0;
    double reassembly_rel_err = 0;
    /// u_{2n} (-1)^n keeps one sign over the window.
    bool sign_alternation = false;

    bool drift_ok(double tol) const { return drift < tol; }
    bool theorem_ok(double tol) const { return theorem_rel_err < tol; }
    bool reassembly_ok(double tol) const { return reassembly_rel_err < tol; }
};

/// Window defaults to [last/2, last] with last the final pair of the trace.
EnvelopeReport envelope_check(const SolutionTrace& trace, const AsymptoticAnsatz& a, const ModelParams& p,
                              int sign, std::optional<Index> lo = std::nullopt,
                              std::optional<Index> hi = std::nullopt);

/// Copies the report's ratios into the trace for export.
void attach(SolutionTrace& trace, const EnvelopeReport& report);

/// Header n,re_u_even,im_u_even,re_u_odd,im_u_odd,envelope_ratio,wronskian_drift;
/// one row per complete pair, envelope_ratio empty outside the checked window.
void write_csv(std::ostream& os, const SolutionTrace& trace);

}  // namespace critjac
