#pragma once

// Encoding-duration and rate figures of merit, the fidelity-constrained rate
// maximization over the width-scaling parameter, and the loss-constrained
// optimal repetition search.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spinphoton/protocol.hpp"

namespace spinphoton {

// T_pe = N N_t / sigma_omega, the pure phase-encoding duration.
inline double encoding_duration(double n_rounds, double n_t, double sigma_omega) {
    if (!(n_rounds > 0.0) || !(n_t > 0.0) || !(sigma_omega > 0.0)) {
        throw std::invalid_argument("encoding_duration: positive inputs required");
    }
    return n_rounds * n_t / sigma_omega;
}

// Width-scaling over width-fixed rate ratio (equal-P_t approximation):
//   R^{N_omega} / R^{n_omega} = (n_omega / N_omega) (2 C N / pi).
inline double rate_ratio(double n_omega_fixed, double n_omega_scaled, double cooperativity,
                         double n_rounds) {
    if (!(n_omega_fixed > 0.0) || !(n_omega_scaled > 0.0) || !(cooperativity > 0.0)
        || !(n_rounds > 0.0)) {
        throw std::invalid_argument("rate_ratio: positive inputs required");
    }
    return (n_omega_fixed / n_omega_scaled) * (2.0 * cooperativity * n_rounds / kPi);
}

struct RateResult {
    double n_omega_star = std::numeric_limits<double>::quiet_NaN();
    double rate = 0.0;      // R_pe in units of gamma
    double duration = 0.0;  // T_pe in units of 1/gamma
    double delta_star = std::numeric_limits<double>::quiet_NaN();
    HeraldOutcome outcome{};
    bool feasible = false;
};

// Maximum encoding rate R_pe = P_t / T_pe over the width-scaling parameter
// N_omega, subject to F_A >= f_threshold, with Delta re-optimized for every
// candidate N_omega. The fidelity grows monotonically with N_omega while the
// rate falls, so the optimum sits at the feasibility edge: a log-spaced
// pre-scan brackets it and bisection pins it down.
inline RateResult max_rate_at_fidelity(const ProtocolConfig& base, double f_threshold,
                                       double n_omega_lo = 1.0, double n_omega_hi = 100.0) {
    const auto evaluate = [&](double n_omega) {
        return optimize_detuning(base, DetuningObjective::MaxFidelityA, 0.0, n_omega);
    };
    const auto feasible_at = [&](const OptimizeResult& r) {
        return r.feasible && r.outcome.f_a >= f_threshold;
    };

    constexpr int kScan = 20;
    const double log_lo = std::log(n_omega_lo);
    const double log_hi = std::log(n_omega_hi);
    double lo = n_omega_lo;  // highest scanned infeasible point
    double hi = 0.0;         // lowest scanned feasible point
    OptimizeResult hi_result;
    bool lo_is_infeasible = false;
    for (int i = 0; i < kScan; ++i) {
        const double n_omega = std::exp(log_lo + (log_hi - log_lo) * i / (kScan - 1));
        const OptimizeResult r = evaluate(n_omega);
        if (feasible_at(r)) {
            hi = n_omega;
            hi_result = r;
            break;
        }
        lo = n_omega;
        lo_is_infeasible = true;
    }
    if (hi == 0.0) return RateResult{};

    if (lo_is_infeasible) {
        for (int i = 0; i < 60; ++i) {
            if (hi_result.outcome.f_a - f_threshold <= 1e-3 && hi / lo < 1.001) break;
            const double mid = std::sqrt(lo * hi);
            const OptimizeResult r = evaluate(mid);
            if (feasible_at(r)) {
                hi = mid;
                hi_result = r;
            } else {
                lo = mid;
            }
        }
    }

    RateResult out;
    out.n_omega_star = hi;
    out.delta_star = hi_result.delta;
    out.outcome = hi_result.outcome;
    out.duration = encoding_duration(base.rounds, base.pulse.n_t, hi_result.delta / hi);
    out.rate = hi_result.outcome.p_total / out.duration;
    out.feasible = true;
    return out;
}

struct RoundsSweepRow {
    int rounds = 0;
    double delta = std::numeric_limits<double>::quiet_NaN();
    HeraldOutcome outcome{};
    bool feasible = false;
};

struct LossOptimalResult {
    int n_star = 0;
    double delta_star = std::numeric_limits<double>::quiet_NaN();
    HeraldOutcome outcome{};
    bool feasible = false;
    std::vector<RoundsSweepRow> sweep;
};

// Smallest N with a real entangling detuning, C >= sin(pi/2N).
inline int min_feasible_rounds(double cooperativity) {
    if (cooperativity >= 1.0) return 1;
    return static_cast<int>(std::ceil(kPi / (2.0 * std::asin(cooperativity))));
}

// Sweep N, re-optimizing Delta for maximal P_t under the fidelity floor at
// each point; the per-round loss factors in base.imperfections make P_t peak
// at a finite N.
inline LossOptimalResult loss_optimal_rounds(const ProtocolConfig& base, double f_floor,
                                             int n_max) {
    const ImperfectionModel& imp = base.imperfections;
    if (!(imp.eta_i > 0.0) || imp.eta_i > 1.0 || !(imp.eta_r > 0.0) || imp.eta_r > 1.0) {
        throw std::invalid_argument("loss_optimal_rounds: efficiencies must be in (0,1]");
    }
    const double c0 = base.register_a.cooperativity(0);
    LossOptimalResult out;
    for (int n = min_feasible_rounds(c0); n <= n_max; ++n) {
        ProtocolConfig cfg = base;
        cfg.rounds = n;
        const DetuningSolution sol = solve_detuning(c0, n, base.register_a.transition0.gamma());
        if (sol.status != DetuningSolution::Status::TwoRoots) continue;
        const OptimizeResult r =
            optimize_detuning(cfg, DetuningObjective::MaxPtAtFidelityFloor, f_floor);
        RoundsSweepRow row;
        row.rounds = n;
        row.feasible = r.feasible;
        if (r.feasible) {
            row.delta = r.delta;
            row.outcome = r.outcome;
            if (!out.feasible || r.outcome.p_total > out.outcome.p_total) {
                out.feasible = true;
                out.n_star = n;
                out.delta_star = r.delta;
                out.outcome = r.outcome;
            }
        }
        out.sweep.push_back(row);
    }
    return out;
}

}  // namespace spinphoton
