#pragma once

// N-round phase accumulation and Mach-Zehnder heralding: the quadrature
// pipeline over the photon spectrum, the monochromatic closed forms, and the
// entangling-condition solvers.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "spinphoton/cavity.hpp"
#include "spinphoton/optimize.hpp"
#include "spinphoton/pulse.hpp"

namespace spinphoton {

enum class ProtocolMode { Reflection, Transmission };

enum class Path { A, B };

// Passive per-pass correction U(sqrt(r), phi/2) inserted in one optical path.
// The photon traverses it once before and once after the N encoding rounds,
// so the applied path factor is amplitude^2 * exp(2 i phase).
struct CorrectionOp {
    double amplitude = 1.0;  // per-pass attenuation, <= 1
    double phase = 0.0;      // per-pass phase (rad)
    Path target_path = Path::A;

    cxd two_pass_factor() const {
        return amplitude * amplitude * std::polar(1.0, 2.0 * phase);
    }
    bool is_identity() const { return amplitude == 1.0 && phase == 0.0; }
};

struct HeraldOutcome {
    double p_a = 0.0;
    double p_b = 0.0;
    double p_total = 0.0;
    double f_a = 0.0;
    double f_b = 0.0;
};

// Loss and mode-mismatch layers applied to every encoding round. eta_i here
// is the multiplicative large-detuning model; the exact model is selected by
// building the register with kappa_i > 0 and leaving eta_i = 1.
struct ImperfectionModel {
    double eta_i = 1.0;
    double eta_r = 1.0;
    double eta_m = 1.0;
    MismatchStrategy strategy = MismatchStrategy::Identity;

    bool trivial() const { return eta_i == 1.0 && eta_r == 1.0 && eta_m == 1.0; }

    friend bool operator==(const ImperfectionModel&, const ImperfectionModel&) = default;
};

struct ProtocolConfig {
    int rounds = 1;
    ProtocolMode mode = ProtocolMode::Reflection;
    SpectralPulse pulse{};
    RegisterParams register_a{};
    RegisterParams register_b{};
    std::vector<CorrectionOp> corrections{};
    ImperfectionModel imperfections{};
    GridParams grid{};
};

inline cxd pow_n(cxd z, int n) {
    cxd out(1.0, 0.0);
    for (int i = 0; i < n; ++i) out *= z;
    return out;
}

// (r_0^N +- r_1^N)/2 at one frequency.
inline std::pair<cxd, cxd> n_round_coefficients(const RegisterParams& reg, int n, double omega) {
    if (n < 1) throw std::invalid_argument("n_round_coefficients: n >= 1 required");
    const cxd a = pow_n(reflection(reg, 0, omega), n);
    const cxd b = pow_n(reflection(reg, 1, omega), n);
    return {0.5 * (a + b), 0.5 * (a - b)};
}

// Closed forms for a delta-spectrum photon with per-round reflection
// -R exp(i theta): P_B = R^2N sin^2(N theta)/2, P_A = R^2N [1+cos^2(N theta)]/2,
// F_A = sin^2 / (1 + cos^2), F_B = 1, P_t = R^2N.
inline HeraldOutcome monochromatic_outcome(double R, double theta, int n) {
    if (!(R >= 0.0) || R > 1.0 + 1e-12) {
        throw std::domain_error("monochromatic_outcome: R must be in [0,1]");
    }
    if (n < 1) throw std::invalid_argument("monochromatic_outcome: n >= 1 required");
    const double r2n = std::pow(R * R, n);
    const double s2 = std::sin(n * theta) * std::sin(n * theta);
    const double c2 = 1.0 - s2;
    HeraldOutcome out;
    out.p_b = r2n * s2 / 2.0;
    out.p_a = r2n * (1.0 + c2) / 2.0;
    out.p_total = out.p_a + out.p_b;
    out.f_a = s2 / (1.0 + c2);
    out.f_b = 1.0;
    return out;
}

// N = pi Delta / (2 C gamma), the dispersive-limit round count.
inline double required_rounds(double delta, double cooperativity, double gamma = 1.0) {
    if (!(delta > 0.0) || !(cooperativity > 0.0) || !(gamma > 0.0)) {
        throw std::invalid_argument("required_rounds: positive inputs required");
    }
    return kPi * delta / (2.0 * cooperativity * gamma);
}

// Exact monochromatic entangling detunings, arg(-r_0(0)) = pi/(2N):
//   Delta± = (gamma/2) [C cot(pi/2N) ± sqrt(C^2 (1 + cot^2) - 1)],
// real iff C >= sin(pi/2N).
struct DetuningSolution {
    enum class Status { TwoRoots, Degenerate, Infeasible };
    Status status = Status::Infeasible;
    double delta_plus = std::numeric_limits<double>::quiet_NaN();
    double delta_minus = std::numeric_limits<double>::quiet_NaN();

    bool feasible() const { return status != Status::Infeasible; }
};

inline double cooperativity_bound(int n) { return std::sin(kPi / (2.0 * n)); }

inline DetuningSolution solve_detuning(double cooperativity, int n, double gamma = 1.0) {
    if (n < 1) throw std::invalid_argument("solve_detuning: N >= 1 required");
    if (!(cooperativity > 0.0)) throw std::invalid_argument("solve_detuning: C > 0 required");
    const double half_angle = kPi / (2.0 * n);
    const double b = std::cos(half_angle) / std::sin(half_angle);  // cot, finite for N >= 1
    const double scale = cooperativity * cooperativity * (1.0 + b * b);
    const double disc = scale - 1.0;
    DetuningSolution sol;
    if (disc < -1e-9 * scale) {
        sol.status = DetuningSolution::Status::Infeasible;
        return sol;
    }
    // |disc| within float noise of the boundary counts as the double root
    const double root = std::sqrt(std::max(disc, 0.0));
    sol.delta_plus = 0.5 * gamma * (cooperativity * b + root);
    sol.delta_minus = 0.5 * gamma * (cooperativity * b - root);
    sol.status = (disc < 1e-9 * scale) ? DetuningSolution::Status::Degenerate
                                       : DetuningSolution::Status::TwoRoots;
    return sol;
}

namespace detail {

// Per-round effective amplitude with the loss/mismatch layers folded in.
inline cxd round_amplitude(const ProtocolConfig& cfg, const RegisterParams& reg, int s,
                           double omega) {
    const ImperfectionModel& imp = cfg.imperfections;
    if (cfg.mode == ProtocolMode::Reflection) {
        cxd r = reflection(reg, s, omega);
        r *= imp.eta_i * imp.eta_i;
        if (imp.eta_m < 1.0) r = mismatched_reflection(r, imp.eta_m, imp.strategy);
        return std::sqrt(imp.eta_r) * r;
    }
    // Transmission: matched and unmatched modes separate naturally, and the
    // intrinsic loss enters once in amplitude.
    cxd t = transmission(reg, s, omega);
    return std::sqrt(imp.eta_r) * imp.eta_i * imp.eta_m * t;
}

inline void validate(const ProtocolConfig& cfg) {
    if (cfg.rounds < 1) throw std::invalid_argument("herald: rounds >= 1 required");
    if (cfg.mode == ProtocolMode::Transmission) {
        if (!(cfg.register_a.cavity.kappa_r > 0.0) || !(cfg.register_b.cavity.kappa_r > 0.0)) {
            throw std::invalid_argument("herald: transmission mode requires kappa_r > 0");
        }
    }
    if (cfg.corrections.size() > 2) {
        throw std::invalid_argument("herald: at most one correction per path");
    }
    for (const CorrectionOp& c : cfg.corrections) {
        if (!(c.amplitude > 0.0) || c.amplitude > 1.0) {
            throw std::invalid_argument("herald: corrections are passive, amplitude in (0,1]");
        }
    }
}

}  // namespace detail

// Heralding probabilities and fidelities for one protocol configuration.
//
// Identical registers with equal path corrections take a reduced route where
// the register-difference amplitude r_-^- is never formed, so F_B = 1 holds
// structurally rather than to quadrature accuracy.
inline HeraldOutcome herald(const ProtocolConfig& cfg) {
    detail::validate(cfg);
    const QuadratureGrid grid = make_grid(cfg.pulse, cfg.grid);
    const int n = cfg.rounds;

    std::array<cxd, 2> path_factor{cxd(1.0, 0.0), cxd(1.0, 0.0)};
    for (const CorrectionOp& c : cfg.corrections) {
        path_factor[c.target_path == Path::A ? 0 : 1] *= c.two_pass_factor();
    }

    const bool identical =
        cfg.register_a == cfg.register_b && path_factor[0] == path_factor[1];

    HeraldOutcome out;
    if (identical) {
        double ipp = 0.0, imm = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double w = grid.nodes[i];
            const double amp = spectrum(cfg.pulse, w);
            const double weight = grid.weights[i] * amp * amp;
            const cxd a0 = path_factor[0]
                           * pow_n(detail::round_amplitude(cfg, cfg.register_a, 0, w), n);
            const cxd a1 = path_factor[0]
                           * pow_n(detail::round_amplitude(cfg, cfg.register_a, 1, w), n);
            const cxd rp = 0.5 * (a0 + a1);
            const cxd rm = 0.5 * (a0 - a1);
            ipp += weight * std::norm(rp);
            imm += weight * std::norm(rm);
        }
        out.p_a = 0.5 * (2.0 * ipp + imm);
        out.p_b = 0.5 * imm;
        out.p_total = out.p_a + out.p_b;
        if (out.p_a < 1e-30 && out.p_b < 1e-30) {
            throw std::runtime_error("herald: degenerate outcome, both port probabilities vanish");
        }
        out.f_a = out.p_b / out.p_a;
        out.f_b = 1.0;
        return out;
    }

    // Four distinct N-round amplitudes; r_alpha^± mixes the two registers.
    double int_pp = 0.0, int_pm = 0.0, int_mp = 0.0, int_mm = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid.nodes[i];
        const double amp = spectrum(cfg.pulse, w);
        const double weight = grid.weights[i] * amp * amp;
        const cxd a0 = path_factor[0]
                       * pow_n(detail::round_amplitude(cfg, cfg.register_a, 0, w), n);
        const cxd a1 = path_factor[0]
                       * pow_n(detail::round_amplitude(cfg, cfg.register_a, 1, w), n);
        const cxd b0 = path_factor[1]
                       * pow_n(detail::round_amplitude(cfg, cfg.register_b, 0, w), n);
        const cxd b1 = path_factor[1]
                       * pow_n(detail::round_amplitude(cfg, cfg.register_b, 1, w), n);
        const cxd rpa = 0.5 * (a0 + a1), rma = 0.5 * (a0 - a1);
        const cxd rpb = 0.5 * (b0 + b1), rmb = 0.5 * (b0 - b1);
        int_pp += weight * std::norm(0.5 * (rpa + rpb));
        int_pm += weight * std::norm(0.5 * (rpa - rpb));
        int_mp += weight * std::norm(0.5 * (rma + rmb));
        int_mm += weight * std::norm(0.5 * (rma - rmb));
    }
    out.p_a = 0.5 * (2.0 * int_pp + int_mp + int_mm);
    out.p_b = 0.5 * (2.0 * int_pm + int_mp + int_mm);
    out.p_total = out.p_a + out.p_b;
    if (out.p_a < 1e-30 && out.p_b < 1e-30) {
        throw std::runtime_error("herald: degenerate outcome, both port probabilities vanish");
    }
    out.f_a = int_mp / (2.0 * out.p_a);
    out.f_b = int_mp / (2.0 * out.p_b);
    return out;
}

enum class DetuningObjective { MaxFidelityA, MaxPtAtFidelityFloor };

struct OptimizeResult {
    double delta = std::numeric_limits<double>::quiet_NaN();
    HeraldOutcome outcome{};
    bool feasible = false;
};

namespace detail {

inline ProtocolConfig with_detuning(ProtocolConfig cfg, double delta,
                                    std::optional<double> width_scaling_n_omega) {
    cfg.register_a.transition0.delta = delta;
    cfg.register_a.transition1.delta = -delta;
    cfg.register_b.transition0.delta = delta;
    cfg.register_b.transition1.delta = -delta;
    if (width_scaling_n_omega) cfg.pulse.sigma_omega = delta / *width_scaling_n_omega;
    return cfg;
}

}  // namespace detail

// Scalar detuning optimization around the closed-form seed. Both registers
// are retuned symmetrically (Delta_0 = -Delta_1 = Delta). When
// width_scaling_n_omega is set, the trial pulse width follows Delta/N_omega.
//
// MaxFidelityA: golden-section maximum of F_A.
// MaxPtAtFidelityFloor: P_t grows monotonically with Delta, so the optimum is
// the largest Delta that still satisfies F_A >= floor, found by bisection on
// the high-detuning side of the fidelity peak.
inline OptimizeResult optimize_detuning(const ProtocolConfig& base, DetuningObjective objective,
                                        double fidelity_floor = 0.0,
                                        std::optional<double> width_scaling_n_omega = {}) {
    const double c0 = base.register_a.cooperativity(0);
    const double gamma0 = base.register_a.transition0.gamma();
    const DetuningSolution sol = solve_detuning(c0, base.rounds, gamma0);
    if (!sol.feasible() || sol.status == DetuningSolution::Status::Degenerate) {
        return OptimizeResult{};
    }
    const double tol = 1e-6;  // absolute, units of gamma_ref

    const auto fidelity_at = [&](double delta) {
        return herald(detail::with_detuning(base, delta, width_scaling_n_omega)).f_a;
    };

    double lo = 0.5 * sol.delta_plus;
    double hi = 2.0 * sol.delta_plus;
    double dstar = golden_section_min([&](double d) { return -fidelity_at(d); }, lo, hi, tol);
    if (dstar - lo < 16.0 * tol || hi - dstar < 16.0 * tol) {
        lo = 0.25 * sol.delta_plus;
        hi = 4.0 * sol.delta_plus;
        dstar = golden_section_min([&](double d) { return -fidelity_at(d); }, lo, hi, tol);
        if (dstar - lo < 16.0 * tol || hi - dstar < 16.0 * tol) {
            throw std::runtime_error("optimize_detuning: no interior optimum in widened bracket");
        }
    }

    OptimizeResult res;
    if (objective == DetuningObjective::MaxFidelityA) {
        res.delta = dstar;
        res.outcome = herald(detail::with_detuning(base, dstar, width_scaling_n_omega));
        res.feasible = true;
        return res;
    }

    const double f_peak = fidelity_at(dstar);
    if (f_peak < fidelity_floor) return OptimizeResult{};
    double d_floor = hi;
    if (fidelity_at(hi) < fidelity_floor) {
        const auto crossing = bisect_root(
            [&](double d) { return fidelity_at(d) - fidelity_floor; }, dstar, hi, tol);
        if (!crossing) return OptimizeResult{};
        d_floor = *crossing;
        // keep the feasible side of the crossing
        for (int i = 0; i < 64 && fidelity_at(d_floor) < fidelity_floor; ++i) d_floor -= tol;
        if (fidelity_at(d_floor) < fidelity_floor) d_floor = dstar;
    }
    res.delta = d_floor;
    res.outcome = herald(detail::with_detuning(base, d_floor, width_scaling_n_omega));
    res.feasible = true;
    return res;
}

// Matching detuning of the transmission variant,
//   Delta_1 = -(gamma_1/2) sqrt[(|t_0|^2 (1+C_1)^2 - 1) / (1 - |t_0|^2)].
inline std::optional<double> transmission_match_detuning(double c1, double gamma1,
                                                         double t0_magnitude) {
    if (!(t0_magnitude > 0.0) || t0_magnitude >= 1.0) return std::nullopt;
    const double t2 = t0_magnitude * t0_magnitude;
    const double num = t2 * (1.0 + c1) * (1.0 + c1) - 1.0;
    if (num <= 0.0) return std::nullopt;
    return -0.5 * gamma1 * std::sqrt(num / (1.0 - t2));
}

}  // namespace spinphoton
