#pragma once

// Time-domain simulation of the three-level L-type register: driven
// single-excitation amplitudes with a time-dependent detuning, chained over a
// DD-synchronized sequence of reflection rounds.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "spinphoton/cavity.hpp"
#include "spinphoton/optimize.hpp"
#include "spinphoton/protocol.hpp"
#include "spinphoton/pulse.hpp"

namespace spinphoton {

enum class DetuningModulation { Stepwise, Sinusoid };

// 2N reflection segments of length tau_dd = N_t sigma_t; pi pulses flip the
// spin labels at the segment boundaries, synchronously with the detuning
// waveform. Sinusoid frequency is fixed at nu = pi / tau_dd so its zero
// crossings coincide with the pi-pulse instants.
struct DDSchedule {
    int rounds = 1;          // pi-pulse pairs; 2*rounds segments
    double tau_dd = 0.0;
    DetuningModulation modulation = DetuningModulation::Stepwise;
    double amplitude = 0.0;  // Delta (stepwise) or Delta~ (sinusoid)
    double pulse_center = 0.0;

    double nu() const { return kPi / tau_dd; }
};

inline DDSchedule make_dd_schedule(const SpectralPulse& pulse, int rounds,
                                   DetuningModulation modulation, double amplitude) {
    validate(pulse);
    if (rounds < 0) throw std::invalid_argument("make_dd_schedule: rounds >= 0 required");
    DDSchedule s;
    s.rounds = rounds;
    s.tau_dd = pulse.n_t * pulse.sigma_t();
    s.modulation = modulation;
    s.amplitude = amplitude;
    s.pulse_center = 0.5 * s.tau_dd;
    return s;
}

// Delta(t) over the full 2N-segment window. Stepwise alternates +-Delta per
// segment; the sinusoid Delta~ sin(nu t) changes sign at the same instants.
inline double detuning_waveform(const DDSchedule& s, double t) {
    if (s.modulation == DetuningModulation::Sinusoid) {
        return s.amplitude * std::sin(s.nu() * t);
    }
    const int segment = static_cast<int>(std::floor(t / s.tau_dd));
    return (segment % 2 == 0) ? s.amplitude : -s.amplitude;
}

// Complex envelope on a uniform time grid t0 + i*dt.
struct TemporalEnvelope {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<cxd> values;

    double norm() const {
        double acc = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double w = (i == 0 || i + 1 == values.size()) ? 0.5 : 1.0;
            acc += w * std::norm(values[i]);
        }
        return acc * dt;
    }
};

struct SingleExcitationState {
    cxd c_g1{};  // cavity amplitude
    cxd c_e0{};  // excited-spin amplitude
};

struct RoundRecord {
    double norm_in = 0.0;
    double norm_out = 0.0;
    double residual = 0.0;  // |c_g1|^2 + |c_e0|^2 left at the window end
};

enum class SpinBranch { Coupled, Uncoupled };

// One reflection round: integrates
//   c1' = -(kappa/2) c1 - i g ce - sqrt(kappa_l) u(t)
//   ce' = -i [Delta(t) - i gamma/2] ce - i g c1
// from zero initial conditions over the segment and returns
// u_out(t) = u_in(t) + sqrt(kappa_l) c1(t) on the same grid. The uncoupled
// branch sets g = 0 (empty-cavity reflection). RK4 with fixed step = dt;
// midpoint drive values are interpolated from the sampled envelope.
template <class Waveform>
TemporalEnvelope propagate_round(const TemporalEnvelope& in, const RegisterParams& reg,
                                 Waveform&& detuning_local, SpinBranch branch,
                                 RoundRecord* record = nullptr) {
    if (in.values.size() < 2 || !(in.dt > 0.0)) {
        throw std::invalid_argument("propagate_round: invalid time grid");
    }
    const double kappa = reg.cavity.kappa();
    if (in.dt > 1.0 / (20.0 * kappa) * (1.0 + 1e-12)) {
        throw std::invalid_argument("propagate_round: step must resolve the cavity, dt <= 1/(20 kappa)");
    }
    const double sqrt_kl = std::sqrt(reg.cavity.kappa_l);
    const double g = (branch == SpinBranch::Coupled) ? reg.transition0.g : 0.0;
    const double gamma = reg.transition0.gamma();
    const cxd im(0.0, 1.0);

    const auto deriv = [&](const SingleExcitationState& s, double delta, cxd u) {
        SingleExcitationState d;
        d.c_g1 = -0.5 * kappa * s.c_g1 - im * g * s.c_e0 - sqrt_kl * u;
        d.c_e0 = -im * (delta - 0.5 * im * gamma) * s.c_e0 - im * g * s.c_g1;
        return d;
    };

    const std::size_t n = in.values.size() - 1;
    const double h = in.dt;
    TemporalEnvelope out;
    out.t0 = in.t0;
    out.dt = in.dt;
    out.values.resize(n + 1);

    SingleExcitationState s{};
    out.values[0] = in.values[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double t = in.t0 + i * h;
        const cxd u0 = in.values[i];
        const cxd u1 = in.values[i + 1];
        const cxd um = 0.5 * (u0 + u1);
        const double d0 = detuning_local(t);
        const double dm = detuning_local(t + 0.5 * h);
        const double d1 = detuning_local(t + h);

        const SingleExcitationState k1 = deriv(s, d0, u0);
        SingleExcitationState s2{s.c_g1 + 0.5 * h * k1.c_g1, s.c_e0 + 0.5 * h * k1.c_e0};
        const SingleExcitationState k2 = deriv(s2, dm, um);
        SingleExcitationState s3{s.c_g1 + 0.5 * h * k2.c_g1, s.c_e0 + 0.5 * h * k2.c_e0};
        const SingleExcitationState k3 = deriv(s3, dm, um);
        SingleExcitationState s4{s.c_g1 + h * k3.c_g1, s.c_e0 + h * k3.c_e0};
        const SingleExcitationState k4 = deriv(s4, d1, u1);

        s.c_g1 += h / 6.0 * (k1.c_g1 + 2.0 * k2.c_g1 + 2.0 * k3.c_g1 + k4.c_g1);
        s.c_e0 += h / 6.0 * (k1.c_e0 + 2.0 * k2.c_e0 + 2.0 * k3.c_e0 + k4.c_e0);
        out.values[i + 1] = u1 + sqrt_kl * s.c_g1;
    }

    if (record) {
        record->norm_in = in.norm();
        record->norm_out = out.norm();
        record->residual = std::norm(s.c_g1) + std::norm(s.c_e0);
    }
    return out;
}

struct ThreeLevelRun {
    TemporalEnvelope u0;
    TemporalEnvelope u1;
    std::vector<RoundRecord> records0;
    std::vector<RoundRecord> records1;
};

// Full DD sequence: 2N rounds per spin branch, each fed the previous round's
// reflected envelope with the cavity/spin amplitudes reset. Branch 0 is
// coupled on even segments (waveform +Delta half), branch 1 on odd segments.
// The local grid is reused per segment; accumulated group delay stays on it.
inline ThreeLevelRun run_three_level(const SpectralPulse& pulse, const DDSchedule& schedule,
                                     const RegisterParams& reg, int steps_override = 0) {
    validate(pulse);
    const double sigma_t = pulse.sigma_t();
    const double tau = schedule.tau_dd;
    if (!(tau > 0.0)) throw std::invalid_argument("run_three_level: tau_dd > 0 required");

    const double h_max = std::min(1.0 / (20.0 * reg.cavity.kappa()), sigma_t / 200.0);
    const int n_steps = steps_override > 0
                            ? steps_override
                            : static_cast<int>(std::ceil(tau / h_max));
    const double dt = tau / n_steps;
    if (dt > 1.0 / (20.0 * reg.cavity.kappa()) * (1.0 + 1e-12) || dt > sigma_t / 200.0 * (1.0 + 1e-12)) {
        throw std::invalid_argument("run_three_level: step does not resolve kappa and sigma_t");
    }

    TemporalEnvelope input;
    input.t0 = 0.0;
    input.dt = dt;
    input.values.resize(n_steps + 1);
    for (int i = 0; i <= n_steps; ++i) {
        input.values[i] = temporal(pulse, i * dt - schedule.pulse_center);
    }

    ThreeLevelRun run;
    run.u0 = input;
    run.u1 = input;
    for (int k = 0; k < 2 * schedule.rounds; ++k) {
        // waveform in segment-local time; sign flips with the segment parity.
        // Stepwise holds its value on the closed segment, so the boundary
        // sample does not see the next segment's sign.
        const double step_value = (k % 2 == 0) ? schedule.amplitude : -schedule.amplitude;
        const auto wave = [&](double t_local) {
            if (schedule.modulation == DetuningModulation::Stepwise) return step_value;
            return detuning_waveform(schedule, k * tau + t_local);
        };
        RoundRecord rec0, rec1;
        const bool branch0_coupled = (k % 2 == 0);
        run.u0 = propagate_round(run.u0, reg, wave,
                                 branch0_coupled ? SpinBranch::Coupled : SpinBranch::Uncoupled,
                                 &rec0);
        run.u1 = propagate_round(run.u1, reg, wave,
                                 branch0_coupled ? SpinBranch::Uncoupled : SpinBranch::Coupled,
                                 &rec1);
        run.records0.push_back(rec0);
        run.records1.push_back(rec1);
    }
    return run;
}

// Temporal heralding of the two branch envelopes, u_± = (u_0 ± u_1)/2:
//   P_A = int [2|u_+|^2 + |u_-|^2]/2 dt,  P_B = int |u_-|^2/2 dt,
//   F_A = P_B / P_A, F_B = 1.
inline HeraldOutcome temporal_herald(const TemporalEnvelope& u0, const TemporalEnvelope& u1) {
    if (u0.values.size() != u1.values.size() || u0.dt != u1.dt || u0.t0 != u1.t0) {
        throw std::invalid_argument("temporal_herald: envelopes must share one grid");
    }
    double ip = 0.0, imn = 0.0;
    for (std::size_t i = 0; i < u0.values.size(); ++i) {
        const double w = (i == 0 || i + 1 == u0.values.size()) ? 0.5 : 1.0;
        ip += w * std::norm(0.5 * (u0.values[i] + u1.values[i]));
        imn += w * std::norm(0.5 * (u0.values[i] - u1.values[i]));
    }
    ip *= u0.dt;
    imn *= u0.dt;
    HeraldOutcome out;
    out.p_a = 0.5 * (2.0 * ip + imn);
    out.p_b = 0.5 * imn;
    out.p_total = out.p_a + out.p_b;
    out.f_a = (out.p_a > 0.0) ? out.p_b / out.p_a : 0.0;
    out.f_b = 1.0;
    return out;
}

// Sinusoid amplitude compensating the curvature around the detuning maximum:
// Delta~ / Delta = 1 + pi^2 / (4 N_t^2).
inline double effective_sinusoid_amplitude(double delta_target, double n_t) {
    if (!(n_t >= 4.0)) throw std::invalid_argument("effective_sinusoid_amplitude: N_t >= 4 required");
    return delta_target * (1.0 + kPi * kPi / (4.0 * n_t * n_t));
}

// Golden-section refinement of the sinusoid amplitude around a seed value,
// maximizing the temporal-herald F_A.
inline double refine_sinusoid_amplitude(const SpectralPulse& pulse, const RegisterParams& reg,
                                        int rounds, double seed_amplitude,
                                        double rel_halfwidth = 0.05) {
    const auto infidelity = [&](double amp) {
        DDSchedule s = make_dd_schedule(pulse, rounds, DetuningModulation::Sinusoid, amp);
        const ThreeLevelRun run = run_three_level(pulse, s, reg);
        return -temporal_herald(run.u0, run.u1).f_a;
    };
    const double lo = seed_amplitude * (1.0 - rel_halfwidth);
    const double hi = seed_amplitude * (1.0 + rel_halfwidth);
    return golden_section_min(infidelity, lo, hi, seed_amplitude * 2e-4);
}

}  // namespace spinphoton
