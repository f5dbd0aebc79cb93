#pragma once

// Register disorder with post-corrections, Monte Carlo disorder studies, and
// the interferometric phase-noise model.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "spinphoton/protocol.hpp"
#include "spinphoton/rng.hpp"

namespace spinphoton {

// Correction equalizing the two paths' N-round reflections, calibrated at
// omega = 0. The op is passive, so it always attenuates: it sits on the
// larger-amplitude path and carries the sub-unity amplitude ratio.
inline CorrectionOp register_correction(cxd r0_path_a, cxd r0_path_b, int n) {
    if (std::abs(r0_path_a) == 0.0 || std::abs(r0_path_b) == 0.0) {
        throw std::invalid_argument("register_correction: zero reflection amplitude");
    }
    const bool a_larger = std::abs(r0_path_a) >= std::abs(r0_path_b);
    const cxd larger = a_larger ? r0_path_a : r0_path_b;
    const cxd smaller = a_larger ? r0_path_b : r0_path_a;
    CorrectionOp op;
    op.target_path = a_larger ? Path::A : Path::B;
    op.amplitude = std::pow(std::abs(smaller) / std::abs(larger), 0.5 * n);
    // relative phase through arg(smaller * conj(larger)) avoids branch cuts
    op.phase = 0.5 * n * std::arg(smaller * std::conj(larger));
    return op;
}

// Detuning that equalizes |r_1| with a given |r_0| inside one register,
//   Delta_1 = -(gamma_1/2) sqrt[(|r_0|^2 (C_1+1)^2 - (C_1-1)^2)/(1 - |r_0|^2)],
// valid while |r_0|^2 > ((C_1-1)/(C_1+1))^2.
inline std::optional<double> match_amplitude_detuning(double c1, double gamma1,
                                                      double r0_magnitude) {
    if (!(r0_magnitude > 0.0) || r0_magnitude >= 1.0) return std::nullopt;
    const double r2 = r0_magnitude * r0_magnitude;
    const double num = r2 * (c1 + 1.0) * (c1 + 1.0) - (c1 - 1.0) * (c1 - 1.0);
    if (num < 0.0) return std::nullopt;
    return -0.5 * gamma1 * std::sqrt(num / (1.0 - r2));
}

struct DisorderSpec {
    double sigma_rel = 0.2;
    int n_samples = 1000;
    std::uint64_t seed = 0;
    RegisterParams reference{};
};

namespace detail {

inline double perturbed(double reference, double sigma, CounterRng& rng) {
    for (int tries = 0; tries < 100; ++tries) {
        const double v = reference * (1.0 + sigma * rng.normal());
        if (v > 0.0) return v;
    }
    throw std::runtime_error("sample_disorder: resampling bound exceeded");
}

}  // namespace detail

// One disorder sample: the reference transition T_{0,A} keeps its parameters,
// the other three transitions draw relative Gaussian factors on (g, gamma),
// and register B draws its kappa. The sample index selects the RNG stream, so
// samples are reproducible independently of evaluation order.
inline std::pair<RegisterParams, RegisterParams> sample_disorder(const DisorderSpec& spec,
                                                                 std::uint64_t sample_index) {
    if (spec.sigma_rel < 0.0 || spec.n_samples < 1) {
        throw std::invalid_argument("sample_disorder: invalid spec");
    }
    CounterRng rng(spec.seed, sample_index);
    const double s = spec.sigma_rel;
    const RegisterParams& ref = spec.reference;

    RegisterParams reg_a = ref;
    reg_a.transition1.g = detail::perturbed(ref.transition1.g, s, rng);
    reg_a.transition1.gamma_se = detail::perturbed(ref.transition1.gamma_se, s, rng);

    RegisterParams reg_b = ref;
    reg_b.transition0.g = detail::perturbed(ref.transition0.g, s, rng);
    reg_b.transition0.gamma_se = detail::perturbed(ref.transition0.gamma_se, s, rng);
    reg_b.transition1.g = detail::perturbed(ref.transition1.g, s, rng);
    reg_b.transition1.gamma_se = detail::perturbed(ref.transition1.gamma_se, s, rng);
    reg_b.cavity.kappa_l = detail::perturbed(ref.cavity.kappa_l, s, rng);

    return {reg_a, reg_b};
}

// Entangling-condition tuning of one disordered register: Delta_0 is searched
// so that, with Delta_1 amplitude-matched at omega = 0, the accumulated phase
// N [theta_0(0) - theta_1(0)] reaches pi.
struct RegisterTuning {
    double delta0 = 0.0;
    double delta1 = 0.0;
    bool ok = false;
};

inline RegisterTuning tune_register(const RegisterParams& reg, int n) {
    const double c1 = reg.cooperativity(1);
    const double gamma1 = reg.transition1.gamma();

    const auto phase_error = [&](double delta0) -> std::optional<double> {
        RegisterParams trial = reg;
        trial.transition0.delta = delta0;
        const cxd r0 = reflection(trial, 0, 0.0);
        const auto delta1 = match_amplitude_detuning(c1, gamma1, std::abs(r0));
        if (!delta1) return std::nullopt;
        trial.transition1.delta = *delta1;
        const cxd r1 = reflection(trial, 1, 0.0);
        return n * std::arg(-r0) - n * std::arg(-r1) - kPi;
    };

    // seed from the symmetric closed form at the register's own C_0
    const DetuningSolution sol = solve_detuning(reg.cooperativity(0), n, reg.transition0.gamma());
    if (!sol.feasible()) return RegisterTuning{};
    double lo = 1e-6 * sol.delta_plus;
    const double hi = 8.0 * sol.delta_plus;
    if (!phase_error(hi)) return RegisterTuning{};

    // the amplitude-matching validity region is an upper detuning interval;
    // bisect the predicate to sit just above its edge
    if (!phase_error(lo)) {
        double bad = lo, good = hi;
        for (int i = 0; i < 200 && (good - bad) > 1e-13 * hi; ++i) {
            const double mid = 0.5 * (bad + good);
            if (phase_error(mid)) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        lo = good;
    }
    const auto err_lo = phase_error(lo);
    const auto err_hi = phase_error(hi);
    if (!err_lo || !err_hi || (*err_lo > 0.0) == (*err_hi > 0.0)) return RegisterTuning{};
    const auto root = bisect_root(
        [&](double d) { return phase_error(d).value_or(1.0); }, lo, hi, 1e-12, 400);
    if (!root) return RegisterTuning{};

    RegisterTuning out;
    out.delta0 = *root;
    RegisterParams tuned = reg;
    tuned.transition0.delta = out.delta0;
    const auto delta1 = match_amplitude_detuning(c1, gamma1, std::abs(reflection(tuned, 0, 0.0)));
    if (!delta1) return RegisterTuning{};
    out.delta1 = *delta1;
    out.ok = true;
    return out;
}

enum class CorrectionMode { U1_none, U2_phase_only, U3_amp_and_phase };

inline const char* to_string(CorrectionMode m) {
    switch (m) {
        case CorrectionMode::U1_none: return "U1";
        case CorrectionMode::U2_phase_only: return "U2";
        case CorrectionMode::U3_amp_and_phase: return "U3";
    }
    return "?";
}

struct DisorderSampleRow {
    int sample_id = 0;
    int rounds = 0;
    CorrectionMode mode = CorrectionMode::U1_none;
    double p_t = 0.0, f_a = 0.0, f_b = 0.0;
    double c_0a = 0.0, c_1a = 0.0, c_0b = 0.0, c_1b = 0.0;
    bool tuned = false;
};

struct DisorderBand {
    double mean = 0.0, p16 = 0.0, p50 = 0.0, p84 = 0.0;
};

struct DisorderStats {
    int rounds = 0;
    CorrectionMode mode = CorrectionMode::U1_none;
    DisorderBand p_t{}, infidelity_a{}, infidelity_b{};
    int n_used = 0;
    int n_failed = 0;
};

namespace detail {

inline DisorderBand band(std::vector<double> v) {
    DisorderBand b;
    if (v.empty()) return b;
    double sum = 0.0;
    for (double x : v) sum += x;
    b.mean = sum / v.size();
    std::sort(v.begin(), v.end());
    const auto quantile = [&](double q) {
        const double pos = q * (v.size() - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        if (i + 1 >= v.size()) return v.back();
        const double frac = pos - i;
        return v[i] * (1.0 - frac) + v[i + 1] * frac;
    };
    b.p16 = quantile(0.16);
    b.p50 = quantile(0.50);
    b.p84 = quantile(0.84);
    return b;
}

}  // namespace detail

struct DisorderStudyResult {
    std::vector<DisorderSampleRow> rows;
    std::vector<DisorderStats> stats;
};

// Monte Carlo disorder study: per (N, correction mode), mean and 16/84
// percentile bands of P_t, 1-F_A, 1-F_B over the tuned samples. Samples whose
// registers cannot be tuned are counted and excluded; more than 10% failures
// abort the run.
inline DisorderStudyResult disorder_study(const DisorderSpec& spec,
                                          const std::vector<int>& n_values,
                                          const std::vector<CorrectionMode>& modes,
                                          const SpectralPulse& pulse = SpectralPulse{},
                                          const GridParams& grid = GridParams{}) {
    DisorderStudyResult result;
    for (int n : n_values) {
        std::vector<std::vector<double>> pt(modes.size()), infa(modes.size()), infb(modes.size());
        int failed = 0;
        for (int m = 0; m < spec.n_samples; ++m) {
            auto [reg_a, reg_b] = sample_disorder(spec, static_cast<std::uint64_t>(m));
            const RegisterTuning tune_a = tune_register(reg_a, n);
            const RegisterTuning tune_b = tune_register(reg_b, n);
            DisorderSampleRow row;
            row.sample_id = m;
            row.rounds = n;
            row.c_0a = reg_a.cooperativity(0);
            row.c_1a = reg_a.cooperativity(1);
            row.c_0b = reg_b.cooperativity(0);
            row.c_1b = reg_b.cooperativity(1);
            if (!tune_a.ok || !tune_b.ok) {
                ++failed;
                for (std::size_t k = 0; k < modes.size(); ++k) {
                    row.mode = modes[k];
                    row.tuned = false;
                    result.rows.push_back(row);
                }
                continue;
            }
            reg_a.transition0.delta = tune_a.delta0;
            reg_a.transition1.delta = tune_a.delta1;
            reg_b.transition0.delta = tune_b.delta0;
            reg_b.transition1.delta = tune_b.delta1;

            ProtocolConfig cfg;
            cfg.rounds = n;
            cfg.pulse = pulse;
            cfg.grid = grid;
            cfg.register_a = reg_a;
            cfg.register_b = reg_b;

            const cxd r0a = reflection(reg_a, 0, 0.0);
            const cxd r0b = reflection(reg_b, 0, 0.0);
            for (std::size_t k = 0; k < modes.size(); ++k) {
                cfg.corrections.clear();
                if (modes[k] != CorrectionMode::U1_none) {
                    CorrectionOp op = register_correction(r0a, r0b, n);
                    if (modes[k] == CorrectionMode::U2_phase_only) op.amplitude = 1.0;
                    cfg.corrections.push_back(op);
                }
                const HeraldOutcome h = herald(cfg);
                row.mode = modes[k];
                row.tuned = true;
                row.p_t = h.p_total;
                row.f_a = h.f_a;
                row.f_b = h.f_b;
                result.rows.push_back(row);
                pt[k].push_back(h.p_total);
                infa[k].push_back(1.0 - h.f_a);
                infb[k].push_back(1.0 - h.f_b);
            }
        }
        if (failed > spec.n_samples / 10) {
            throw std::runtime_error("disorder_study: more than 10% of samples failed tuning");
        }
        for (std::size_t k = 0; k < modes.size(); ++k) {
            DisorderStats st;
            st.rounds = n;
            st.mode = modes[k];
            st.p_t = detail::band(pt[k]);
            st.infidelity_a = detail::band(infa[k]);
            st.infidelity_b = detail::band(infb[k]);
            st.n_used = static_cast<int>(pt[k].size());
            st.n_failed = failed;
            result.stats.push_back(st);
        }
    }
    return result;
}

// Interferometric phase noise: Gaussian relative phase delta between the two
// MZI arms, constant within one attempt.
struct PhaseNoiseModel {
    double delta_0 = 0.0;      // static offset (rad)
    double sigma_delta = 0.0;  // std of the fluctuating part (rad)
    std::optional<double> link_length{};

    double rms() const { return std::hypot(delta_0, sigma_delta); }
};

// Closed-form outcome at a fixed relative phase error delta.
inline HeraldOutcome phase_noise_outcome(cxd r_plus, cxd r_minus, double delta) {
    const double rp2 = std::norm(r_plus);
    const double rm2 = std::norm(r_minus);
    const double c2 = std::cos(0.5 * delta) * std::cos(0.5 * delta);
    const double s2 = 1.0 - c2;
    HeraldOutcome out;
    out.p_a = 0.5 * rm2 + rp2 * c2;
    out.p_b = 0.5 * rm2 + rp2 * s2;
    out.p_total = out.p_a + out.p_b;
    out.f_a = (out.p_a > 0.0) ? rm2 * c2 / (rm2 + 2.0 * rp2 * c2) : 0.0;
    out.f_b = (out.p_b > 0.0) ? rm2 * c2 / (rm2 + 2.0 * rp2 * s2) : 0.0;
    return out;
}

// Gaussian-averaged fidelity under the entangling condition,
//   F = (1 + cos(delta_0) exp(-sigma^2/2)) / 2.
inline double averaged_phase_noise_fidelity(const PhaseNoiseModel& model) {
    if (model.sigma_delta < 0.0) throw std::invalid_argument("phase noise: sigma >= 0 required");
    return 0.5 * (1.0 + std::cos(model.delta_0) * std::exp(-0.5 * model.sigma_delta * model.sigma_delta));
}

// Small-noise form F ~ 1 - delta_rms^2 / 4.
inline double small_noise_phase_fidelity(const PhaseNoiseModel& model) {
    const double r = model.rms();
    return 1.0 - 0.25 * r * r;
}

// delta_rms scales as L^(3/2) for delay-limited stabilized links.
inline double rms_length_scaling(double reference_length, double reference_rms,
                                 double target_length) {
    if (!(reference_length > 0.0) || !(target_length > 0.0)) {
        throw std::invalid_argument("rms_length_scaling: lengths must be positive");
    }
    return reference_rms * std::pow(target_length / reference_length, 1.5);
}

}  // namespace spinphoton
