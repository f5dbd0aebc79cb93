// Acceptance suite: runs the numbered protocol-level criteria end to end and
// prints one PASS/FAIL line per criterion. Usage: acceptance [k ...] runs the
// selected criteria (default: all). Exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "spinphoton/imperfections.hpp"
#include "spinphoton/io.hpp"
#include "spinphoton/optimize.hpp"
#include "spinphoton/protocol.hpp"
#include "spinphoton/rate.hpp"
#include "spinphoton/rng.hpp"
#include "spinphoton/three_level.hpp"

using namespace spinphoton;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

ProtocolConfig identical_config(double c, double delta, int rounds, double sigma = 0.2) {
    ProtocolConfig cfg;
    cfg.rounds = rounds;
    cfg.pulse.sigma_omega = sigma;
    cfg.register_a = symmetric_register(c, delta);
    cfg.register_b = cfg.register_a;
    return cfg;
}

// ---- 1. entangling-point reproduction -------------------------------------
Outcome criterion1() {
    Outcome out;
    std::ostringstream os;
    const DetuningSolution sol = solve_detuning(2.0, 4);
    const auto root = bisect_root(
        [](double d) {
            return std::arg(-reflection(symmetric_register(2.0, d), 0, 0.0)) - kPi / 8.0;
        },
        1.0, 10.0, 1e-12);
    const bool closed_ok = std::abs(sol.delta_plus - 4.979) <= 1e-3;
    const bool oracle_ok = root && std::abs(*root - sol.delta_plus) < 1e-8;
    const bool paper_ok = std::abs(sol.delta_plus - 4.9873) / 4.9873 <= 5e-3;

    ProtocolConfig cfg = identical_config(2.0, 4.9873, 4);
    const OptimizeResult opt = optimize_detuning(cfg, DetuningObjective::MaxFidelityA);
    const bool gauss_ok = opt.feasible && std::abs(opt.delta - 4.9873) / 4.9873 <= 1e-2;

    os << "delta+=" << format_double(sol.delta_plus) << " oracle=" << format_double(root.value_or(0.0))
       << " gauss*=" << format_double(opt.delta);
    out.pass = closed_ok && oracle_ok && paper_ok && gauss_ok;
    out.detail = os.str();
    return out;
}

// ---- 2. structural F_B = 1 -------------------------------------------------
Outcome criterion2() {
    Outcome out;
    int points = 0;
    for (double c : {0.5, 1.0, 1.5, 2.0, 3.0}) {
        for (int n : {2, 4, 6, 8}) {
            for (double sigma : {0.05, 0.1, 0.2, 0.5, 1.0}) {
                const double delta = 2.0 * n * c / kPi;
                const HeraldOutcome h = herald(identical_config(c, delta, n, sigma));
                ++points;
                if (h.f_b != 1.0) {
                    out.pass = false;
                    out.detail = "F_B != 1 at C=" + format_double(c);
                    return out;
                }
            }
        }
    }
    out.detail = std::to_string(points) + " grid points, F_B == 1 bitwise";
    return out;
}

// ---- 3. monochromatic limits ----------------------------------------------
Outcome criterion3() {
    Outcome out;
    CounterRng rng(20250810);
    int accepted = 0;
    double worst = 0.0;
    while (accepted < 20) {
        const double c = 0.5 + 2.5 * rng.uniform();
        const int n = 2 + static_cast<int>(19.0 * rng.uniform());
        const DetuningSolution sol = solve_detuning(c, n);
        if (sol.status != DetuningSolution::Status::TwoRoots) continue;
        ++accepted;
        const HeraldOutcome h = herald(identical_config(c, sol.delta_plus, n, 1e-3));
        const cxd r0 = reflection(symmetric_register(c, sol.delta_plus), 0, 0.0);
        const HeraldOutcome m = monochromatic_outcome(std::abs(r0), std::arg(-r0), n);
        worst = std::max({worst, std::abs(h.p_a - m.p_a), std::abs(h.p_b - m.p_b),
                          std::abs(h.p_total - m.p_total), std::abs(h.f_a - m.f_a),
                          std::abs(h.f_b - m.f_b)});
    }
    out.pass = worst < 1e-6;
    out.detail = "20 random feasible points, worst field deviation " + format_double(worst);
    return out;
}

// ---- 4. N-Delta law ---------------------------------------------------------
Outcome criterion4() {
    Outcome out;
    std::ostringstream os;
    double worst = 0.0;
    std::string worst_at;
    for (double c : {0.5, 1.0, 2.0}) {
        for (int n = 6; n <= 20; ++n) {
            const OptimizeResult res =
                optimize_detuning(identical_config(c, 1.0, n), DetuningObjective::MaxFidelityA);
            if (!res.feasible) {
                out.pass = false;
                out.detail = "optimizer infeasible";
                return out;
            }
            const double target = 2.0 * n * c / kPi;
            const double dev = std::abs(res.delta - target) / target;
            if (dev > worst) {
                worst = dev;
                worst_at = "C=" + format_double(c) + ",N=" + std::to_string(n);
            }
            if (dev > 0.05) out.pass = false;
        }
    }
    os << "worst |delta*-2NC/pi|/target = " << format_double(worst) << " at " << worst_at
       << " (bound 0.05)";
    out.detail = os.str();
    return out;
}

// ---- 5. rate speedup --------------------------------------------------------
Outcome criterion5() {
    Outcome out;
    std::ostringstream os;
    ProtocolConfig cfg = identical_config(2.0, 1.0, 5);
    cfg.pulse.n_t = 10.0;
    const RateResult scaled = max_rate_at_fidelity(cfg, 0.99);
    const OptimizeResult fixed = optimize_detuning(cfg, DetuningObjective::MaxFidelityA);
    const double rate_fixed = fixed.outcome.p_total / encoding_duration(5, 10, 0.2);
    const double speedup = scaled.rate / rate_fixed;
    const bool rate_ok = scaled.feasible && std::abs(scaled.rate - 0.023) / 0.023 <= 0.15;
    const bool nw_ok = std::abs(scaled.n_omega_star - 4.36) / 4.36 <= 0.15;
    const bool speedup_ok = speedup >= 6.5 && speedup <= 8.2;
    os << "R_pe=" << format_double(scaled.rate) << " (0.023+-15%), N_w*="
       << format_double(scaled.n_omega_star) << " (4.36+-15%), speedup=" << format_double(speedup)
       << " ([6.5,8.2])";
    out.pass = rate_ok && nw_ok && speedup_ok;
    out.detail = os.str();
    return out;
}

// ---- 6. loss-peaked probability ----------------------------------------------
Outcome criterion6() {
    Outcome out;
    std::ostringstream os;
    for (double c : {1.5, 2.0, 2.5}) {
        ProtocolConfig cfg = identical_config(c, 1.0, 1);
        cfg.imperfections.eta_i = 0.99;
        cfg.imperfections.eta_r = 0.9886;
        const LossOptimalResult res = loss_optimal_rounds(cfg, 0.99, 16);
        const bool pt_ok = res.feasible && res.outcome.p_total >= 0.42 && res.outcome.p_total <= 0.58;
        const bool n_ok = res.feasible && res.n_star >= 3 && res.n_star <= 8;
        if (!(pt_ok && n_ok)) out.pass = false;
        os << "C=" << format_double(c) << ": Pt=" << format_double(res.outcome.p_total)
           << " N*=" << res.n_star << (pt_ok && n_ok ? " ok; " : " OUT-OF-BAND; ");
    }
    os << "(band Pt in [0.42,0.58], N* in [3,8])";
    out.detail = os.str();
    return out;
}

// ---- 7. mode-mismatch compensation -------------------------------------------
Outcome criterion7() {
    Outcome out;
    std::ostringstream os;
    double worst_sel = 1.0, worst_id = 0.0;
    for (double delta : {30.0, 50.0, 100.0}) {
        const cxd r = reflection(symmetric_register(2.0, delta), 0, 0.0);
        for (double eta_m : {0.85, 0.9, 0.95}) {
            const double sel = std::norm(mismatched_reflection(r, eta_m, MismatchStrategy::SelectivePi));
            const double idn = std::norm(mismatched_reflection(r, eta_m, MismatchStrategy::Identity));
            worst_sel = std::min(worst_sel, sel);
            worst_id = std::max(worst_id, std::abs(idn - (2.0 * eta_m - 1.0) * (2.0 * eta_m - 1.0)));
            if (sel <= 0.99) out.pass = false;
            if (std::abs(idn - (2.0 * eta_m - 1.0) * (2.0 * eta_m - 1.0)) > 1e-2) out.pass = false;
        }
    }
    os << "min |r_sel|^2 = " << format_double(worst_sel) << " (>0.99), max |id - (2eta-1)^2| = "
       << format_double(worst_id) << " (<=1e-2)";
    out.detail = os.str();
    return out;
}

// ---- 8. phase-noise closure ----------------------------------------------------
Outcome criterion8() {
    Outcome out;
    std::ostringstream os;
    const std::vector<std::pair<double, double>> points = {
        {0.0, 0.02}, {0.0, 0.3},  {0.05, 0.1}, {0.085, 0.0}, {0.1, 0.2},
        {0.3, 0.05}, {0.3, 0.4},  {0.6, 0.1},  {1.0, 0.3},   {1.5, 0.5}};
    const int m = 100000;
    double worst_sigmas = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto [d0, sd] = points[k];
        CounterRng rng(424242, k);
        double acc = 0.0, acc2 = 0.0;
        for (int i = 0; i < m; ++i) {
            const double f = phase_noise_outcome(cxd(0, 0), cxd(1, 0), d0 + sd * rng.normal()).f_a;
            acc += f;
            acc2 += f * f;
        }
        const double mean = acc / m;
        const double se = std::sqrt(std::max(acc2 / m - mean * mean, 1e-30) / m);
        const double target = averaged_phase_noise_fidelity({d0, sd});
        const double sigmas = std::abs(mean - target) / std::max(se, 1e-15);
        worst_sigmas = std::max(worst_sigmas, sigmas);
        if (sigmas > 3.0) out.pass = false;
    }
    const double f_rms = averaged_phase_noise_fidelity({0.085, 0.0});
    if (!(f_rms >= 0.998) || !(small_noise_phase_fidelity({0.085, 0.0}) >= 0.998)) out.pass = false;
    os << "worst deviation " << format_double(worst_sigmas) << " standard errors (<=3); F(0.085)="
       << format_double(f_rms) << " (>=0.998)";
    out.detail = os.str();
    return out;
}

// ---- 9. disorder study ----------------------------------------------------------
Outcome criterion9() {
    Outcome out;
    std::ostringstream os;
    DisorderSpec spec;
    spec.sigma_rel = 0.2;
    spec.n_samples = 1000;
    spec.seed = 20250810;
    spec.reference = symmetric_register(2.0, 0.0);
    const std::vector<CorrectionMode> modes{CorrectionMode::U1_none, CorrectionMode::U2_phase_only,
                                            CorrectionMode::U3_amp_and_phase};
    const DisorderStudyResult res = disorder_study(spec, {5, 8}, modes);
    for (std::size_t i = 0; i < res.stats.size(); i += 3) {
        const DisorderStats& u1 = res.stats[i];
        const DisorderStats& u2 = res.stats[i + 1];
        const DisorderStats& u3 = res.stats[i + 2];
        const bool order_ok = u3.infidelity_a.p50 <= u2.infidelity_a.p50
                              && u2.infidelity_a.p50 <= u1.infidelity_a.p50;
        const bool level_ok = u1.infidelity_a.p50 >= 3e-3 && u1.infidelity_a.p50 <= 3e-2;
        const double hi = std::max({u1.p_t.mean, u2.p_t.mean, u3.p_t.mean});
        const double lo = std::min({u1.p_t.mean, u2.p_t.mean, u3.p_t.mean});
        const bool pt_ok = (hi - lo) / hi < 0.05;
        if (!(order_ok && level_ok && pt_ok)) out.pass = false;
        os << "N=" << u1.rounds << ": medians U1/U2/U3 = " << format_double(u1.infidelity_a.p50)
           << "/" << format_double(u2.infidelity_a.p50) << "/" << format_double(u3.infidelity_a.p50)
           << ", Pt spread " << format_double((hi - lo) / hi) << "; ";
    }
    out.detail = os.str() + "(M=1000, sigma=0.2)";
    return out;
}

// ---- 10. time-domain oracle -------------------------------------------------------
Outcome criterion10() {
    Outcome out;
    std::ostringstream os;
    const int n = 2;
    SpectralPulse pulse{1.0 / 20.0, 0.0, 10.0};
    const double delta = solve_detuning(2.0, n).delta_plus;
    RegisterParams reg = symmetric_register(2.0, delta);
    DDSchedule sched = make_dd_schedule(pulse, n, DetuningModulation::Stepwise, delta);
    const ThreeLevelRun run = run_three_level(pulse, sched, reg);
    const HeraldOutcome td = temporal_herald(run.u0, run.u1);

    // independent frequency-domain route: per-pair coefficients r_s r_off
    const QuadratureGrid grid = make_grid(pulse);
    double ipp = 0.0, imm = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid.nodes[i];
        const double a = spectrum(pulse, w);
        const cxd roff = empty_cavity_reflection(reg.cavity, w);
        RegisterParams flip = reg;
        flip.transition0.delta = -delta;
        const cxd e0 = pow_n(reflection(reg, 0, w) * roff, n);
        const cxd e1 = pow_n(roff * reflection(flip, 0, w), n);
        ipp += grid.weights[i] * a * a * std::norm(0.5 * (e0 + e1));
        imm += grid.weights[i] * a * a * std::norm(0.5 * (e0 - e1));
    }
    const double p_a = 0.5 * (2.0 * ipp + imm), p_b = 0.5 * imm;
    const double da = std::abs(td.p_a - p_a) / p_a;
    const double db = std::abs(td.p_b - p_b) / p_b;
    const double df = std::abs(td.f_a - p_b / p_a) / (p_b / p_a);
    out.pass = da < 1e-3 && db < 1e-3 && df < 1e-3;
    os << "rel dev PA/PB/FA = " << format_double(da) << "/" << format_double(db) << "/"
       << format_double(df) << " (<=1e-3)";
    out.detail = os.str();
    return out;
}

// ---- 11. sinusoidal three-level fidelity ---------------------------------------------
Outcome criterion11() {
    Outcome out;
    std::ostringstream os;
    const int n = 4;
    const double delta = solve_detuning(2.0, n).delta_plus;
    RegisterParams reg = symmetric_register(2.0, delta);

    SpectralPulse step_pulse{0.2, 0.0, 10.0};
    DDSchedule step = make_dd_schedule(step_pulse, n, DetuningModulation::Stepwise, delta);
    const ThreeLevelRun step_run = run_three_level(step_pulse, step, reg);
    const double f_step = temporal_herald(step_run.u0, step_run.u1).f_a;

    for (double n_t : {12.0, 16.0, 20.0}) {
        SpectralPulse pulse{0.2, 0.0, n_t};
        const double seed = effective_sinusoid_amplitude(delta, n_t);
        const double refined = refine_sinusoid_amplitude(pulse, reg, n, seed);
        DDSchedule s = make_dd_schedule(pulse, n, DetuningModulation::Sinusoid, refined);
        const ThreeLevelRun run = run_three_level(pulse, s, reg);
        const double f_sin = temporal_herald(run.u0, run.u1).f_a;
        const double formula_ratio = 1.0 + kPi * kPi / (4.0 * n_t * n_t);
        const double ratio_dev = std::abs(refined / delta - formula_ratio) / formula_ratio;
        const bool ok = f_sin > 0.99 && f_sin <= f_step + 1e-12 && ratio_dev <= 1e-2;
        if (!ok) out.pass = false;
        os << "N_t=" << format_double(n_t) << ": F_sin=" << format_double(f_sin)
           << " ratio_dev=" << format_double(ratio_dev) << (ok ? " ok; " : " FAIL; ");
    }
    os << "step F_A=" << format_double(f_step);
    out.detail = os.str();
    return out;
}

// ---- 12. property suite -----------------------------------------------------------
Outcome criterion12() {
    Outcome out;
    std::vector<std::string> failures;

    // passivity and unitarity
    {
        RegisterParams lossless = symmetric_register(2.0, 5.0, symmetric_cavity(200.0));
        lossless.transition0.gamma_se = 0.0;
        lossless.transition1.gamma_se = 0.0;
        RegisterParams lossy = symmetric_register(1.3, 2.0, CavityParams{180.0, 15.0, 5.0});
        for (int i = 0; i <= 400; ++i) {
            const double w = -40.0 + 0.2 * i;
            const double u = std::norm(reflection(lossless, 0, w))
                             + std::norm(transmission(lossless, 0, w));
            if (std::abs(u - 1.0) > 1e-12) failures.push_back("unitarity");
            const double p = std::norm(reflection(lossy, 0, w))
                             + std::norm(transmission(lossy, 0, w));
            if (p > 1.0 + 1e-12) failures.push_back("passivity");
        }
    }
    // conjugate symmetry
    {
        RegisterParams reg = symmetric_register(1.7, 6.1);
        for (int i = 0; i < 1000; ++i) {
            const double w = -20.0 + 40.0 * i / 999.0;
            if (std::abs(reflection(reg, 1, w) - std::conj(reflection(reg, 0, -w))) > 1e-12) {
                failures.push_back("conjugate-symmetry");
                break;
            }
        }
    }
    // Parseval / normalization
    {
        SpectralPulse p{0.2};
        const QuadratureGrid grid = make_grid(p);
        double norm = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            norm += grid.weights[i] * std::pow(spectrum(p, grid.nodes[i]), 2);
        }
        const double st = p.sigma_t();
        double tnorm = 0.0;
        const int nt = 4001;
        const double h = 20.0 * st / (nt - 1);
        for (int i = 0; i < nt; ++i) {
            const double t = -10.0 * st + i * h;
            tnorm += ((i == 0 || i == nt - 1) ? 0.5 * h : h) * std::pow(temporal(p, t), 2);
        }
        if (std::abs(norm - 1.0) > 1e-9 || std::abs(tnorm - 1.0) > 1e-9) {
            failures.push_back("parseval");
        }
    }
    // grid-doubling convergence
    {
        ProtocolConfig cfg = identical_config(2.0, 4.9873, 4);
        cfg.grid = GridParams{10.0, 4001};
        const HeraldOutcome coarse = herald(cfg);
        cfg.grid = GridParams{10.0, 8001};
        const HeraldOutcome fine = herald(cfg);
        if (std::abs(coarse.f_a - fine.f_a) > 1e-6
            || std::abs(coarse.p_total - fine.p_total) > 1e-6) {
            failures.push_back("grid-doubling");
        }
    }
    // determinism of seeded runs
    {
        DisorderSpec spec;
        spec.sigma_rel = 0.2;
        spec.n_samples = 30;
        spec.seed = 77;
        spec.reference = symmetric_register(2.0, 0.0);
        const std::vector<CorrectionMode> modes{CorrectionMode::U3_amp_and_phase};
        const DisorderStudyResult a = disorder_study(spec, {4}, modes);
        const DisorderStudyResult b = disorder_study(spec, {4}, modes);
        if (a.rows.size() != b.rows.size()) {
            failures.push_back("determinism");
        } else {
            for (std::size_t i = 0; i < a.rows.size(); ++i) {
                if (a.rows[i].p_t != b.rows[i].p_t || a.rows[i].f_a != b.rows[i].f_a) {
                    failures.push_back("determinism");
                    break;
                }
            }
        }
    }

    out.pass = failures.empty();
    out.detail = failures.empty() ? "passivity, unitarity, conjugate symmetry, Parseval, "
                                    "grid-doubling, determinism all green"
                                  : "failed: " + failures.front();
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria = {
        criterion1, criterion2, criterion3, criterion4,  criterion5,  criterion6,
        criterion7, criterion8, criterion9, criterion10, criterion11, criterion12};
    const std::vector<const char*> names = {
        "entangling-point reproduction", "perfect-herald invariant", "monochromatic limits",
        "N-Delta law",                   "rate speedup",             "loss-peaked probability",
        "mode-mismatch compensation",    "phase-noise closure",      "disorder study",
        "time-domain oracle",            "sinusoidal three-level",   "property suite"};

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k >= 1 && k <= 12) selected.push_back(k);
    }
    if (selected.empty()) {
        for (int k = 1; k <= 12; ++k) selected.push_back(k);
    }

    int failures = 0;
    for (int k : selected) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k - 1]();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %2d [%s]: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", k,
                    names[k - 1], o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures;
}
