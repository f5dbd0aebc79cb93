#pragma once

// Spin-conditioned reflection/transmission of a cavity-spin register and the
// analytic limits used by the protocol layer. All rates are expressed in
// units of a reference transition linewidth gamma_ref = 1.

#include <cmath>
#include <complex>
#include <stdexcept>

namespace spinphoton {

using cxd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

namespace detail {
inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument(std::string("non-finite parameter: ") + what);
    }
}
}  // namespace detail

// One optical transition. The total linewidth gamma = gamma_se + 2*gamma_phi.
struct TransitionParams {
    double g = 0.0;          // cavity coupling strength
    double gamma_se = 1.0;   // spontaneous emission rate
    double gamma_phi = 0.0;  // pure dephasing rate
    double delta = 0.0;      // transition-cavity detuning

    double gamma() const { return gamma_se + 2.0 * gamma_phi; }

    friend bool operator==(const TransitionParams&, const TransitionParams&) = default;
};

struct CavityParams {
    double kappa_l = 200.0;  // left (coupling) mirror decay rate
    double kappa_r = 0.0;    // right mirror; 0 for a single-sided cavity
    double kappa_i = 0.0;    // intrinsic loss rate

    double kappa() const { return kappa_l + kappa_r + kappa_i; }
    double eta_i() const { return kappa_l / (kappa_l + kappa_i); }

    friend bool operator==(const CavityParams&, const CavityParams&) = default;
};

// Single-sided cavity of total decay `kappa` with a fraction 1-eta_i of it
// intrinsic. eta_i = 1 reproduces the lossless single-sided cavity.
inline CavityParams single_sided_cavity(double kappa, double eta_i = 1.0) {
    if (!(kappa > 0.0) || !(eta_i > 0.0) || eta_i > 1.0) {
        throw std::invalid_argument("single_sided_cavity: need kappa > 0 and eta_i in (0,1]");
    }
    return CavityParams{eta_i * kappa, 0.0, (1.0 - eta_i) * kappa};
}

inline CavityParams symmetric_cavity(double kappa, double kappa_i = 0.0) {
    if (!(kappa > 0.0) || kappa_i < 0.0 || kappa_i >= kappa) {
        throw std::invalid_argument("symmetric_cavity: need kappa > kappa_i >= 0");
    }
    const double mirror = 0.5 * (kappa - kappa_i);
    return CavityParams{mirror, mirror, kappa_i};
}

enum class RegisterMode { FourLevel, ThreeLevel };

// A cavity with its two ground-state transitions. In ThreeLevel mode
// transition1 is the uncoupled branch (g = 0 semantics).
struct RegisterParams {
    CavityParams cavity{};
    TransitionParams transition0{};
    TransitionParams transition1{};
    RegisterMode mode = RegisterMode::FourLevel;

    const TransitionParams& transition(int s) const {
        return s == 0 ? transition0 : transition1;
    }
    TransitionParams& transition(int s) { return s == 0 ? transition0 : transition1; }

    // C_s = 4 g_s^2 / (kappa gamma_s)
    double cooperativity(int s) const {
        const TransitionParams& t = transition(s);
        const double gam = t.gamma();
        if (!(cavity.kappa() > 0.0) || !(gam > 0.0)) {
            throw std::invalid_argument("cooperativity: kappa and gamma must be positive");
        }
        return 4.0 * t.g * t.g / (cavity.kappa() * gam);
    }

    friend bool operator==(const RegisterParams&, const RegisterParams&) = default;
};

// Register with two symmetric transitions at detunings +-delta, coupling set
// from the cooperativity C (with gamma = 1): g = sqrt(C kappa / 4).
inline RegisterParams symmetric_register(double cooperativity, double delta,
                                         CavityParams cavity = CavityParams{}) {
    detail::require_finite(cooperativity, "C");
    detail::require_finite(delta, "delta");
    if (cooperativity < 0.0) throw std::invalid_argument("symmetric_register: C >= 0 required");
    const double g = std::sqrt(cooperativity * cavity.kappa() / 4.0);
    RegisterParams reg;
    reg.cavity = cavity;
    reg.transition0 = TransitionParams{g, 1.0, 0.0, delta};
    reg.transition1 = TransitionParams{g, 1.0, 0.0, -delta};
    return reg;
}

// Empty-cavity reflection r_off(omega) = 1 - 2 kappa_l / (kappa - 2 i omega).
// Equals the spin-coupled reflection with g = 0, for any gamma and delta.
inline cxd empty_cavity_reflection(const CavityParams& cav, double omega) {
    detail::require_finite(omega, "omega");
    if (!(cav.kappa() > 0.0)) throw std::invalid_argument("empty_cavity_reflection: kappa > 0 required");
    return 1.0 - 2.0 * cav.kappa_l / cxd(cav.kappa(), -2.0 * omega);
}

// Reflection coefficient for spin state s at detuning omega from the cavity,
//   r_s(w) = 1 - 2 kappa_l [gamma + 2i(Delta_s - w)]
//                / {(kappa - 2iw)[gamma + 2i(Delta_s - w)] + 4 g^2}.
// The incident photon is resonant with the cavity; all other detunings are
// measured from it.
inline cxd reflection(const RegisterParams& reg, int s, double omega) {
    detail::require_finite(omega, "omega");
    const TransitionParams& t = reg.transition(s);
    const double g = (reg.mode == RegisterMode::ThreeLevel && s == 1) ? 0.0 : t.g;
    if (g == 0.0) return empty_cavity_reflection(reg.cavity, omega);
    detail::require_finite(t.delta, "delta");
    const cxd spin(t.gamma(), 2.0 * (t.delta - omega));
    const cxd cav(reg.cavity.kappa(), -2.0 * omega);
    return 1.0 - 2.0 * reg.cavity.kappa_l * spin / (cav * spin + 4.0 * g * g);
}

// Transmission through a two-sided cavity; the protocol variant assumes a
// symmetric cavity (kappa_l = kappa_r).
inline cxd transmission(const RegisterParams& reg, int s, double omega) {
    detail::require_finite(omega, "omega");
    if (!(reg.cavity.kappa_l > 0.0) || !(reg.cavity.kappa_r > 0.0)) {
        throw std::invalid_argument("transmission: kappa_l > 0 and kappa_r > 0 required");
    }
    const TransitionParams& t = reg.transition(s);
    const double g = (reg.mode == RegisterMode::ThreeLevel && s == 1) ? 0.0 : t.g;
    const cxd spin(t.gamma(), 2.0 * (t.delta - omega));
    const cxd cav(reg.cavity.kappa(), -2.0 * omega);
    return -2.0 * std::sqrt(reg.cavity.kappa_l * reg.cavity.kappa_r) * spin
           / (cav * spin + 4.0 * g * g);
}

// Large-detuning per-round reflection, O = 2 Delta / gamma:
//   theta = 2C/O,  R = 1 - theta^2/(2C),  so R^2 = 1 - 4C/O^2 + O(1/O^3).
struct DispersiveLimit {
    double magnitude;      // R
    double phase;          // theta, phase picked per round
    bool asymptotic_ok;    // O >= 5
};

inline DispersiveLimit large_detuning_expansion(double cooperativity, double O) {
    detail::require_finite(cooperativity, "C");
    detail::require_finite(O, "O");
    if (!(O > 0.0)) throw std::domain_error("large_detuning_expansion: O > 0 required");
    const double theta = 2.0 * cooperativity / O;
    const double R = 1.0 - theta * theta / (2.0 * cooperativity);
    return DispersiveLimit{R, theta, O >= 5.0};
}

// Steady-state excited population under cavity-resonant drive,
//   p_e = 16 g^2 kappa_l |a0|^2 / [(kappa gamma + 4 g^2)^2 + (2 kappa Delta)^2].
inline double excited_population_ss(const RegisterParams& reg, double drive_amplitude,
                                    double delta) {
    detail::require_finite(drive_amplitude, "drive_amplitude");
    detail::require_finite(delta, "delta");
    const TransitionParams& t = reg.transition0;
    const double kappa = reg.cavity.kappa();
    const double a = kappa * t.gamma() + 4.0 * t.g * t.g;
    const double b = 2.0 * kappa * delta;
    return 16.0 * t.g * t.g * reg.cavity.kappa_l * drive_amplitude * drive_amplitude
           / (a * a + b * b);
}

// Multiplicative large-detuning loss model: r -> eta_i^2 sqrt(eta_r) r.
// The exact eta_i dependence is available through reflection() with
// kappa_i = kappa_l (1 - eta_i) / eta_i inserted into the cavity.
inline cxd lossy_effective_reflection(cxd r, double eta_i, double eta_r) {
    if (!(eta_i > 0.0) || eta_i > 1.0 || !(eta_r > 0.0) || eta_r > 1.0) {
        throw std::domain_error("lossy_effective_reflection: efficiencies must be in (0,1]");
    }
    return eta_i * eta_i * std::sqrt(eta_r) * r;
}

// How the promptly reflected unmatched fiber mode is recombined after the
// single-mode-fiber projection.
enum class MismatchStrategy {
    Identity,     // no compensation: r~ = eta_m r + (1 - eta_m)
    Separate,     // unmatched mode discarded: r~ = eta_m r
    SelectivePi,  // pi phase on the unmatched mode: r~ = eta_m r - (1 - eta_m)
};

inline cxd mismatched_reflection(cxd r, double eta_m, MismatchStrategy strategy) {
    if (!(eta_m > 0.0) || eta_m > 1.0) {
        throw std::domain_error("mismatched_reflection: eta_m must be in (0,1]");
    }
    switch (strategy) {
        case MismatchStrategy::Identity: return eta_m * r + (1.0 - eta_m);
        case MismatchStrategy::Separate: return eta_m * r;
        case MismatchStrategy::SelectivePi: return eta_m * r - (1.0 - eta_m);
    }
    throw std::invalid_argument("mismatched_reflection: unknown strategy");
}

// Photon loss induced by the fiber-mode filter for unmatched-mode phase
// theta_n; minimized at theta_n = pi.
inline double mismatch_filter_loss(double eta_m, double R, double theta, double theta_n) {
    return eta_m * (1.0 - eta_m) * (R * R + 1.0 + 2.0 * R * std::cos(theta_n) * std::cos(theta));
}

inline double mismatch_filter_loss_min(double eta_m, double R, double theta) {
    return eta_m * (1.0 - eta_m) * (R * R + 1.0 - 2.0 * R * std::cos(theta));
}

}  // namespace spinphoton
