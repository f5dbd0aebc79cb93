#pragma once

// Gaussian spectral/temporal envelopes and the quadrature grids the herald
// integrals run on.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spinphoton/cavity.hpp"

namespace spinphoton {

// Gaussian photon, u~(w) = (pi s^2)^{-1/4} exp(-(w-c)^2 / 2 s^2), normalized
// as integral |u~|^2 dw = 1. n_t is the number of temporal widths covered by
// a time-domain simulation window.
struct SpectralPulse {
    double sigma_omega = 0.2;  // gamma/5 width-fixed default
    double center = 0.0;
    double n_t = 10.0;

    double sigma_t() const { return 1.0 / sigma_omega; }

    friend bool operator==(const SpectralPulse&, const SpectralPulse&) = default;
};

inline void validate(const SpectralPulse& p) {
    detail::require_finite(p.sigma_omega, "sigma_omega");
    detail::require_finite(p.center, "center");
    if (!(p.sigma_omega > 0.0)) throw std::invalid_argument("pulse: sigma_omega > 0 required");
    if (!(p.n_t >= 1.0)) throw std::invalid_argument("pulse: n_t >= 1 required");
}

inline double spectrum(const SpectralPulse& p, double omega) {
    const double x = (omega - p.center) / p.sigma_omega;
    return std::pow(kPi * p.sigma_omega * p.sigma_omega, -0.25) * std::exp(-0.5 * x * x);
}

// Fourier pair of spectrum(); sigma_t = 1/sigma_omega, centered at t = 0.
inline double temporal(const SpectralPulse& p, double t) {
    const double st = p.sigma_t();
    const double x = t / st;
    return std::pow(kPi * st * st, -0.25) * std::exp(-0.5 * x * x);
}

// sigma_omega = Delta / N_omega, the width-scaling pulse scheme.
inline double width_scaling_sigma(double delta, double n_omega_scale) {
    if (!(delta > 0.0) || !(n_omega_scale > 0.0)) {
        throw std::invalid_argument("width_scaling_sigma: positive inputs required");
    }
    return delta / n_omega_scale;
}

struct GridParams {
    double span_sigmas = 10.0;
    int n_points = 4001;

    friend bool operator==(const GridParams&, const GridParams&) = default;
};

// Uniform symmetric trapezoid grid around the pulse center. The integrands
// are smooth and rapidly decaying, so trapezoid converges superalgebraically;
// the normalization is still checked per construction.
struct QuadratureGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
    double span_sigmas = 0.0;

    std::size_t size() const { return nodes.size(); }
};

inline QuadratureGrid make_grid(const SpectralPulse& pulse, double span_sigmas = 10.0,
                                int n_points = 4001) {
    validate(pulse);
    if (!(span_sigmas >= 6.0)) {
        throw std::invalid_argument("make_grid: span_sigmas >= 6 required (Gaussian mass outside)");
    }
    if (n_points < 401 || n_points % 2 == 0) {
        throw std::invalid_argument("make_grid: n_points >= 401 and odd required");
    }
    QuadratureGrid grid;
    grid.span_sigmas = span_sigmas;
    grid.nodes.resize(n_points);
    grid.weights.resize(n_points);
    const double half = span_sigmas * pulse.sigma_omega;
    const double h = 2.0 * half / (n_points - 1);
    for (int i = 0; i < n_points; ++i) {
        grid.nodes[i] = pulse.center - half + i * h;
        grid.weights[i] = (i == 0 || i == n_points - 1) ? 0.5 * h : h;
    }
    double norm = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const double a = spectrum(pulse, grid.nodes[i]);
        norm += grid.weights[i] * a * a;
    }
    if (std::abs(norm - 1.0) > 1e-9) {
        throw std::runtime_error("make_grid: quadrature normalization check failed");
    }
    return grid;
}

inline QuadratureGrid make_grid(const SpectralPulse& pulse, const GridParams& gp) {
    return make_grid(pulse, gp.span_sigmas, gp.n_points);
}

}  // namespace spinphoton
