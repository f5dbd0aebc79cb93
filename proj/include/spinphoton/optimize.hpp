#pragma once

// Derivative-free scalar search helpers. Deterministic for fixed inputs.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

namespace spinphoton {

// Golden-section minimization of f on [lo, hi] to absolute x tolerance.
template <class F>
double golden_section_min(F&& f, double lo, double hi, double tol_x, int max_iter = 200) {
    if (!(hi > lo)) throw std::invalid_argument("golden_section_min: empty bracket");
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < max_iter && (b - a) > tol_x; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Bisection root of f on [lo, hi]; requires a sign change.
template <class F>
std::optional<double> bisect_root(F&& f, double lo, double hi, double tol_x, int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) return std::nullopt;
    for (int i = 0; i < max_iter && (hi - lo) > tol_x; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace spinphoton
