#include <catch2/catch_amalgamated.hpp>

#include "spinphoton/cavity.hpp"
#include "spinphoton/optimize.hpp"
#include "spinphoton/protocol.hpp"
#include "spinphoton/rng.hpp"

using namespace spinphoton;

TEST_CASE("empty cavity limits") {
    CavityParams cav = single_sided_cavity(200.0);
    CHECK(std::abs(empty_cavity_reflection(cav, 0.0) - cxd(-1.0, 0.0)) < 1e-15);
    CHECK(std::abs(empty_cavity_reflection(cav, 1e9) - cxd(1.0, 0.0)) < 1e-6);
    CHECK(std::abs(empty_cavity_reflection(cav, -1e9) - cxd(1.0, 0.0)) < 1e-6);
    for (double w : {0.0, 0.3, 5.0, 120.0, -77.0}) {
        CHECK(std::abs(std::abs(empty_cavity_reflection(cav, w)) - 1.0) < 1e-14);
    }
}

TEST_CASE("on-resonance reflection closed form") {
    // g = 0 empty-cavity limit
    RegisterParams reg = symmetric_register(0.0, 0.0);
    CHECK(std::abs(reflection(reg, 0, 0.0) - cxd(-1.0, 0.0)) < 1e-15);

    // Delta = 0, omega = 0: r = (C-1)/(C+1)
    for (double c : {0.25, 1.0, 2.0, 7.5}) {
        reg = symmetric_register(c, 0.0);
        CHECK(std::abs(reflection(reg, 0, 0.0) - cxd((c - 1.0) / (c + 1.0), 0.0)) < 1e-13);
    }
    reg = symmetric_register(1.0, 0.0);
    CHECK(std::abs(reflection(reg, 0, 0.0)) < 1e-14);
}

TEST_CASE("entangling phase at the published detuning") {
    RegisterParams reg = symmetric_register(2.0, 4.9873);
    CHECK(std::abs(std::arg(-reflection(reg, 0, 0.0)) - kPi / 8.0) < 2e-2);
}

TEST_CASE("closed-form detuning reproduces pi/8 exactly") {
    const DetuningSolution sol = solve_detuning(2.0, 4);
    RegisterParams reg = symmetric_register(2.0, sol.delta_plus);
    CHECK(std::abs(std::arg(-reflection(reg, 0, 0.0)) - kPi / 8.0) < 1e-10);

    // independent numeric root of arg(-r_0(0)) = pi/8
    const auto root = bisect_root(
        [](double d) {
            RegisterParams r = symmetric_register(2.0, d);
            return std::arg(-reflection(r, 0, 0.0)) - kPi / 8.0;
        },
        1.0, 10.0, 1e-12);
    REQUIRE(root.has_value());
    CHECK(std::abs(*root - sol.delta_plus) < 1e-9);
}

TEST_CASE("transmission limits and lossless unitarity") {
    RegisterParams reg = symmetric_register(0.0, 0.0, symmetric_cavity(200.0));
    CHECK(std::abs(transmission(reg, 0, 0.0) - cxd(-1.0, 0.0)) < 1e-14);

    // gamma = 0, kappa_i = 0: |r|^2 + |t|^2 = 1 at every omega
    reg = symmetric_register(2.0, 5.0, symmetric_cavity(200.0));
    reg.transition0.gamma_se = 0.0;
    reg.transition1.gamma_se = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double w = -30.0 + 0.3 * i;
        const double total = std::norm(reflection(reg, 0, w)) + std::norm(transmission(reg, 0, w));
        CHECK(std::abs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("transmission first-order relations at large detuning") {
    // theta ~ 2 theta_t and (1-|t|^2)/(1-|r|^2) -> (2+C)/4
    const double c = 2.0, delta = 50.0;
    RegisterParams refl_reg = symmetric_register(c, delta);
    RegisterParams trans_reg = symmetric_register(c, delta, symmetric_cavity(200.0));
    const cxd r = reflection(refl_reg, 0, 0.0);
    const cxd t = transmission(trans_reg, 0, 0.0);
    const double theta = std::arg(-r);
    const double theta_t = std::arg(-t);
    CHECK(std::abs(theta - 2.0 * theta_t) < theta * theta);

    const double c1 = 1.0;
    RegisterParams refl1 = symmetric_register(c1, delta);
    RegisterParams trans1 = symmetric_register(c1, delta, symmetric_cavity(200.0));
    const double one_minus_r2 = 1.0 - std::norm(reflection(refl1, 0, 0.0));
    const double one_minus_t2 = 1.0 - std::norm(transmission(trans1, 0, 0.0));
    CHECK(one_minus_t2 / one_minus_r2 == Catch::Approx((2.0 + c1) / 4.0).margin(5e-3));

    // double repetitions: round counts scale as theta / theta_t ~ 2
    CHECK(theta / theta_t == Catch::Approx(2.0).margin(0.1));
}

TEST_CASE("large detuning expansion") {
    const auto lim = large_detuning_expansion(1.0, 100.0);
    CHECK(lim.phase == Catch::Approx(0.02));
    RegisterParams reg = symmetric_register(1.0, 50.0);
    CHECK(std::abs(std::arg(-reflection(reg, 0, 0.0)) - lim.phase) < 1e-5);

    const auto lim20 = large_detuning_expansion(1.0, 20.0);
    CHECK(lim20.magnitude * lim20.magnitude == Catch::Approx(1.0 - 4.0 / 400.0).margin(1e-4));

    const auto far = large_detuning_expansion(2.7, 1e9);
    CHECK(far.magnitude == Catch::Approx(1.0));
    CHECK(far.phase == Catch::Approx(0.0).margin(1e-8));
    CHECK_FALSE(large_detuning_expansion(1.0, 4.0).asymptotic_ok);
    CHECK_THROWS_AS(large_detuning_expansion(1.0, -2.0), std::domain_error);
}

TEST_CASE("expansion remainder bound") {
    // |arg(-r_0(0)) - 2C/O| <= 10 (2C/O)^3 for O >= 20
    for (double c : {0.5, 1.0, 1.7, 2.4, 3.0}) {
        for (double O = 20.0; O <= 200.0; O *= 1.5) {
            RegisterParams reg = symmetric_register(c, O / 2.0);
            const double theta = 2.0 * c / O;
            CHECK(std::abs(std::arg(-reflection(reg, 0, 0.0)) - theta)
                  <= 10.0 * theta * theta * theta);
        }
    }
}

TEST_CASE("steady-state excited population") {
    RegisterParams reg = symmetric_register(2.0, 0.0);
    const double g = reg.transition0.g;
    const double peak = excited_population_ss(reg, 1.0, 0.0);
    CHECK(peak == Catch::Approx(16.0 * g * g * 200.0 / std::pow(200.0 + 4.0 * g * g, 2)));
    CHECK(excited_population_ss(reg, 1.0, 5.0) < peak);

    const double ratio = excited_population_ss(reg, 1.0, 2e3) / excited_population_ss(reg, 1.0, 1e3);
    CHECK(ratio == Catch::Approx(0.25).margin(1e-4));

    RegisterParams off = symmetric_register(0.0, 0.0);
    CHECK(excited_population_ss(off, 1.0, 3.0) == 0.0);
}

TEST_CASE("multiplicative loss model") {
    const cxd r(-0.9, 0.1);
    CHECK(lossy_effective_reflection(r, 1.0, 1.0) == r);
    CHECK(std::norm(lossy_effective_reflection(cxd(1.0, 0.0), 0.99, 0.9886))
          == Catch::Approx(0.9497).margin(1e-4));
    CHECK_THROWS_AS(lossy_effective_reflection(r, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(lossy_effective_reflection(r, 1.0, 1.2), std::domain_error);
}

TEST_CASE("exact intrinsic-loss reflection tracks eta_i^4 at entangling detunings") {
    const double eta_i = 0.99;
    for (int n : {4, 5, 6, 8}) {
        const double delta = solve_detuning(2.0, n).delta_plus;
        RegisterParams ideal = symmetric_register(2.0, delta);
        RegisterParams lossy = symmetric_register(2.0, delta, single_sided_cavity(200.0, eta_i));
        const double ratio = std::norm(reflection(lossy, 0, 0.0)) / std::norm(reflection(ideal, 0, 0.0));
        CHECK(ratio == Catch::Approx(std::pow(eta_i, 4)).margin(2e-3));
    }
}

TEST_CASE("mode mismatch strategies") {
    const cxd r(-1.0, 0.0);
    CHECK(mismatched_reflection(r, 1.0, MismatchStrategy::Identity) == r);
    CHECK(mismatched_reflection(r, 1.0, MismatchStrategy::SelectivePi) == r);
    CHECK(std::norm(mismatched_reflection(r, 0.9, MismatchStrategy::Identity))
          == Catch::Approx(0.64));
    CHECK(std::norm(mismatched_reflection(r, 0.9, MismatchStrategy::Separate))
          == Catch::Approx(0.81));
    CHECK(std::norm(mismatched_reflection(r, 0.9, MismatchStrategy::SelectivePi))
          == Catch::Approx(1.0));
}

TEST_CASE("filter loss is minimized at theta_n = pi") {
    const double eta_m = 0.9, R = 0.97, theta = 0.12;
    const double at_pi = mismatch_filter_loss(eta_m, R, theta, kPi);
    CHECK(at_pi == Catch::Approx(mismatch_filter_loss_min(eta_m, R, theta)));
    for (int i = 0; i <= 24; ++i) {
        const double tn = -kPi + 2.0 * kPi * i / 24.0;
        CHECK(mismatch_filter_loss(eta_m, R, theta, tn) >= at_pi - 1e-12);
    }
    // vanishes in the R -> 1, theta -> 0 limit
    CHECK(mismatch_filter_loss_min(eta_m, 1.0, 0.0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("conjugate symmetry for symmetric detunings") {
    RegisterParams reg = symmetric_register(1.7, 6.1);
    for (int i = 0; i < 1000; ++i) {
        const double w = -20.0 + 40.0 * i / 999.0;
        const cxd lhs = reflection(reg, 1, w);
        const cxd rhs = std::conj(reflection(reg, 0, -w));
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("passivity over random parameters") {
    CounterRng rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        CavityParams cav{50.0 + 300.0 * rng.uniform(), 100.0 * rng.uniform(),
                         5.0 * rng.uniform()};
        RegisterParams reg;
        reg.cavity = cav;
        reg.transition0 = TransitionParams{15.0 * rng.uniform(), 0.2 + 2.0 * rng.uniform(),
                                           0.5 * rng.uniform(), -10.0 + 20.0 * rng.uniform()};
        reg.transition1 = reg.transition0;
        const double w = -50.0 + 100.0 * rng.uniform();
        const double r2 = std::norm(reflection(reg, 0, w));
        CHECK(r2 <= 1.0 + 1e-12);
        if (cav.kappa_r > 0.0) {
            CHECK(r2 + std::norm(transmission(reg, 0, w)) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("g = 0 reduces to the empty cavity exactly") {
    RegisterParams reg = symmetric_register(0.0, 3.3);
    for (double w : {-8.0, -0.2, 0.0, 1.7, 44.0}) {
        CHECK(reflection(reg, 0, w) == empty_cavity_reflection(reg.cavity, w));
    }
    // three-level mode: transition 1 is the uncoupled branch
    RegisterParams three = symmetric_register(2.0, 4.0);
    three.mode = RegisterMode::ThreeLevel;
    for (double w : {-1.0, 0.0, 0.5}) {
        CHECK(reflection(three, 1, w) == empty_cavity_reflection(three.cavity, w));
    }
}

TEST_CASE("reflection magnitude grows with |Delta| at fixed C") {
    for (double c : {0.5, 1.0, 2.0}) {
        double prev = -1.0;
        for (double d = 0.0; d <= 40.0; d += 0.25) {
            RegisterParams reg = symmetric_register(c, d);
            const double r2 = std::norm(reflection(reg, 0, 0.0));
            CHECK(r2 >= prev - 1e-12);
            prev = r2;
        }
    }
}

TEST_CASE("domain errors") {
    RegisterParams reg = symmetric_register(1.0, 0.0);
    CHECK_THROWS_AS(reflection(reg, 0, std::numeric_limits<double>::quiet_NaN()),
                    std::invalid_argument);
    CHECK_THROWS_AS(transmission(reg, 0, 0.0), std::invalid_argument);  // kappa_r = 0
    CHECK_THROWS_AS(single_sided_cavity(-1.0), std::invalid_argument);
}
