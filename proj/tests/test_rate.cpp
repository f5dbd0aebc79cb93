#include <catch2/catch_amalgamated.hpp>

#include "spinphoton/rate.hpp"

using namespace spinphoton;

namespace {

ProtocolConfig base_config(double c, int rounds) {
    ProtocolConfig cfg;
    cfg.rounds = rounds;
    cfg.pulse.sigma_omega = 0.2;
    cfg.pulse.n_t = 10.0;
    cfg.register_a = symmetric_register(c, 1.0);
    cfg.register_b = cfg.register_a;
    return cfg;
}

}  // namespace

TEST_CASE("encoding duration") {
    CHECK(encoding_duration(5, 10, 0.2) == Catch::Approx(250.0));
    CHECK(encoding_duration(5, 20, 0.2) == Catch::Approx(500.0));
    // width-fixed sigma = gamma/n_omega: linear in N
    CHECK(encoding_duration(6, 10, 1.0 / 5.0) == Catch::Approx(2.0 * encoding_duration(3, 10, 0.2)));
    // width-scaling with Delta = 2NC/pi: N-independent
    const double c = 2.0, n_omega = 10.0, n_t = 10.0;
    for (int n : {4, 7, 11}) {
        const double sigma = (2.0 * n * c / kPi) / n_omega;
        CHECK(encoding_duration(n, n_t, sigma) == Catch::Approx(n_t * n_omega * kPi / (2.0 * c)));
    }
    CHECK_THROWS_AS(encoding_duration(0, 10, 0.2), std::invalid_argument);
}

TEST_CASE("closed-form rate ratio") {
    CHECK(rate_ratio(5.0, 4.36, 2.0, 5.0) == Catch::Approx(7.30).margin(5e-3));
    const double crossover = 5.0 * 2.0 * 2.0 * 5.0 / kPi;
    CHECK(rate_ratio(5.0, crossover, 2.0, 5.0) == Catch::Approx(1.0));
    CHECK(rate_ratio(5.0, 4.36, 2.0, 10.0) == Catch::Approx(2.0 * rate_ratio(5.0, 4.36, 2.0, 5.0)));
}

TEST_CASE("max rate at fidelity threshold") {
    ProtocolConfig cfg = base_config(2.0, 5);
    const RateResult r99 = max_rate_at_fidelity(cfg, 0.99);
    REQUIRE(r99.feasible);
    CHECK(r99.outcome.f_a >= 0.99);
    CHECK(r99.outcome.f_a - 0.99 < 1e-3);  // constraint binds
    CHECK(r99.rate * r99.duration == Catch::Approx(r99.outcome.p_total).epsilon(1e-12));

    const RateResult r999 = max_rate_at_fidelity(cfg, 0.999);
    REQUIRE(r999.feasible);
    CHECK(r999.n_omega_star > r99.n_omega_star);
    CHECK(r999.rate < r99.rate);

    // threshold 0 pushes to the smallest admissible N_omega
    const RateResult r0 = max_rate_at_fidelity(cfg, 0.0);
    REQUIRE(r0.feasible);
    CHECK(r0.n_omega_star == Catch::Approx(1.0));

    // unreachable threshold flags infeasible instead of throwing
    const RateResult bad = max_rate_at_fidelity(cfg, 1.0 - 1e-12);
    CHECK_FALSE(bad.feasible);
}

TEST_CASE("loss-optimal repetition search") {
    ProtocolConfig cfg = base_config(2.0, 1);
    cfg.imperfections.eta_i = 0.99;
    cfg.imperfections.eta_r = 0.9886;
    const LossOptimalResult res = loss_optimal_rounds(cfg, 0.99, 14);
    REQUIRE(res.feasible);
    CHECK(res.n_star >= 3);
    CHECK(res.n_star <= 8);
    CHECK(res.outcome.f_a >= 0.99);

    // lossless: P_t strictly increasing over the swept range, no interior peak
    ProtocolConfig clean = base_config(2.0, 1);
    const LossOptimalResult ideal = loss_optimal_rounds(clean, 0.99, 10);
    REQUIRE(ideal.feasible);
    double prev = 0.0;
    for (const auto& row : ideal.sweep) {
        if (!row.feasible) continue;
        CHECK(row.outcome.p_total > prev);
        prev = row.outcome.p_total;
    }
    CHECK(ideal.n_star == ideal.sweep.back().rounds);
}

TEST_CASE("optimal N is monotone in the per-round efficiency") {
    // N*(eta) non-increasing as eta_i^4 eta_r decreases, over a 3x3 grid
    std::vector<std::pair<double, int>> results;
    for (double ei : {1.0, 0.995, 0.99}) {
        for (double er : {0.9886, 0.9773, 0.9551}) {
            ProtocolConfig cfg = base_config(2.0, 1);
            cfg.imperfections.eta_i = ei;
            cfg.imperfections.eta_r = er;
            const LossOptimalResult res = loss_optimal_rounds(cfg, 0.99, 18);
            REQUIRE(res.feasible);
            results.emplace_back(std::pow(ei, 4) * er, res.n_star);
        }
    }
    std::sort(results.begin(), results.end());
    for (std::size_t i = 1; i < results.size(); ++i) {
        CHECK(results[i - 1].second <= results[i].second);
    }
}

TEST_CASE("multiplicative loss exponent is exact") {
    ProtocolConfig cfg = base_config(1.7, 6);
    cfg.register_a.transition0.delta = 5.0;
    cfg.register_a.transition1.delta = -5.0;
    cfg.register_b = cfg.register_a;
    const double ideal = herald(cfg).p_total;
    cfg.imperfections.eta_i = 0.98;
    cfg.imperfections.eta_r = 0.96;
    const double lossy = herald(cfg).p_total;
    CHECK(lossy == Catch::Approx(std::pow(std::pow(0.98, 4) * 0.96, 6) * ideal).epsilon(1e-12));
}
