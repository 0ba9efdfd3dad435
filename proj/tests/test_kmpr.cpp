#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "fsa/kmpr.hpp"
#include "oracles.hpp"

using namespace fsa;

TEST_CASE("superslot count") {
    CHECK(superslot_count({10, 5, 3}) == 16);
    CHECK(superslot_count({10, 5, 1}) == 50);
    CHECK_THROWS_AS(superslot_count({1, 1, 2}), std::domain_error);
    CHECK(superslot_probability({10, 5, 1}) == doctest::Approx(0.02));
}

TEST_CASE("protocol validation") {
    CHECK_THROWS_AS(ProtocolConfig({0, 5, 1}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(ProtocolConfig({1, 0, 1}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(ProtocolConfig({1, 5, 0}).validate(), std::invalid_argument);
}

TEST_CASE("expected resolved per superslot") {
    CHECK(expected_resolved_per_superslot(2, 0.5, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(expected_resolved_per_superslot(0, 0.3, 2) == 0.0);
    CHECK(expected_resolved_per_superslot(3, 0.5, 2) == doctest::Approx(1.125).epsilon(1e-15));
    // n < K: every user in the superslot is resolved, so the mean is q n.
    CHECK(expected_resolved_per_superslot(2, 0.25, 5) == doctest::Approx(0.5));

    for (int n = 1; n <= 30; ++n) {
        for (int k = 1; k <= 4; ++k) {
            for (double q : {0.05, 0.25, 0.5}) {
                if (n < k) continue;
                long double direct = 0.0L;
                for (int i = 1; i <= k; ++i) {
                    direct += i * oracle::choose(n, i) * std::pow(static_cast<long double>(q), i) *
                              std::pow(1.0L - q, n - i);
                }
                CHECK(expected_resolved_per_superslot(n, q, k) ==
                      doctest::Approx(static_cast<double>(direct)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("reliability for known n: worked cases") {
    CHECK(reliability_known_n({1, 2, 1}, 2).value() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(reliability_known_n({2, 2, 2}, 3).value() == doctest::Approx(0.75).epsilon(1e-15));
    for (std::int64_t k : {1, 2, 3, 5, 7}) CHECK(reliability_known_n({3, 4, k}, 1).value() == 1.0);
    for (std::int64_t k : {1, 2, 5, 10, 25, 50}) {
        for (std::int64_t n = 1; n <= k; ++n) CHECK(reliability_known_n({10, 5, k}, n).value() == 1.0);
    }
    CHECK_THROWS_AS(reliability_known_n({10, 5, 1}, 0), std::invalid_argument);
}

TEST_CASE("reliability matches exhaustive enumeration") {
    for (int m = 1; m <= 4; ++m) {
        for (int k = 1; k <= 3; ++k) {
            // g = m K channels of one slot give exactly m superslots.
            const ProtocolConfig cfg{static_cast<std::int64_t>(m) * k, 1, k};
            REQUIRE(superslot_count(cfg) == m);
            for (int n = 1; n <= 6; ++n) {
                CAPTURE(m);
                CAPTURE(k);
                CAPTURE(n);
                CHECK(std::abs(reliability_known_n(cfg, n).value() - oracle::enumerated_reliability(m, n, k)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("single superslot is all or nothing") {
    const ProtocolConfig cfg{2, 5, 10};  // m = 1
    for (std::int64_t n = 1; n <= 10; ++n) CHECK(reliability_known_n(cfg, n).value() == 1.0);
    for (std::int64_t n = 11; n <= 40; ++n) CHECK(reliability_known_n(cfg, n).value() == 0.0);
}

TEST_CASE("reliability equals m E[resolved per superslot] / n") {
    for (std::int64_t g : {1, 4, 10, 40}) {
        for (std::int64_t k : {1, 2, 5, 10}) {
            const ProtocolConfig cfg{g, 5, k};
            if (cfg.slots() / k < 1) continue;
            const auto m = static_cast<double>(superslot_count(cfg));
            for (std::int64_t n : {1, 2, 3, 7, 20, 60, 250, 1000, 15000}) {
                const double r = reliability_known_n(cfg, n).value();
                const double identity =
                    m * expected_resolved_per_superslot(n, superslot_probability(cfg), k) / static_cast<double>(n);
                CAPTURE(g);
                CAPTURE(k);
                CAPTURE(n);
                CHECK(std::abs(r - identity) <= 1e-12);
            }
        }
    }
}

TEST_CASE("reliability against a direct binomial sum") {
    for (int m : {2, 3, 16, 50, 200}) {
        for (int k : {1, 2, 4, 10}) {
            const ProtocolConfig cfg{static_cast<std::int64_t>(m) * k, 1, k};
            for (int n = 1; n <= 300; n += 13) {
                CHECK(reliability_known_n(cfg, n).value() ==
                      doctest::Approx(oracle::direct_reliability(m, n, k)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("monotonicity and range") {
    for (std::int64_t k : {1, 2, 3, 5, 10}) {
        for (std::int64_t g = 1; g <= 40; ++g) {
            const ProtocolConfig cfg{g, 5, k};
            if (cfg.slots() / k < 1) continue;
            double previous = 2.0;
            for (std::int64_t n = 1; n <= 400; ++n) {
                const double r = reliability_known_n(cfg, n).value();
                CHECK(r >= 0.0);
                CHECK(r <= 1.0);
                if (n >= k) CHECK(r <= previous);
                previous = r;
                if (g > 1 && ProtocolConfig{g - 1, 5, k}.slots() / k >= 1) {
                    CHECK(reliability_known_n({g - 1, 5, k}, n).value() <= r);
                }
            }
        }
    }
}

TEST_CASE("large batches stay finite") {
    const double r = reliability_known_n({40, 5, 10}, 15000).value();
    CHECK(std::isfinite(r));
    CHECK(r >= 0.0);
    CHECK(r < 1e-100);
    const double r2 = reliability_known_n({40, 5, 10}, 150).value();
    CHECK(r2 == doctest::Approx(oracle::direct_reliability(20, 150, 10)).epsilon(1e-12));
    CHECK(r2 < 1.0);
}

TEST_CASE("reliability value type") {
    CHECK_THROWS_AS(Reliability(-0.1), std::domain_error);
    CHECK_THROWS_AS(Reliability(1.1), std::domain_error);
    CHECK_THROWS_AS(Reliability(std::nan("")), std::domain_error);
    CHECK(Reliability(0.3) < Reliability(0.4));
}

TEST_CASE("mixture reliability") {
    const ProtocolConfig cfg{10, 5, 2};
    SUBCASE("point mass reduces to known n") {
        for (std::int64_t n : {1, 4, 30, 90}) {
            CHECK(reliability_mixture(cfg, known_pmf(n)).value() == reliability_known_n(cfg, n).value());
        }
    }
    SUBCASE("linearity") {
        const ProtocolConfig single{2, 5, 10};  // one superslot: r(11) = 0
        const ArrivalPmf pmf({0.0, 0.5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0.5}, 0.0, 6.0);
        CHECK(reliability_mixture(single, pmf).value() == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("empty frame succeeds and the tail fails") {
        const ArrivalPmf pmf({0.2, 0.7}, 0.1, 1.0);
        CHECK(reliability_mixture(cfg, pmf).value() == doctest::Approx(0.9).epsilon(1e-15));
        // Conditioned on at least one arrival: 0.7 / 0.8.
        CHECK(reliability_mixture_active(cfg, pmf).value() == doctest::Approx(0.875).epsilon(1e-15));
        CHECK(reliability_mixture(cfg, known_pmf(0)).value() == 1.0);
        CHECK(reliability_mixture_active(cfg, known_pmf(0)).value() == 1.0);
    }
    SUBCASE("expected resolved users") {
        const ArrivalPmf pmf = poisson_pmf({9.0});
        double direct = 0.0;
        for (std::int64_t n = 1; n <= pmf.n_max(); ++n) {
            direct += static_cast<double>(n) * pmf.mass(n) * reliability_known_n(cfg, n).value();
        }
        CHECK(expected_resolved(cfg, pmf) == doctest::Approx(direct).epsilon(1e-13));
    }
}
