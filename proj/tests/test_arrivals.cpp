#include <cmath>
#include <numeric>
#include <stdexcept>

#include <doctest.h>

#include "fsa/arrivals.hpp"
#include "oracles.hpp"

using namespace fsa;

namespace {

double total_mass(const ArrivalPmf& pmf) {
    const auto m = pmf.masses();
    return std::accumulate(m.begin(), m.end(), 0.0) + pmf.truncated_tail();
}

}  // namespace

TEST_CASE("poisson pmf") {
    const ArrivalPmf pmf = poisson_pmf({3.0});
    CHECK(pmf.mass(0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-14));
    CHECK(pmf.mass(0) == doctest::Approx(0.049787).epsilon(1e-5));
    CHECK(pmf.mean() == 3.0);
    for (int n = 0; n <= pmf.n_max(); ++n) {
        CHECK(pmf.mass(n) == doctest::Approx(oracle::poisson_pmf_direct(n, 3.0)).epsilon(1e-12));
    }
    CHECK(pmf.truncated_tail() <= 1e-12);
    CHECK(pmf.mass(pmf.n_max() + 1) == 0.0);
    CHECK(pmf.mass(-1) == 0.0);
}

TEST_CASE("poisson normalization and truncated mean") {
    for (double lambda : {1e-3, 0.5, 3.0, 9.0, 15.0, 120.0, 900.0}) {
        CAPTURE(lambda);
        const ArrivalPmf pmf = poisson_pmf({lambda});
        CHECK(std::abs(total_mass(pmf) - 1.0) <= 1e-12);
        // The mean lost to truncation is E[N; N > n_max] = lambda * P[N >= n_max].
        const double lost = lambda * (pmf.truncated_tail() + pmf.mass(pmf.n_max()));
        CHECK(std::abs((lambda - pmf.truncated_mean()) - lost) <= 1e-6 * lost + 1e-15 * lambda * static_cast<double>(pmf.n_max() + 1));
    }
}

TEST_CASE("poisson tolerance is configurable") {
    const ArrivalPmf tight = poisson_pmf({15.0, 1e-14});
    const ArrivalPmf loose = poisson_pmf({15.0, 1e-3});
    CHECK(loose.n_max() < tight.n_max());
    CHECK(loose.truncated_tail() <= 1e-3);
    CHECK(loose.truncated_tail() > 1e-6);
    CHECK(std::abs(total_mass(loose) - 1.0) <= 1e-12);
}

TEST_CASE("poisson model validation") {
    CHECK_THROWS_AS(poisson_pmf({0.0}), std::invalid_argument);
    CHECK_THROWS_AS(poisson_pmf({-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(poisson_pmf({3.0, 0.0}), std::invalid_argument);
}

TEST_CASE("beta interval masses") {
    const BetaBatchModel model;  // 3GPP defaults: alpha 3, beta 4, 10 s, 10 ms
    REQUIRE(model.interval_count() == 1000);
    const std::vector<double> masses = beta_interval_masses(model);
    REQUIRE(masses.size() == 1000);
    double sum = 0.0;
    for (double p : masses) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        sum += p;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);

    SUBCASE("uniform density") {
        BetaBatchModel uniform;
        uniform.alpha = 1.0;
        uniform.beta = 1.0;
        for (std::int64_t t = 0; t < uniform.interval_count(); t += 37) {
            CHECK(beta_interval_mass(uniform, t) == doctest::Approx(0.001).epsilon(1e-12));
        }
    }

    SUBCASE("integer-shape closed form agrees") {
        for (std::int64_t t = 0; t < 1000; t += 7) {
            const double x0 = static_cast<double>(t) / 1000.0;
            const double x1 = static_cast<double>(t + 1) / 1000.0;
            const double closed = integer_shape_beta_cdf(3, 4, x1) - integer_shape_beta_cdf(3, 4, x0);
            CHECK(std::abs(masses[static_cast<std::size_t>(t)] - closed) <= 1e-12);
        }
    }

    SUBCASE("first half against quadrature") {
        double first_half = 0.0;
        for (std::size_t t = 0; t < 500; ++t) first_half += masses[t];
        const double quad = oracle::beta_density_integral(3.0, 4.0, 0.0, 0.5, 1e-5);
        CHECK(std::abs(first_half - quad) <= 1e-9);
        CHECK(first_half == doctest::Approx(42.0 / 64.0).epsilon(1e-12));
    }

    CHECK_THROWS_AS(beta_interval_mass(model, -1), std::out_of_range);
    CHECK_THROWS_AS(beta_interval_mass(model, 1000), std::out_of_range);
}

TEST_CASE("beta interval count must be an integer") {
    BetaBatchModel model;
    model.interval_s = 0.003;
    CHECK_THROWS_AS((void)model.interval_count(), std::invalid_argument);
    CHECK_THROWS_AS(beta_batch_pmf(model), std::invalid_argument);
    model.interval_s = 0.020;
    CHECK(model.interval_count() == 500);
}

TEST_CASE("beta batch pmf") {
    SUBCASE("means of the paired scenarios") {
        BetaBatchModel m3000;
        m3000.n_tot = 3000;
        BetaBatchModel m15000;
        m15000.n_tot = 15000;
        CHECK(beta_batch_pmf(m3000).mean() == doctest::Approx(3.0).epsilon(1e-15));
        CHECK(beta_batch_pmf(m15000).mean() == doctest::Approx(15.0).epsilon(1e-15));
        CHECK(beta_batch_pmf(m3000).truncated_mean() == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(beta_batch_pmf(m15000).truncated_mean() == doctest::Approx(15.0).epsilon(1e-9));
    }

    SUBCASE("single user") {
        BetaBatchModel one;
        one.n_tot = 1;
        const ArrivalPmf pmf = beta_batch_pmf(one);
        CHECK(pmf.mass(1) == doctest::Approx(0.001).epsilon(1e-12));
        CHECK(pmf.mass(0) == doctest::Approx(0.999).epsilon(1e-12));
    }

    SUBCASE("normalization") {
        for (std::int64_t n_tot : {1, 50, 3000, 9000, 15000, 200000}) {
            CAPTURE(n_tot);
            BetaBatchModel model;
            model.n_tot = n_tot;
            CHECK(std::abs(total_mass(beta_batch_pmf(model)) - 1.0) <= 1e-12);
        }
    }

    SUBCASE("small population against direct mixture") {
        BetaBatchModel model;
        model.n_tot = 40;
        model.tail_tolerance = 1e-15;
        const ArrivalPmf pmf = beta_batch_pmf(model);
        const std::vector<double> p = beta_interval_masses(model);
        for (int n = 0; n <= std::min<std::int64_t>(pmf.n_max(), 8); ++n) {
            double direct = 0.0;
            for (double pt : p) direct += oracle::binomial_pmf_direct(n, 40, pt);
            direct /= static_cast<double>(p.size());
            CHECK(pmf.mass(n) == doctest::Approx(direct).epsilon(1e-10));
        }
    }
}

TEST_CASE("log binomial against direct evaluation") {
    for (int n_tot = 1; n_tot <= 50; ++n_tot) {
        for (double p : {0.001, 0.05, 0.3, 0.77}) {
            for (int n = 0; n <= n_tot; ++n) {
                const double direct = oracle::binomial_pmf_direct(n, n_tot, p);
                if (direct < 1e-300) continue;
                const double via_log = std::exp(log_binomial_pmf(n, n_tot, p));
                CHECK(std::abs(via_log - direct) <= 1e-9 * direct);
            }
        }
    }
}

TEST_CASE("known pmf") {
    const ArrivalPmf five = known_pmf(5);
    CHECK(five.mass(5) == 1.0);
    CHECK(five.truncated_tail() == 0.0);
    const ArrivalPmf zero = known_pmf(0);
    CHECK(zero.mass(0) == 1.0);
    CHECK(zero.mean() == 0.0);
    CHECK(known_pmf(7).mean() == 7.0);
    CHECK_THROWS_AS(known_pmf(-1), std::invalid_argument);
}

TEST_CASE("pmf construction checks") {
    CHECK_THROWS_AS(ArrivalPmf({0.5, 0.6}, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ArrivalPmf({1.1, -0.1}, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ArrivalPmf({}, 1.0, 1.0), std::invalid_argument);
    CHECK_NOTHROW(ArrivalPmf({0.5, 0.4}, 0.1, 1.0));
}

TEST_CASE("arrival model dispatch") {
    CHECK(arrival_pmf(KnownModel{4}).mass(4) == 1.0);
    CHECK(arrival_pmf(PoissonModel{2.0}).mean() == 2.0);
    CHECK(describe(PoissonModel{3.0}) == "poisson(lambda=3)");
    CHECK(describe(KnownModel{12}) == "known(n=12)");
}
