#include "fsa/arrivals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/core.h>

namespace fsa {

namespace {

constexpr double kNormalizationSlack = 1e-12;

void check_tolerance(double tol) {
    if (!(tol > 0.0 && tol < 1.0)) {
        throw std::invalid_argument(fmt::format("tail_tolerance must lie in (0,1), got {}", tol));
    }
}

}  // namespace

void PoissonModel::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument(fmt::format("poisson lambda must be positive, got {}", lambda));
    }
    check_tolerance(tail_tolerance);
}

void BetaBatchModel::validate() const {
    if (n_tot < 1) {
        throw std::invalid_argument(fmt::format("beta n_tot must be positive, got {}", n_tot));
    }
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("beta shape parameters must be positive");
    }
    if (!(activation_time_s > 0.0) || !(interval_s > 0.0)) {
        throw std::invalid_argument("activation time and interval duration must be positive");
    }
    check_tolerance(tail_tolerance);
    (void)interval_count();
}

std::int64_t BetaBatchModel::interval_count() const {
    const double ratio = activation_time_s / interval_s;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
        throw std::invalid_argument(fmt::format(
            "activation time {} s is not an integer multiple of the interval {} s",
            activation_time_s, interval_s));
    }
    return static_cast<std::int64_t>(rounded);
}

void KnownModel::validate() const {
    if (n < 0) {
        throw std::invalid_argument(fmt::format("known batch size must be >= 0, got {}", n));
    }
}

ArrivalPmf::ArrivalPmf(std::vector<double> mass, double truncated_tail, double mean)
    : mass_(std::move(mass)), tail_(truncated_tail), mean_(mean) {
    if (mass_.empty()) {
        throw std::invalid_argument("arrival pmf needs at least one support point");
    }
    if (!(tail_ >= 0.0)) {
        throw std::invalid_argument("truncated tail must be nonnegative");
    }
    for (double m : mass_) {
        if (!(m >= 0.0)) {
            throw std::invalid_argument("arrival pmf masses must be nonnegative");
        }
    }
    const double total = std::accumulate(mass_.begin(), mass_.end(), 0.0) + tail_;
    if (std::abs(total - 1.0) > kNormalizationSlack) {
        throw std::invalid_argument(fmt::format("arrival pmf is not normalized (total {:.17g})", total));
    }
}

double ArrivalPmf::mass(std::int64_t n) const {
    if (n < 0 || n > n_max()) return 0.0;
    return mass_[static_cast<std::size_t>(n)];
}

double ArrivalPmf::truncated_mean() const {
    double m = 0.0;
    for (std::size_t n = 0; n < mass_.size(); ++n) m += static_cast<double>(n) * mass_[n];
    return m;
}

double log_binomial_pmf(std::int64_t n, std::int64_t n_tot, double p) {
    if (n < 0 || n > n_tot) return -std::numeric_limits<double>::infinity();
    if (p <= 0.0) return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return n == n_tot ? 0.0 : -std::numeric_limits<double>::infinity();
    const auto N = static_cast<double>(n_tot);
    const auto k = static_cast<double>(n);
    return std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(N - k + 1.0) +
           k * std::log(p) + (N - k) * std::log1p(-p);
}

ArrivalPmf poisson_pmf(const PoissonModel& model) {
    model.validate();
    const double lambda = model.lambda;
    const double log_lambda = std::log(lambda);
    std::vector<double> mass;
    double tail = 1.0;
    for (std::int64_t n = 0;; ++n) {
        const auto k = static_cast<double>(n);
        mass.push_back(std::exp(k * log_lambda - lambda - std::lgamma(k + 1.0)));
        // P[N > n] = P(n + 1, lambda), the regularized lower incomplete gamma.
        tail = boost::math::gamma_p(k + 1.0, lambda);
        if (tail <= model.tail_tolerance) break;
    }
    return ArrivalPmf(std::move(mass), tail, lambda);
}

double beta_interval_mass(const BetaBatchModel& model, std::int64_t interval_index) {
    model.validate();
    const std::int64_t count = model.interval_count();
    if (interval_index < 0 || interval_index >= count) {
        throw std::out_of_range(fmt::format("interval index {} outside [0, {})", interval_index, count));
    }
    const double x0 = static_cast<double>(interval_index) / static_cast<double>(count);
    const double x1 = static_cast<double>(interval_index + 1) / static_cast<double>(count);
    double mass = 0.0;
    // Difference the complementary function in the upper half to keep precision near x = 1.
    if (x0 >= 0.5) {
        mass = boost::math::ibetac(model.alpha, model.beta, x0) -
               boost::math::ibetac(model.alpha, model.beta, x1);
    } else {
        mass = boost::math::ibeta(model.alpha, model.beta, x1) -
               boost::math::ibeta(model.alpha, model.beta, x0);
    }
    return std::clamp(mass, 0.0, 1.0);
}

std::vector<double> beta_interval_masses(const BetaBatchModel& model) {
    model.validate();
    const std::int64_t count = model.interval_count();
    std::vector<double> masses(static_cast<std::size_t>(count));
    for (std::int64_t t = 0; t < count; ++t) masses[static_cast<std::size_t>(t)] = beta_interval_mass(model, t);
    return masses;
}

ArrivalPmf beta_batch_pmf(const BetaBatchModel& model) {
    model.validate();
    const std::vector<double> interval_mass = beta_interval_masses(model);
    const auto intervals = static_cast<double>(interval_mass.size());
    const std::int64_t n_tot = model.n_tot;

    std::vector<double> log_p(interval_mass.size());
    std::vector<double> log_q(interval_mass.size());
    for (std::size_t t = 0; t < interval_mass.size(); ++t) {
        log_p[t] = std::log(interval_mass[t]);
        log_q[t] = std::log1p(-interval_mass[t]);
    }

    std::vector<double> mass;
    double cumulative = 0.0;
    // log C(n_tot, n), built up term by term: lgamma(n_tot + 1) alone would
    // cost ~1e-12 relative accuracy at n_tot in the thousands.
    double log_coeff = 0.0;
    for (std::int64_t n = 0; n <= n_tot; ++n) {
        const auto k = static_cast<double>(n);
        if (n > 0) log_coeff += std::log(static_cast<double>(n_tot - n + 1) / k);
        double sum = 0.0;
        for (std::size_t t = 0; t < interval_mass.size(); ++t) {
            if (interval_mass[t] <= 0.0) {
                if (n == 0) sum += 1.0;
                continue;
            }
            sum += std::exp(log_coeff + k * log_p[t] + static_cast<double>(n_tot - n) * log_q[t]);
        }
        mass.push_back(sum / intervals);
        cumulative += mass.back();
        if (cumulative >= 1.0 - model.tail_tolerance) break;
    }

    const std::int64_t n_max = static_cast<std::int64_t>(mass.size()) - 1;
    double tail = 0.0;
    if (n_max < n_tot) {
        // P[Bin(n_tot, p) > n_max] = I_p(n_max + 1, n_tot - n_max).
        for (double p : interval_mass) {
            if (p > 0.0) {
                tail += boost::math::ibeta(static_cast<double>(n_max + 1),
                                           static_cast<double>(n_tot - n_max), p);
            }
        }
        tail /= intervals;
    }
    const double mean = static_cast<double>(n_tot) / intervals;
    return ArrivalPmf(std::move(mass), tail, mean);
}

ArrivalPmf known_pmf(std::int64_t n) {
    KnownModel{n}.validate();
    std::vector<double> mass(static_cast<std::size_t>(n) + 1, 0.0);
    mass.back() = 1.0;
    return ArrivalPmf(std::move(mass), 0.0, static_cast<double>(n));
}

ArrivalPmf arrival_pmf(const ArrivalModel& model) {
    return std::visit(
        [](const auto& m) -> ArrivalPmf {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KnownModel>) {
                return known_pmf(m.n);
            } else if constexpr (std::is_same_v<T, PoissonModel>) {
                return poisson_pmf(m);
            } else {
                return beta_batch_pmf(m);
            }
        },
        model);
}

std::string describe(const ArrivalModel& model) {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KnownModel>) {
                return fmt::format("known(n={})", m.n);
            } else if constexpr (std::is_same_v<T, PoissonModel>) {
                return fmt::format("poisson(lambda={})", m.lambda);
            } else {
                return fmt::format("beta(n_tot={})", m.n_tot);
            }
        },
        model);
}

double integer_shape_beta_cdf(int a, int b, double x) {
    if (a < 1 || b < 1) throw std::invalid_argument("integer shapes must be >= 1");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const int n = a + b - 1;
    double total = 0.0;
    double coeff = 1.0;  // C(n, j), built incrementally
    for (int j = 0; j <= n; ++j) {
        if (j > 0) coeff = coeff * static_cast<double>(n - j + 1) / static_cast<double>(j);
        if (j >= a) total += coeff * std::pow(x, j) * std::pow(1.0 - x, n - j);
    }
    return total;
}

}  // namespace fsa
