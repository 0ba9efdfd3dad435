#include "fsa/dimensioning.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include <fmt/core.h>

namespace fsa {

namespace {

// Reliability can only move up with g; a drop signals a modelling bug.
constexpr double kMonotoneSlack = 1e-12;

template <typename ReliabilityAt>
DimensionResult scan_channels(const RequirementSpec& req, ReliabilityAt&& reliability_at) {
    DimensionResult result;
    double previous = -1.0;
    for (std::int64_t g = 1; g <= req.g_max; ++g) {
        if (!req.admits(g)) continue;
        const double r = reliability_at(req.protocol(g));
        if (r + kMonotoneSlack < previous) {
            throw std::logic_error(fmt::format("reliability decreased from {} to {} at g={}", previous, r, g));
        }
        previous = r;
        result.achieved_reliability = r;
        if (r >= req.target_reliability) {
            result.feasible = true;
            result.g_min = g;
            return result;
        }
    }
    return result;
}

// Tracks (x, r(x)) evaluations of a bracketed search and checks that r is
// nonincreasing in x across all of them.
template <typename Key>
class MonotoneLog {
public:
    explicit MonotoneLog(const char* what) : what_(what) {}

    void record(Key x, double r) { seen_[x] = r; }

    void verify() const {
        double previous = 2.0;
        for (const auto& [x, r] : seen_) {
            if (r > previous + kMonotoneSlack) {
                throw std::runtime_error(fmt::format(
                    "{}: reliability is not nonincreasing on the search bracket (at {})", what_, x));
            }
            previous = r;
        }
    }

private:
    const char* what_;
    std::map<Key, double> seen_;
};

}  // namespace

void RequirementSpec::validate() const {
    if (!(target_reliability > 0.0 && target_reliability < 1.0)) {
        throw std::invalid_argument(fmt::format("target reliability must lie in (0,1), got {}", target_reliability));
    }
    if (latency < 1 || mpr_order < 1) {
        throw std::invalid_argument("latency and MPR order must be >= 1");
    }
    if (g_max < 1) throw std::invalid_argument(fmt::format("g_max must be >= 1, got {}", g_max));
    if (min_superslots < 1) throw std::invalid_argument("min_superslots must be >= 1");
}

bool RequirementSpec::admits(std::int64_t channels) const {
    return channels >= 1 && (channels * latency) / mpr_order >= min_superslots;
}

void EstimationErrorModel::validate() const {
    if (!(epsilon_max >= 0.0) || !std::isfinite(epsilon_max)) {
        throw std::invalid_argument(fmt::format("epsilon_max must be >= 0, got {}", epsilon_max));
    }
}

std::int64_t EstimationErrorModel::inflate(std::int64_t n) const {
    validate();
    const double scaled = static_cast<double>(n) * (1.0 + epsilon_max);
    // 10 * 1.2 evaluates to 12.000000000000002; do not let that round up to 13.
    return static_cast<std::int64_t>(std::ceil(scaled - 1e-9 * std::max(1.0, scaled)));
}

DimensionResult dimension_known_n(std::int64_t n, const RequirementSpec& req) {
    req.validate();
    if (n < 1) throw std::invalid_argument(fmt::format("dimensioning needs n >= 1, got {}", n));
    return scan_channels(req, [n](const ProtocolConfig& cfg) { return reliability_known_n(cfg, n).value(); });
}

DimensionResult dimension_mixture(const ArrivalPmf& pmf, const RequirementSpec& req) {
    req.validate();
    return scan_channels(req, [&pmf](const ProtocolConfig& cfg) { return reliability_mixture(cfg, pmf).value(); });
}

DimensionResult overprovisioned_dimension(std::int64_t n_estimate, const EstimationErrorModel& err,
                                          const RequirementSpec& req) {
    if (n_estimate < 1) {
        throw std::invalid_argument(fmt::format("estimated batch size must be >= 1, got {}", n_estimate));
    }
    return dimension_known_n(err.inflate(n_estimate), req);
}

std::int64_t capacity_known_n(std::int64_t channels, const RequirementSpec& req) {
    req.validate();
    if (channels < 1) throw std::invalid_argument("capacity needs g >= 1");
    const ProtocolConfig cfg = req.protocol(channels);
    if (cfg.slots() / cfg.mpr_order < 1) return 0;
    const std::int64_t k = req.mpr_order;
    if (superslot_count(cfg) == 1) return k;

    MonotoneLog<std::int64_t> log("capacity_known_n");
    auto meets = [&](std::int64_t n) {
        const double r = reliability_known_n(cfg, n).value();
        log.record(n, r);
        return r >= req.target_reliability;
    };

    // r(n) is 1 up to K and nonincreasing beyond, so bracket [lo feasible, hi infeasible].
    std::int64_t lo = k;
    std::int64_t hi = 2 * k;
    while (meets(hi)) {
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        (meets(mid) ? lo : hi) = mid;
    }
    log.verify();
    return lo;
}

double capacity_poisson(std::int64_t channels, const RequirementSpec& req, double tol) {
    req.validate();
    if (channels < 1) throw std::invalid_argument("capacity needs g >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("capacity tolerance must be positive");
    const ProtocolConfig cfg = req.protocol(channels);
    (void)superslot_count(cfg);

    MonotoneLog<double> log("capacity_poisson");
    auto meets = [&](double lambda) {
        const double r = reliability_mixture(cfg, poisson_pmf({lambda, kDefaultTailTolerance})).value();
        log.record(lambda, r);
        return r >= req.target_reliability;
    };

    double lo = tol;
    if (!meets(lo)) {
        throw std::runtime_error(fmt::format("no Poisson load >= {} meets reliability {} with g={}", tol,
                                             req.target_reliability, channels));
    }
    double hi = std::max(1.0, 2.0 * lo);
    constexpr double kLoadCeiling = 1e6;
    while (meets(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > kLoadCeiling) throw std::runtime_error("capacity_poisson: bracket exceeded load ceiling");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (meets(mid) ? lo : hi) = mid;
    }
    log.verify();
    return lo;
}

BetaBatchModel default_beta_model(std::int64_t n_tot) {
    BetaBatchModel model;
    model.n_tot = n_tot;
    model.alpha = 3.0;
    model.beta = 4.0;
    model.activation_time_s = 10.0;
    model.interval_s = 0.010;
    return model;
}

std::int64_t capacity_beta(std::int64_t channels, const RequirementSpec& req, std::int64_t tol) {
    req.validate();
    if (channels < 1) throw std::invalid_argument("capacity needs g >= 1");
    if (tol < 1) throw std::invalid_argument("capacity tolerance must be at least one user");
    const ProtocolConfig cfg = req.protocol(channels);
    (void)superslot_count(cfg);

    MonotoneLog<std::int64_t> log("capacity_beta");
    auto meets = [&](std::int64_t n_tot) {
        const double r = reliability_mixture(cfg, beta_batch_pmf(default_beta_model(n_tot))).value();
        log.record(n_tot, r);
        return r >= req.target_reliability;
    };

    std::int64_t lo = 1;
    if (!meets(lo)) {
        throw std::runtime_error(fmt::format("no Beta population meets reliability {} with g={}",
                                             req.target_reliability, channels));
    }
    std::int64_t hi = 1000;
    constexpr std::int64_t kPopulationCeiling = 100'000'000;
    while (meets(hi)) {
        lo = hi;
        hi *= 2;
        if (hi > kPopulationCeiling) throw std::runtime_error("capacity_beta: bracket exceeded population ceiling");
    }
    while (hi - lo > tol) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        (meets(mid) ? lo : hi) = mid;
    }
    log.verify();
    return lo;
}

}  // namespace fsa
