#include "fsa/kmpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <fmt/core.h>

namespace fsa {

namespace {

// log-sum-exp over a short list of log terms.
double log_sum_exp(const std::vector<double>& terms) {
    const double peak = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(peak)) return peak;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - peak);
    return peak + std::log(acc);
}

// P[Bin(trials, q) <= upper] for 0 < q < 1, summed in the log domain so that
// trials in the tens of thousands neither overflow nor underflow.
double binomial_cdf(std::int64_t trials, double q, std::int64_t upper) {
    if (upper >= trials) return 1.0;
    const double log_q = std::log(q);
    const double log_1mq = std::log1p(-q);
    std::vector<double> logs;
    logs.reserve(static_cast<std::size_t>(upper) + 1);
    double log_term = static_cast<double>(trials) * log_1mq;  // i = 0
    logs.push_back(log_term);
    for (std::int64_t i = 0; i < upper; ++i) {
        log_term += std::log(static_cast<double>(trials - i)) - std::log(static_cast<double>(i + 1)) +
                    log_q - log_1mq;
        logs.push_back(log_term);
    }
    return std::clamp(std::exp(log_sum_exp(logs)), 0.0, 1.0);
}

}  // namespace

void ProtocolConfig::validate() const {
    if (channels < 1 || latency < 1 || mpr_order < 1) {
        throw std::invalid_argument(fmt::format(
            "protocol needs g, L, K >= 1 (got g={}, L={}, K={})", channels, latency, mpr_order));
    }
}

Reliability::Reliability(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::domain_error(fmt::format("reliability {} outside [0,1]", value));
    }
}

std::int64_t superslot_count(const ProtocolConfig& cfg) {
    cfg.validate();
    const std::int64_t m = cfg.slots() / cfg.mpr_order;
    if (m < 1) {
        throw std::domain_error(fmt::format(
            "frame of {} slots cannot hold a single {}-superslot", cfg.slots(), cfg.mpr_order));
    }
    return m;
}

double superslot_probability(const ProtocolConfig& cfg) {
    return 1.0 / static_cast<double>(superslot_count(cfg));
}

double expected_resolved_per_superslot(std::int64_t n, double q, std::int64_t mpr_order) {
    if (n < 0 || !(q > 0.0 && q <= 1.0) || mpr_order < 1) {
        throw std::invalid_argument("expected_resolved_per_superslot needs n >= 0, q in (0,1], K >= 1");
    }
    if (n < mpr_order) return q * static_cast<double>(n);
    if (q == 1.0) return n == mpr_order ? static_cast<double>(n) : 0.0;

    // sum_{i=1}^{K} i C(n,i) q^i (1-q)^(n-i)
    const double log_q = std::log(q);
    const double log_1mq = std::log1p(-q);
    double log_coeff = 0.0;  // log C(n, i)
    double total = 0.0;
    for (std::int64_t i = 1; i <= mpr_order; ++i) {
        log_coeff += std::log(static_cast<double>(n - i + 1)) - std::log(static_cast<double>(i));
        const double log_term = log_coeff + static_cast<double>(i) * log_q +
                                static_cast<double>(n - i) * log_1mq;
        total += static_cast<double>(i) * std::exp(log_term);
    }
    return total;
}

Reliability reliability_known_n(const ProtocolConfig& cfg, std::int64_t n) {
    if (n < 1) {
        throw std::invalid_argument(fmt::format("reliability needs at least one user, got n={}", n));
    }
    const std::int64_t m = superslot_count(cfg);
    const std::int64_t k = cfg.mpr_order;
    if (n <= k) return Reliability(1.0);
    if (m == 1) return Reliability(0.0);
    // A tagged user succeeds iff at most K-1 of the other n-1 users share its superslot.
    const double q = 1.0 / static_cast<double>(m);
    return Reliability(binomial_cdf(n - 1, q, k - 1));
}

Reliability reliability_mixture(const ProtocolConfig& cfg, const ArrivalPmf& pmf) {
    double total = pmf.mass(0);
    for (std::int64_t n = 1; n <= pmf.n_max(); ++n) {
        const double w = pmf.mass(n);
        if (w == 0.0) continue;
        total += w * reliability_known_n(cfg, n).value();
    }
    return Reliability(std::clamp(total, 0.0, 1.0));
}

Reliability reliability_mixture_active(const ProtocolConfig& cfg, const ArrivalPmf& pmf) {
    const double active = 1.0 - pmf.mass(0);
    if (active <= 0.0) return Reliability(1.0);
    double total = 0.0;
    for (std::int64_t n = 1; n <= pmf.n_max(); ++n) {
        const double w = pmf.mass(n);
        if (w == 0.0) continue;
        total += w * reliability_known_n(cfg, n).value();
    }
    return Reliability(std::clamp(total / active, 0.0, 1.0));
}

double expected_resolved(const ProtocolConfig& cfg, const ArrivalPmf& pmf) {
    double total = 0.0;
    for (std::int64_t n = 1; n <= pmf.n_max(); ++n) {
        const double w = pmf.mass(n);
        if (w == 0.0) continue;
        total += w * static_cast<double>(n) * reliability_known_n(cfg, n).value();
    }
    return total;
}

}  // namespace fsa
