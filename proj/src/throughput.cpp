#include "fsa/throughput.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace fsa {

KnownThroughput throughput_known(const ArrivalPmf& pmf, const RequirementSpec& req,
                                 const EstimationErrorModel& err) {
    req.validate();
    err.validate();
    KnownThroughput out;
    const auto latency = static_cast<double>(req.latency);
    double feasible_mass = pmf.mass(0);

    // Inflated batch sizes repeat for small epsilon; dimension each once.
    std::unordered_map<std::int64_t, DimensionResult> cache;
    for (std::int64_t n = 1; n <= pmf.n_max(); ++n) {
        const double w = pmf.mass(n);
        if (w == 0.0) continue;
        const std::int64_t inflated = err.inflate(n);
        auto it = cache.find(inflated);
        if (it == cache.end()) it = cache.emplace(inflated, dimension_known_n(inflated, req)).first;
        const DimensionResult& dim = it->second;
        if (!dim.feasible) {
            out.infeasible_mass += w;
            continue;
        }
        out.feasible = true;
        feasible_mass += w;
        const auto g = static_cast<double>(dim.g_min);
        const double achieved = reliability_known_n(req.protocol(dim.g_min), n).value();
        out.throughput += w * static_cast<double>(n) * achieved / (g * latency);
        out.throughput_target += w * static_cast<double>(n) * req.target_reliability / (g * latency);
    }
    out.throughput_renormalized = feasible_mass > 0.0 ? out.throughput / feasible_mass : 0.0;
    return out;
}

MixtureThroughput throughput_mixture(const ArrivalPmf& pmf, const RequirementSpec& req) {
    MixtureThroughput out;
    out.dimension = dimension_mixture(pmf, req);
    if (!out.dimension.feasible) return out;
    out.feasible = true;
    const double resources = static_cast<double>(out.dimension.g_min) * static_cast<double>(req.latency);
    out.throughput = out.dimension.achieved_reliability * pmf.mean() / resources;
    out.throughput_target = req.target_reliability * pmf.mean() / resources;
    out.throughput_exact = expected_resolved(req.protocol(out.dimension.g_min), pmf) / resources;
    return out;
}

double normalized_gain(double t_known, double t_star, bool star_feasible) {
    if (t_known < 0.0) throw std::invalid_argument("known-regime throughput must be nonnegative");
    if (star_feasible && t_star > 0.0) return (t_known - t_star) / t_star;
    if (t_known > 0.0) return std::numeric_limits<double>::infinity();
    throw std::domain_error("normalized gain undefined: both regimes infeasible");
}

ThroughputReport throughput_report(const ArrivalPmf& pmf, const RequirementSpec& req,
                                   const EstimationErrorModel& err) {
    const KnownThroughput known = throughput_known(pmf, req, err);
    const MixtureThroughput star = throughput_mixture(pmf, req);
    ThroughputReport report;
    report.t_known = known.throughput;
    report.t_star = star.throughput;
    report.infeasible_mass_known = known.infeasible_mass;
    report.star_feasible = star.feasible;
    report.known_feasible = known.feasible;
    report.g_star = star.dimension.g_min;
    if (known.feasible || star.feasible) {
        report.gain = normalized_gain(known.throughput, star.throughput, star.feasible);
        report.gain_renormalized = normalized_gain(known.throughput_renormalized, star.throughput, star.feasible);
    } else {
        report.gain = std::numeric_limits<double>::quiet_NaN();
        report.gain_renormalized = report.gain;
    }
    return report;
}

}  // namespace fsa
