#pragma once

// Throughput (resolved users per slot) under the reliability-latency
// constraint, for two levels of knowledge about the arrivals:
//
//  * known batch size: g is re-dimensioned for every n (optionally inflated by
//    an estimation-error bound), T = sum_n mass[n] * n * r(g(n), n) / (g(n) L);
//  * distribution only: one g* serves every batch,
//    T* = r*(g*) * E[N] / (g* L).
//
// Both use the reliability actually achieved at the selected g. The variants
// that multiply by the target reliability instead are reported alongside.

#include <cstdint>

#include "fsa/arrivals.hpp"
#include "fsa/dimensioning.hpp"

namespace fsa {

struct KnownThroughput {
    double throughput = 0.0;         // achieved-reliability form
    double throughput_target = 0.0;  // target-reliability form
    // Probability of batch sizes for which no g <= g_max meets the target.
    double infeasible_mass = 0.0;
    // Same sums renormalized over the feasible batch sizes (n = 0 included).
    double throughput_renormalized = 0.0;
    // True when at least one n >= 1 with positive mass is feasible.
    bool feasible = false;
};

struct MixtureThroughput {
    double throughput = 0.0;         // r*(g*) E[N] / (g* L)
    double throughput_target = 0.0;  // R E[N] / (g* L)
    // Exact expected resolved users per slot, E[N r(g*, N)] / (g* L); this is
    // what a frame-level simulation measures.
    double throughput_exact = 0.0;
    bool feasible = false;
    DimensionResult dimension;
};

struct ThroughputReport {
    double t_known = 0.0;
    double t_star = 0.0;
    // +infinity when only the known regime is feasible, NaN when neither is.
    double gain = 0.0;
    double gain_renormalized = 0.0;
    double infeasible_mass_known = 0.0;
    bool star_feasible = false;
    bool known_feasible = false;
    std::int64_t g_star = 0;
};

KnownThroughput throughput_known(const ArrivalPmf& pmf, const RequirementSpec& req,
                                 const EstimationErrorModel& err);

MixtureThroughput throughput_mixture(const ArrivalPmf& pmf, const RequirementSpec& req);

// (T - T*) / T*. +infinity when the distribution-only regime is infeasible but
// the known regime is not; throws std::domain_error when neither is feasible.
double normalized_gain(double t_known, double t_star, bool star_feasible);

ThroughputReport throughput_report(const ArrivalPmf& pmf, const RequirementSpec& req,
                                   const EstimationErrorModel& err);

}  // namespace fsa
