#pragma once

// Choosing the number of channels g for a reliability-latency requirement.
//
// With integer g the reliability generally cannot hit the target exactly, so
// every search returns the smallest g whose reliability is at least the
// target. g = 0 marks an infeasible requirement.

#include <cstdint>

#include "fsa/arrivals.hpp"
#include "fsa/kmpr.hpp"

namespace fsa {

inline constexpr std::int64_t kDefaultMaxChannels = 40;

struct RequirementSpec {
    double target_reliability = 0.99;
    std::int64_t latency = 5;
    std::int64_t mpr_order = 1;
    std::int64_t g_max = kDefaultMaxChannels;
    // Smallest superslot count a candidate g must provide. 1 admits a frame
    // made of one superslot; 2 reproduces reference grids that treat the
    // single-superslot frame (q = 1) as unusable.
    std::int64_t min_superslots = 1;

    void validate() const;
    ProtocolConfig protocol(std::int64_t channels) const { return {channels, latency, mpr_order}; }
    // True when g channels yield at least min_superslots superslots.
    bool admits(std::int64_t channels) const;
};

struct DimensionResult {
    bool feasible = false;
    std::int64_t g_min = 0;
    // Reliability at g_min, or the best reliability reached within g_max when infeasible.
    double achieved_reliability = 0.0;
};

struct EstimationErrorModel {
    double epsilon_max = 0.0;

    void validate() const;
    // ceil(n * (1 + epsilon_max)), robust to binary rounding of the product.
    std::int64_t inflate(std::int64_t n) const;
};

DimensionResult dimension_known_n(std::int64_t n, const RequirementSpec& req);
DimensionResult dimension_mixture(const ArrivalPmf& pmf, const RequirementSpec& req);
DimensionResult overprovisioned_dimension(std::int64_t n_estimate, const EstimationErrorModel& err,
                                          const RequirementSpec& req);

// Largest batch size n that g channels serve at the target reliability.
std::int64_t capacity_known_n(std::int64_t channels, const RequirementSpec& req);

// Largest Poisson mean (to absolute tolerance tol) meeting the target at g channels.
double capacity_poisson(std::int64_t channels, const RequirementSpec& req, double tol = 1e-3);

// Largest Beta population n_tot (to tol users) meeting the target at g channels,
// with the 3GPP shape (3, 4), 10 s activation time and 10 ms intervals.
std::int64_t capacity_beta(std::int64_t channels, const RequirementSpec& req, std::int64_t tol = 1);

// 3GPP defaults used by the capacity study.
BetaBatchModel default_beta_model(std::int64_t n_tot);

}  // namespace fsa
