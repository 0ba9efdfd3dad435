#pragma once

// Batch-arrival models: the number of users that become active within one
// latency budget (one frame), for Poisson and 3GPP Beta traffic.
//
// The Beta model is non-stationary: each frame-length interval t has its own
// activation probability P[t] and a binomial batch size. Reliability is linear
// in the per-interval pmf, so mixing the interval pmfs up front (uniform weight
// over intervals) gives exactly the same reliability and throughput as
// averaging the per-interval results afterwards. Everything downstream
// therefore works on a single ArrivalPmf.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fsa {

inline constexpr double kDefaultTailTolerance = 1e-12;

struct PoissonModel {
    double lambda = 1.0;
    double tail_tolerance = kDefaultTailTolerance;

    void validate() const;
};

struct BetaBatchModel {
    std::int64_t n_tot = 1;
    double alpha = 3.0;
    double beta = 4.0;
    double activation_time_s = 10.0;
    double interval_s = 0.010;
    double tail_tolerance = kDefaultTailTolerance;

    void validate() const;
    // Number of gating intervals T_A / interval; throws unless it is an integer.
    std::int64_t interval_count() const;
};

struct KnownModel {
    std::int64_t n = 0;

    void validate() const;
};

using ArrivalModel = std::variant<KnownModel, PoissonModel, BetaBatchModel>;

// Finite pmf over batch sizes 0..n_max plus the probability mass cut off above
// n_max. `mean` is the mean of the untruncated model.
class ArrivalPmf {
public:
    ArrivalPmf(std::vector<double> mass, double truncated_tail, double mean);

    std::int64_t n_max() const { return static_cast<std::int64_t>(mass_.size()) - 1; }
    double mass(std::int64_t n) const;
    std::span<const double> masses() const { return mass_; }
    double truncated_tail() const { return tail_; }
    double mean() const { return mean_; }
    // Mean of the retained support only, i.e. sum of n * mass[n].
    double truncated_mean() const;

private:
    std::vector<double> mass_;
    double tail_;
    double mean_;
};

ArrivalPmf poisson_pmf(const PoissonModel& model);

// Probability that a Beta-distributed activation instant falls in interval
// `interval_index` (0-based, of interval_count()).
double beta_interval_mass(const BetaBatchModel& model, std::int64_t interval_index);
std::vector<double> beta_interval_masses(const BetaBatchModel& model);

ArrivalPmf beta_batch_pmf(const BetaBatchModel& model);

ArrivalPmf known_pmf(std::int64_t n);

ArrivalPmf arrival_pmf(const ArrivalModel& model);
std::string describe(const ArrivalModel& model);

// log of C(n_tot, n) p^n (1-p)^(n_tot-n), finite for n_tot in the tens of thousands.
double log_binomial_pmf(std::int64_t n, std::int64_t n_tot, double p);

// Regularized incomplete Beta I_x(a, b) for integer shapes, via the binomial
// tail identity I_x(a, b) = P[Bin(a+b-1, x) >= a].
double integer_shape_beta_cdf(int a, int b, double x);

}  // namespace fsa
