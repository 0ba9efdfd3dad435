#include "fsa/mc_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <variant>

#include <fmt/core.h>

#include "fsa/workers.hpp"

namespace fsa {

namespace {

// Draws batch sizes from the arrival model itself, not from the truncated pmf.
class BatchSampler {
public:
    explicit BatchSampler(const ArrivalModel& model) : model_(model) {
        if (const auto* beta = std::get_if<BetaBatchModel>(&model_)) {
            interval_mass_ = beta_interval_masses(*beta);
        }
    }

    std::uint64_t draw(SimRng& rng) const {
        return std::visit(
            [&](const auto& m) -> std::uint64_t {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, KnownModel>) {
                    return static_cast<std::uint64_t>(m.n);
                } else if constexpr (std::is_same_v<T, PoissonModel>) {
                    std::poisson_distribution<std::uint64_t> dist(m.lambda);
                    return dist(rng);
                } else {
                    std::uniform_int_distribution<std::size_t> pick(0, interval_mass_.size() - 1);
                    const double p = interval_mass_[pick(rng)];
                    std::binomial_distribution<std::uint64_t> dist(static_cast<std::uint64_t>(m.n_tot), p);
                    return dist(rng);
                }
            },
            model_);
    }

private:
    ArrivalModel model_;
    std::vector<double> interval_mass_;
};

struct BlockTotals {
    std::uint64_t frames = 0;
    std::uint64_t active_frames = 0;
    std::uint64_t arrivals = 0;
    std::uint64_t resolved = 0;
    std::uint64_t resolved_sq = 0;
    std::uint64_t max_batch = 0;
    double ratio_sum = 0.0;
    double ratio_sq_sum = 0.0;
};

double stderr_of(double sum, double sum_sq, double count) {
    if (count < 2.0) return 0.0;
    const double mean = sum / count;
    const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));
    return std::sqrt(var / count);
}

}  // namespace

void SimConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("simulation needs at least one iteration");
    protocol.validate();
    (void)superslot_count(protocol);
    std::visit([](const auto& m) { m.validate(); }, arrivals);
}

FrameSimulator::FrameSimulator(const ProtocolConfig& protocol)
    : superslots_(superslot_count(protocol)),
      mpr_order_(protocol.mpr_order),
      occupancy_(static_cast<std::size_t>(superslots_), 0U) {}

std::uint64_t FrameSimulator::run(std::uint64_t n, SimRng& rng) {
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(superslots_ - 1));
    choices_.resize(n);
    for (std::uint64_t u = 0; u < n; ++u) {
        const std::uint32_t s = pick(rng);
        choices_[u] = s;
        ++occupancy_[s];
    }
    std::uint64_t resolved = 0;
    for (std::uint32_t s : choices_) {
        if (occupancy_[s] <= static_cast<std::uint32_t>(mpr_order_)) ++resolved;
    }
    for (std::uint32_t s : choices_) occupancy_[s] = 0;
    return resolved;
}

std::uint64_t simulate_frame(std::uint64_t n, const ProtocolConfig& protocol, SimRng& rng) {
    FrameSimulator frame(protocol);
    return frame.run(n, rng);
}

SimRng block_rng(std::uint64_t master_seed, std::uint64_t block) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    return SimRng(seq);
}

SimResult simulate_scenario(const SimConfig& cfg) {
    cfg.validate();
    const BatchSampler sampler(cfg.arrivals);
    const std::uint64_t blocks = (cfg.iterations + kBlockIterations - 1) / kBlockIterations;
    std::vector<BlockTotals> totals(blocks);

    parallel_for(blocks, cfg.workers == 0 ? worker_count() : cfg.workers, [&](std::size_t b) {
        SimRng rng = block_rng(cfg.master_seed, b);
        FrameSimulator frame(cfg.protocol);
        const std::uint64_t begin = b * kBlockIterations;
        const std::uint64_t end = std::min(cfg.iterations, begin + kBlockIterations);
        BlockTotals& t = totals[b];
        for (std::uint64_t i = begin; i < end; ++i) {
            const std::uint64_t n = sampler.draw(rng);
            const std::uint64_t resolved = frame.run(n, rng);
            ++t.frames;
            t.arrivals += n;
            t.resolved += resolved;
            t.resolved_sq += resolved * resolved;
            t.max_batch = std::max(t.max_batch, n);
            if (n == 0) continue;
            ++t.active_frames;
            const double ratio = static_cast<double>(resolved) / static_cast<double>(n);
            t.ratio_sum += ratio;
            t.ratio_sq_sum += ratio * ratio;
        }
    });

    BlockTotals sum;
    for (const BlockTotals& t : totals) {
        sum.frames += t.frames;
        sum.active_frames += t.active_frames;
        sum.arrivals += t.arrivals;
        sum.resolved += t.resolved;
        sum.resolved_sq += t.resolved_sq;
        sum.max_batch = std::max(sum.max_batch, t.max_batch);
        sum.ratio_sum += t.ratio_sum;
        sum.ratio_sq_sum += t.ratio_sq_sum;
    }

    SimResult result;
    result.iterations_used = sum.frames;
    result.zero_arrival_frames = sum.frames - sum.active_frames;
    result.arrivals_total = sum.arrivals;
    result.resolved_total = sum.resolved;
    result.max_batch = sum.max_batch;
    if (sum.active_frames > 0) {
        const auto active = static_cast<double>(sum.active_frames);
        result.empirical_reliability = sum.ratio_sum / active;
        result.reliability_stderr = stderr_of(sum.ratio_sum, sum.ratio_sq_sum, active);
    }
    const double resources = static_cast<double>(cfg.protocol.slots());
    const auto frames = static_cast<double>(sum.frames);
    result.empirical_throughput = static_cast<double>(sum.resolved) / frames / resources;
    result.throughput_stderr =
        stderr_of(static_cast<double>(sum.resolved), static_cast<double>(sum.resolved_sq), frames) / resources;
    return result;
}

}  // namespace fsa
