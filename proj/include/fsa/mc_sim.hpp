#pragma once

// Frame-level Monte Carlo simulation of framed slotted ALOHA with K-MPR.
//
// Iterations are split into fixed blocks of kBlockIterations; block b draws
// from an mt19937_64 seeded by (master_seed, b). Blocks may run on any number
// of threads. Per-block sums are reduced in block order, so results depend
// only on (master_seed, iterations, scenario).

#include <cstdint>
#include <random>
#include <vector>

#include "fsa/arrivals.hpp"
#include "fsa/kmpr.hpp"

namespace fsa {

using SimRng = std::mt19937_64;

inline constexpr std::uint64_t kBlockIterations = 4096;
inline constexpr std::uint64_t kDeskIterations = 100'000;
inline constexpr std::uint64_t kPaperIterations = 1'000'000;

struct SimConfig {
    std::uint64_t iterations = kDeskIterations;
    std::uint64_t master_seed = 1;
    ProtocolConfig protocol;
    ArrivalModel arrivals = KnownModel{1};
    unsigned workers = 0;  // 0: FSA_WORKERS or hardware concurrency

    void validate() const;
};

struct SimResult {
    // Mean of resolved/n over frames with n >= 1.
    double empirical_reliability = 1.0;
    double reliability_stderr = 0.0;
    // Mean of resolved/(g L) over all frames.
    double empirical_throughput = 0.0;
    double throughput_stderr = 0.0;
    std::uint64_t iterations_used = 0;
    std::uint64_t zero_arrival_frames = 0;
    std::uint64_t arrivals_total = 0;
    std::uint64_t resolved_total = 0;
    std::uint64_t max_batch = 0;
};

// One frame: n users each pick one of m superslots; returns the number of
// users in superslots holding at most K users. Reuses its scratch buffers.
class FrameSimulator {
public:
    explicit FrameSimulator(const ProtocolConfig& protocol);

    std::uint64_t run(std::uint64_t n, SimRng& rng);
    std::int64_t superslots() const { return superslots_; }

private:
    std::int64_t superslots_;
    std::int64_t mpr_order_;
    std::vector<std::uint32_t> occupancy_;
    std::vector<std::uint32_t> choices_;
};

std::uint64_t simulate_frame(std::uint64_t n, const ProtocolConfig& protocol, SimRng& rng);

// Seeds the generator for block `block` of a run with `master_seed`.
SimRng block_rng(std::uint64_t master_seed, std::uint64_t block);

SimResult simulate_scenario(const SimConfig& cfg);

}  // namespace fsa
