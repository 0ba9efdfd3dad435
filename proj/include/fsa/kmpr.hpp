#pragma once

// Reliability of framed slotted ALOHA with K-multipacket reception.
//
// A frame holds g channels x L time slots. Slots are grouped into
// m = floor(g*L/K) superslots of K slots each; leftover slots are idle. Every
// active user picks one superslot uniformly at random; a superslot with at
// most K users delivers all of them, a superslot with more than K delivers none.

#include <compare>
#include <cstdint>

#include "fsa/arrivals.hpp"

namespace fsa {

struct ProtocolConfig {
    std::int64_t channels = 1;   // g
    std::int64_t latency = 1;    // L, in time slots
    std::int64_t mpr_order = 1;  // K

    void validate() const;
    std::int64_t slots() const { return channels * latency; }
};

// A probability in [0, 1] that a given active user is resolved within the frame.
class Reliability {
public:
    constexpr Reliability() = default;
    explicit Reliability(double value);

    constexpr double value() const { return value_; }
    constexpr auto operator<=>(const Reliability&) const = default;

private:
    double value_ = 0.0;
};

// floor(g*L/K); throws std::domain_error when the frame cannot hold one superslot.
std::int64_t superslot_count(const ProtocolConfig& cfg);

// Selection probability of a particular superslot, 1/m.
double superslot_probability(const ProtocolConfig& cfg);

// Expected number of users resolved in one superslot when n users each pick a
// superslot with probability q.
double expected_resolved_per_superslot(std::int64_t n, double q, std::int64_t mpr_order);

// Probability that one of n active users is resolved. n <= K always succeeds;
// with a single superslot (q = 1) the result is exactly 0 or 1.
Reliability reliability_known_n(const ProtocolConfig& cfg, std::int64_t n);

// Mixture over the batch-size pmf. n = 0 counts as a success (nobody fails),
// the truncated tail counts as failure.
Reliability reliability_mixture(const ProtocolConfig& cfg, const ArrivalPmf& pmf);

// Mixture restricted to frames with at least one arrival: the quantity a
// simulator estimates when it averages resolved/n over non-empty frames.
Reliability reliability_mixture_active(const ProtocolConfig& cfg, const ArrivalPmf& pmf);

// Expected number of resolved users per frame, sum of n * r(n) * mass[n].
double expected_resolved(const ProtocolConfig& cfg, const ArrivalPmf& pmf);

}  // namespace fsa
