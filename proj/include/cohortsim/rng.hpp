#pragma once

#include <cstdint>
#include <initializer_list>

namespace cohortsim {

/// What a stream of random draws is used for. Part of every stream address.
enum class Purpose : std::uint64_t {
    archetype = 1,
    init_psych = 2,
    attempts = 3,
    debt = 4,
    dropout = 5,
    remedial = 6,
    curriculum = 7,
    calibration = 8,
};

/// Mixes an arbitrary sequence of words into a 64-bit key (splitmix64 finalizer chain).
std::uint64_t mix_key(std::initializer_list<std::uint64_t> words);

/**
 * Counter-based random stream.
 *
 * The n-th draw of a stream is a pure function of (key, n), so two streams
 * built from the same address always produce the same values regardless of
 * which thread created them or in which order streams are consumed.
 */
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();

    /// Standard normal via Box-Muller; consumes two uniforms per call.
    double normal();

    /// True with probability p. p <= 0 never fires, p >= 1 always fires.
    bool bernoulli(double p);

    std::uint64_t key() const { return key_; }
    std::uint64_t position() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Stream for one (replication seed, agent, semester, purpose) address.
RandomStream agent_stream(std::uint64_t replication_seed, std::uint64_t agent_id,
                          std::uint64_t semester, Purpose purpose);

} // namespace cohortsim
