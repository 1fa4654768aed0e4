#include "cohortsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace cohortsim {

namespace {

constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t finalize(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t mix_key(std::initializer_list<std::uint64_t> words)
{
    std::uint64_t h = 0x6A09E667F3BCC909ULL;
    for (auto w : words) {
        h = finalize(h + golden_gamma + finalize(w + golden_gamma));
    }
    return h;
}

std::uint64_t RandomStream::next_u64()
{
    ++counter_;
    return finalize(key_ + counter_ * golden_gamma);
}

double RandomStream::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::normal()
{
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool RandomStream::bernoulli(double p)
{
    if (p <= 0.0) {
        return false;
    }
    if (p >= 1.0) {
        return true;
    }
    return uniform() < p;
}

RandomStream agent_stream(std::uint64_t replication_seed, std::uint64_t agent_id,
                          std::uint64_t semester, Purpose purpose)
{
    return RandomStream(
        mix_key({replication_seed, agent_id, semester, static_cast<std::uint64_t>(purpose)}));
}

} // namespace cohortsim
