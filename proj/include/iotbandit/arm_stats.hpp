#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace iotbandit {

/// Channel chosen by a policy for the next transmission.
struct Decision {
    std::size_t channel = 0;

    friend bool operator==(const Decision&, const Decision&) = default;
};

/// Per-channel learner statistics: the pull count Tk and the empirical mean
/// Xk. This is the whole device-side inventory per channel; the success
/// count is recovered from the pair on demand.
struct ArmStats {
    std::uint64_t pulls = 0;
    double empirical_mean = 0.0;

    [[nodiscard]] std::uint64_t successes() const noexcept
    {
        return static_cast<std::uint64_t>(std::llround(empirical_mean * static_cast<double>(pulls)));
    }

    // The integer success count is reconstructed from (mean, pulls) before the
    // division, which keeps empirical_mean == successes / pulls exactly.
    void observe(bool reward) noexcept
    {
        const std::uint64_t hits = successes() + (reward ? 1U : 0U);
        ++pulls;
        empirical_mean = static_cast<double>(hits) / static_cast<double>(pulls);
    }

    friend bool operator==(const ArmStats&, const ArmStats&) = default;
};

inline void check_channel_count(std::size_t channels)
{
    if (channels < 2) {
        throw std::invalid_argument("channel count must be at least 2, got " + std::to_string(channels));
    }
}

inline void check_channel_index(std::size_t channel, std::size_t channels)
{
    if (channel >= channels) {
        throw std::out_of_range("channel index " + std::to_string(channel) + " out of range [0, " +
                                std::to_string(channels) + ")");
    }
}

/// Lowest-index channel that has never been pulled, or `count` when every
/// channel has at least one observation.
template <class Arms>
std::size_t first_unpulled(const Arms& arms) noexcept
{
    std::size_t k = 0;
    for (const auto& arm : arms) {
        if (arm.pulls == 0) {
            return k;
        }
        ++k;
    }
    return k;
}

} // namespace iotbandit
