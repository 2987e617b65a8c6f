#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "iotbandit/argmax.hpp"
#include "iotbandit/arm_stats.hpp"

namespace iotbandit {

struct GreedyState {
    std::vector<ArmStats> arms;

    friend bool operator==(const GreedyState&, const GreedyState&) = default;
};

// Plays the best empirical mean after trying every channel once. Kept as the
// lock-in counterexample: one unlucky first draw can exclude a channel forever.
class GreedyPolicy {
public:
    explicit GreedyPolicy(std::size_t channels)
    {
        check_channel_count(channels);
        state_.arms.resize(channels);
    }

    [[nodiscard]] std::size_t channels() const noexcept { return state_.arms.size(); }
    [[nodiscard]] const GreedyState& state() const noexcept { return state_; }

    template <std::uniform_random_bit_generator Generator>
    [[nodiscard]] Decision select(Generator& gen) const
    {
        if (const auto k = first_unpulled(state_.arms); k < channels()) {
            return {k};
        }
        std::vector<double> means;
        means.reserve(channels());
        for (const auto& arm : state_.arms) {
            means.push_back(arm.empirical_mean);
        }
        return {argmax_random_tiebreak(std::span<const double>(means), gen)};
    }

    void update(std::size_t k, bool reward)
    {
        check_channel_index(k, channels());
        state_.arms[k].observe(reward);
    }

    void reset() noexcept
    {
        for (auto& arm : state_.arms) {
            arm = ArmStats{};
        }
    }

    static GreedyPolicy from_state(GreedyState state)
    {
        GreedyPolicy policy(state.arms.size());
        policy.state_ = std::move(state);
        return policy;
    }

private:
    GreedyState state_;
};

// Non-learning reference: a normal device picking any channel with equal odds.
class UniformPolicy {
public:
    explicit UniformPolicy(std::size_t channels) : channels_(channels) { check_channel_count(channels); }

    [[nodiscard]] std::size_t channels() const noexcept { return channels_; }

    template <std::uniform_random_bit_generator Generator>
    [[nodiscard]] Decision select(Generator& gen) const
    {
        std::uniform_int_distribution<std::size_t> pick(0, channels_ - 1);
        return {pick(gen)};
    }

    void update(std::size_t k, bool /*reward*/) const { check_channel_index(k, channels_); }

    void reset() noexcept {}

private:
    std::size_t channels_;
};

} // namespace iotbandit
