#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "iotbandit/argmax.hpp"
#include "iotbandit/arm_stats.hpp"

namespace iotbandit {

/// Beta posterior parameters of one channel. (a - 1) successes and (b - 1)
/// failures have been observed on top of the uniform prior.
struct BetaArm {
    std::uint64_t a = 1;
    std::uint64_t b = 1;

    [[nodiscard]] std::uint64_t pulls() const noexcept { return a + b - 2; }

    friend bool operator==(const BetaArm&, const BetaArm&) = default;
};

struct TsState {
    std::vector<BetaArm> arms;

    friend bool operator==(const TsState&, const TsState&) = default;
};

/// Exact Beta(a, b) draw as the ratio of two Gamma variates.
template <std::uniform_random_bit_generator Generator>
double beta_sample(double a, double b, Generator& gen)
{
    const double x = std::gamma_distribution<double>(a, 1.0)(gen);
    const double y = std::gamma_distribution<double>(b, 1.0)(gen);
    return x / (x + y);
}

/// Thompson Sampling for Bernoulli rewards with a Beta(1, 1) prior on each
/// channel.
class ThompsonPolicy {
public:
    explicit ThompsonPolicy(std::size_t channels)
    {
        check_channel_count(channels);
        state_.arms.resize(channels);
    }

    [[nodiscard]] std::size_t channels() const noexcept { return state_.arms.size(); }
    [[nodiscard]] const TsState& state() const noexcept { return state_; }

    /// One posterior sample per channel (the randomized index).
    template <std::uniform_random_bit_generator Generator>
    [[nodiscard]] std::vector<double> ts_sample(Generator& gen) const
    {
        std::vector<double> draws;
        draws.reserve(channels());
        for (const auto& arm : state_.arms) {
            draws.push_back(beta_sample(static_cast<double>(arm.a), static_cast<double>(arm.b), gen));
        }
        return draws;
    }

    template <std::uniform_random_bit_generator Generator>
    [[nodiscard]] Decision select(Generator& gen) const
    {
        const auto draws = ts_sample(gen);
        return {argmax_random_tiebreak(std::span<const double>(draws), gen)};
    }

    void update(std::size_t k, bool reward)
    {
        check_channel_index(k, channels());
        if (reward) {
            ++state_.arms[k].a;
        } else {
            ++state_.arms[k].b;
        }
    }

    void reset() noexcept
    {
        for (auto& arm : state_.arms) {
            arm = BetaArm{};
        }
    }

    /// Only for tests and replays that need to start from a given posterior.
    static ThompsonPolicy from_state(TsState state)
    {
        ThompsonPolicy policy(state.arms.size());
        for (const auto& arm : state.arms) {
            if (arm.a < 1 || arm.b < 1) {
                throw std::invalid_argument("Beta parameters must be at least 1");
            }
        }
        policy.state_ = std::move(state);
        return policy;
    }

private:
    TsState state_;
};

} // namespace iotbandit
