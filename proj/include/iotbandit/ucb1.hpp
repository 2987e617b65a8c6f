#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "iotbandit/argmax.hpp"
#include "iotbandit/arm_stats.hpp"

namespace iotbandit {

inline constexpr double kDefaultUcbAlpha = 0.5;

/// Learner state for UCB1: the exploration parameter, the learner clock
/// (messages sent so far) and one ArmStats per channel.
struct Ucb1State {
    double alpha = kDefaultUcbAlpha;
    std::uint64_t t = 0;
    std::vector<ArmStats> arms;

    friend bool operator==(const Ucb1State&, const Ucb1State&) = default;
};

/// UCB1 index policy with round-robin initialization.
///
/// Until every channel has been tried once, select() returns the lowest-index
/// untried channel. Afterwards it plays argmax_k of
///
///     B_k(t) = Xk + sqrt(alpha * ln(t) / Tk)
///
/// breaking ties uniformly at random.
class Ucb1Policy {
public:
    Ucb1Policy(std::size_t channels, double alpha = kDefaultUcbAlpha)
    {
        check_channel_count(channels);
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw std::invalid_argument("UCB1 alpha must be a positive finite number");
        }
        state_.alpha = alpha;
        state_.arms.resize(channels);
    }

    [[nodiscard]] std::size_t channels() const noexcept { return state_.arms.size(); }
    [[nodiscard]] const Ucb1State& state() const noexcept { return state_; }

    [[nodiscard]] double confidence(std::size_t k) const
    {
        check_channel_index(k, channels());
        const auto& arm = state_.arms[k];
        if (arm.pulls == 0 || state_.t == 0) {
            throw std::logic_error("UCB1 confidence term needs at least one pull of the channel");
        }
        return std::sqrt(state_.alpha * std::log(static_cast<double>(state_.t)) /
                         static_cast<double>(arm.pulls));
    }

    [[nodiscard]] double index(std::size_t k) const
    {
        const double bonus = confidence(k);
        return state_.arms[k].empirical_mean + bonus;
    }

    template <std::uniform_random_bit_generator Generator>
    [[nodiscard]] Decision select(Generator& gen) const
    {
        if (const auto k = first_unpulled(state_.arms); k < channels()) {
            return {k};
        }
        std::vector<double> scores(channels());
        for (std::size_t k = 0; k < scores.size(); ++k) {
            scores[k] = index(k);
        }
        return {argmax_random_tiebreak(std::span<const double>(scores), gen)};
    }

    void update(std::size_t k, bool reward)
    {
        check_channel_index(k, channels());
        state_.arms[k].observe(reward);
        ++state_.t;
    }

    /// Resume from a stored state (e.g. a device's persisted tables).
    static Ucb1Policy from_state(Ucb1State state)
    {
        Ucb1Policy policy(state.arms.size(), state.alpha);
        std::uint64_t total = 0;
        for (const auto& arm : state.arms) {
            total += arm.pulls;
        }
        if (total != state.t) {
            throw std::invalid_argument("UCB1 clock must equal the sum of channel pulls");
        }
        policy.state_ = std::move(state);
        return policy;
    }

    void reset() noexcept
    {
        state_.t = 0;
        for (auto& arm : state_.arms) {
            arm = ArmStats{};
        }
    }

private:
    Ucb1State state_;
};

} // namespace iotbandit
