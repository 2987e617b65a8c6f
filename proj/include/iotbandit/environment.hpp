#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "iotbandit/arm_stats.hpp"
#include "iotbandit/random.hpp"

namespace iotbandit {

/// Channel means measured at the end of the 11-day field run (Xk of the
/// final table): the default surrogate for bench runs.
inline const std::vector<double> kFieldMeans{0.0, 0.115, 0.051};

/// Stationary i.i.d. Bernoulli channels: a transmission on channel k is
/// acknowledged with probability mu[k].
class BernoulliEnv {
public:
    explicit BernoulliEnv(std::vector<double> mu) : mu_(std::move(mu))
    {
        check_channel_count(mu_.size());
        for (std::size_t k = 0; k < mu_.size(); ++k) {
            if (!(mu_[k] >= 0.0 && mu_[k] <= 1.0)) {
                throw std::invalid_argument("channel mean " + std::to_string(k) + " outside [0, 1]");
            }
        }
    }

    [[nodiscard]] std::size_t channels() const noexcept { return mu_.size(); }
    [[nodiscard]] const std::vector<double>& means() const noexcept { return mu_; }

    template <std::uniform_random_bit_generator Generator>
    [[nodiscard]] bool draw(std::size_t k, Generator& gen) const
    {
        check_channel_index(k, mu_.size());
        // Degenerate arms consume a draw like any other so that streams stay
        // aligned across environments with different means.
        return unit_uniform(gen) < mu_[k];
    }

private:
    std::vector<double> mu_;
};

} // namespace iotbandit
