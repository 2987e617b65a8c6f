#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace iotbandit {

/// Index of the largest score. Ties are broken uniformly at random; the
/// generator is only consumed when more than one maximizer exists.
template <std::uniform_random_bit_generator Generator>
std::size_t argmax_random_tiebreak(std::span<const double> scores, Generator& gen)
{
    if (scores.empty()) {
        throw std::invalid_argument("argmax over an empty score list");
    }
    std::vector<std::size_t> best{0};
    for (std::size_t k = 1; k < scores.size(); ++k) {
        if (scores[k] > scores[best.front()]) {
            best.assign(1, k);
        } else if (scores[k] == scores[best.front()]) {
            best.push_back(k);
        }
    }
    if (best.size() == 1) {
        return best.front();
    }
    std::uniform_int_distribution<std::size_t> pick(0, best.size() - 1);
    return best[pick(gen)];
}

} // namespace iotbandit
