#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace iotbandit {

using Rng = std::mt19937_64;

// Entity tags for substream derivation. Each simulated entity owns its own
// stream so adding a device never perturbs the draws of another one.
enum class StreamTag : std::uint64_t {
    interferer = 1,
    device_policy = 2,
    device_timing = 3,
    bench_environment = 4,
    bench_policy = 5,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master, StreamTag tag, std::uint64_t id) noexcept
{
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
    return splitmix64(h ^ id);
}

/// Uniform draw in [0, 1). generate_canonical may round up to 1.0 on some
/// standard libraries; that value is folded back below 1.
template <std::uniform_random_bit_generator Generator>
double unit_uniform(Generator& gen)
{
    const double u = std::generate_canonical<double, 53>(gen);
    return u < 1.0 ? u : std::nextafter(1.0, 0.0);
}

inline Rng make_stream(std::uint64_t master, StreamTag tag, std::uint64_t id)
{
    return Rng{derive_seed(master, tag, id)};
}

} // namespace iotbandit
