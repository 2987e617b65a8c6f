#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "iotbandit/environment.hpp"
#include "iotbandit/policy.hpp"
#include "iotbandit/random.hpp"

namespace iotbandit {

/// One round of a pure bandit run (t is 1-based).
struct BenchRecord {
    std::uint64_t t = 0;
    std::size_t channel = 0;
    bool reward = false;

    friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

/// Plays `horizon` rounds of `spec` against `env`. The environment and the
/// policy draw from separate substreams of `seed`.
inline std::vector<BenchRecord> run_bench(const PolicySpec& spec, const BernoulliEnv& env, std::uint64_t horizon,
                                          std::uint64_t seed, std::uint64_t reset_interval = 0)
{
    Policy policy(spec, env.channels(), reset_interval);
    Rng env_rng = make_stream(seed, StreamTag::bench_environment, 0);
    Rng policy_rng = make_stream(seed, StreamTag::bench_policy, 0);
    std::vector<BenchRecord> trace;
    trace.reserve(horizon);
    for (std::uint64_t t = 1; t <= horizon; ++t) {
        const Decision d = policy.select(policy_rng);
        const bool reward = env.draw(d.channel, env_rng);
        policy.update(d.channel, reward);
        trace.push_back({t, d.channel, reward});
    }
    return trace;
}

/// Runs job(i) for i in [0, count) on a few worker threads. Each index is
/// handled by exactly one worker, so writing to slot i of a pre-sized vector
/// keeps results independent of scheduling.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job)
{
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(count, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            job(i);
        }
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < count; i += workers) {
                        job(i);
                    }
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

/// Seed sweep: result[i] is the trace for seed first_seed + i.
inline std::vector<std::vector<BenchRecord>> run_bench_seeds(const PolicySpec& spec, const BernoulliEnv& env,
                                                             std::uint64_t horizon, std::uint64_t first_seed,
                                                             std::size_t seeds, std::uint64_t reset_interval = 0)
{
    std::vector<std::vector<BenchRecord>> runs(seeds);
    parallel_for(seeds, [&](std::size_t i) {
        runs[i] = run_bench(spec, env, horizon, first_seed + i, reset_interval);
    });
    return runs;
}

} // namespace iotbandit
