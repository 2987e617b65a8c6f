#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ranges>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "iotbandit/arm_stats.hpp"

namespace iotbandit {

/// Anything with a channel index and a binary reward: bench records and
/// simulator trace records both qualify.
template <class R>
concept RewardRecord = requires(const R& r) {
    { r.channel } -> std::convertible_to<std::size_t>;
    { r.reward } -> std::convertible_to<bool>;
};

template <class Range>
concept RewardTrace = std::ranges::input_range<Range> && RewardRecord<std::ranges::range_value_t<Range>>;

template <RewardTrace Trace>
std::uint64_t cumulative_reward(const Trace& trace)
{
    std::uint64_t total = 0;
    for (const auto& r : trace) {
        total += r.reward ? 1U : 0U;
    }
    return total;
}

inline double best_mean(std::span<const double> mu)
{
    if (mu.empty()) {
        throw std::invalid_argument("regret needs the environment's channel means; ALOHA traces have none, "
                                    "report the success rate instead");
    }
    return *std::ranges::max_element(mu);
}

/// Pseudo-regret against the best fixed channel: T * max(mu) - sum of rewards.
template <RewardTrace Trace>
double regret(const Trace& trace, std::span<const double> mu)
{
    const double top = best_mean(mu);
    const auto horizon = static_cast<double>(std::ranges::distance(trace));
    return horizon * top - static_cast<double>(cumulative_reward(trace));
}

/// regret after each round: entry t-1 holds the regret of the first t rounds.
template <RewardTrace Trace>
std::vector<double> regret_curve(const Trace& trace, std::span<const double> mu)
{
    const double top = best_mean(mu);
    std::vector<double> curve;
    std::uint64_t hits = 0;
    std::uint64_t t = 0;
    for (const auto& r : trace) {
        hits += r.reward ? 1U : 0U;
        ++t;
        curve.push_back(static_cast<double>(t) * top - static_cast<double>(hits));
    }
    return curve;
}

/// Expected success rate of a device that picks channels uniformly at random.
inline double random_baseline_rate(std::span<const double> mu)
{
    if (mu.empty()) {
        throw std::invalid_argument("baseline rate of an empty channel set");
    }
    double sum = 0.0;
    for (const double m : mu) {
        sum += m;
    }
    return sum / static_cast<double>(mu.size());
}

struct ChannelSummary {
    std::uint64_t pulls = 0;     // Tk
    std::uint64_t successes = 0; // Sk
    double empirical_mean = 0.0; // Xk

    friend bool operator==(const ChannelSummary&, const ChannelSummary&) = default;
};

struct RunSummary {
    std::vector<ChannelSummary> channels;
    std::uint64_t transmissions = 0;
    std::uint64_t successes = 0;
    double success_rate = 0.0;
    std::optional<double> oracle_mean;
    std::optional<double> regret;
};

/// Builds a summary from raw per-channel counts (Xk = Sk / Tk, 0 when unused).
inline RunSummary summary_from_counts(std::span<const std::uint64_t> pulls, std::span<const std::uint64_t> successes,
                                      std::span<const double> mu = {})
{
    if (pulls.size() != successes.size()) {
        throw std::invalid_argument("pull and success tables differ in length");
    }
    RunSummary s;
    s.channels.resize(pulls.size());
    for (std::size_t k = 0; k < pulls.size(); ++k) {
        if (successes[k] > pulls[k]) {
            throw std::invalid_argument("channel " + std::to_string(k) + " has more successes than pulls");
        }
        auto& c = s.channels[k];
        c.pulls = pulls[k];
        c.successes = successes[k];
        c.empirical_mean = c.pulls > 0 ? static_cast<double>(c.successes) / static_cast<double>(c.pulls) : 0.0;
        s.transmissions += c.pulls;
        s.successes += c.successes;
    }
    s.success_rate =
        s.transmissions > 0 ? static_cast<double>(s.successes) / static_cast<double>(s.transmissions) : 0.0;
    if (!mu.empty()) {
        s.oracle_mean = best_mean(mu);
        s.regret = static_cast<double>(s.transmissions) * *s.oracle_mean - static_cast<double>(s.successes);
    }
    return s;
}

/// Per-channel Tk / Sk / Xk end state of a trace over `channels` channels.
template <RewardTrace Trace>
RunSummary table_summary(const Trace& trace, std::size_t channels, std::span<const double> mu = {})
{
    std::vector<std::uint64_t> pulls(channels, 0);
    std::vector<std::uint64_t> hits(channels, 0);
    for (const auto& r : trace) {
        const auto k = static_cast<std::size_t>(r.channel);
        check_channel_index(k, channels);
        ++pulls[k];
        hits[k] += r.reward ? 1U : 0U;
    }
    return summary_from_counts(pulls, hits, mu);
}

/// Fixed-width text table in the layout of the field experiment's final
/// table: one Tk / Xk / Sk triple per channel, Xk to three decimals.
inline std::string format_table(const RunSummary& s, std::span<const std::string> labels = {})
{
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-8s %-14s %8s %8s %8s\n", "channel", "label", "Tk", "Sk", "Xk");
    out += line;
    for (std::size_t k = 0; k < s.channels.size(); ++k) {
        const auto& c = s.channels[k];
        const std::string label = k < labels.size() ? labels[k] : "-";
        std::snprintf(line, sizeof line, "%-8zu %-14s %8llu %8llu %8.3f\n", k, label.c_str(),
                      static_cast<unsigned long long>(c.pulls), static_cast<unsigned long long>(c.successes),
                      c.empirical_mean);
        out += line;
    }
    std::snprintf(line, sizeof line, "%-8s %-14s %8llu %8llu %8.3f\n", "total", "",
                  static_cast<unsigned long long>(s.transmissions), static_cast<unsigned long long>(s.successes),
                  s.success_rate);
    out += line;
    return out;
}

/// Share of rounds in [from, end) of the trace that used `channel`.
template <RewardTrace Trace>
double channel_fraction(const Trace& trace, std::size_t channel, std::size_t from)
{
    std::size_t i = 0;
    std::size_t hits = 0;
    std::size_t seen = 0;
    for (const auto& r : trace) {
        if (i++ < from) {
            continue;
        }
        ++seen;
        hits += static_cast<std::size_t>(r.channel) == channel ? 1U : 0U;
    }
    return seen > 0 ? static_cast<double>(hits) / static_cast<double>(seen) : 0.0;
}

struct TrajectoryPoint {
    std::uint64_t t = 0;
    std::vector<std::uint64_t> pulls;
    std::vector<double> means;
};

/// Tk(t) and Xk(t) sampled after every `decimation`-th transmission (and
/// always after the last one).
struct Trajectory {
    std::size_t channels = 0;
    std::vector<TrajectoryPoint> points;
};

template <RewardTrace Trace>
Trajectory trajectory(const Trace& trace, std::size_t channels, std::uint64_t decimation = 1)
{
    if (decimation == 0) {
        throw std::invalid_argument("trajectory decimation must be positive");
    }
    Trajectory traj;
    traj.channels = channels;
    std::vector<ArmStats> arms(channels);
    const auto total = static_cast<std::uint64_t>(std::ranges::distance(trace));
    std::uint64_t t = 0;
    for (const auto& r : trace) {
        const auto k = static_cast<std::size_t>(r.channel);
        check_channel_index(k, channels);
        arms[k].observe(static_cast<bool>(r.reward));
        ++t;
        if (t % decimation == 0 || t == total) {
            TrajectoryPoint p;
            p.t = t;
            for (const auto& a : arms) {
                p.pulls.push_back(a.pulls);
                p.means.push_back(a.empirical_mean);
            }
            traj.points.push_back(std::move(p));
        }
    }
    return traj;
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

/// Mean and population standard deviation.
inline MeanStd mean_std(std::span<const double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("mean of an empty sample");
    }
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (const double v : values) {
        sum += v;
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (const double v : values) {
        sq += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(sq / n)};
}

/// Pointwise mean/std envelopes across runs of identical length.
struct Envelope {
    std::vector<double> mean;
    std::vector<double> std;
};

inline Envelope aggregate(std::span<const std::vector<double>> runs)
{
    if (runs.empty()) {
        throw std::invalid_argument("aggregate over zero runs");
    }
    const std::size_t len = runs.front().size();
    for (const auto& r : runs) {
        if (r.size() != len) {
            throw std::invalid_argument("aggregate: runs have mismatched lengths");
        }
    }
    Envelope env;
    env.mean.resize(len);
    env.std.resize(len);
    std::vector<double> column(runs.size());
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t r = 0; r < runs.size(); ++r) {
            column[r] = runs[r][i];
        }
        const auto ms = mean_std(column);
        env.mean[i] = ms.mean;
        env.std[i] = ms.std;
    }
    return env;
}

struct SummaryAggregate {
    std::size_t runs = 0;
    MeanStd success_rate;
    MeanStd cumulative_reward;
    std::optional<MeanStd> regret;
    std::vector<MeanStd> pulls; // per channel
};

inline SummaryAggregate aggregate(std::span<const RunSummary> runs)
{
    if (runs.empty()) {
        throw std::invalid_argument("aggregate over zero runs");
    }
    const std::size_t channels = runs.front().channels.size();
    const bool with_regret = runs.front().regret.has_value();
    std::vector<double> rate;
    std::vector<double> reward;
    std::vector<double> reg;
    std::vector<std::vector<double>> pulls(channels);
    for (const auto& s : runs) {
        if (s.channels.size() != channels || s.regret.has_value() != with_regret) {
            throw std::invalid_argument("aggregate: run summaries have mismatched shapes");
        }
        rate.push_back(s.success_rate);
        reward.push_back(static_cast<double>(s.successes));
        if (with_regret) {
            reg.push_back(*s.regret);
        }
        for (std::size_t k = 0; k < channels; ++k) {
            pulls[k].push_back(static_cast<double>(s.channels[k].pulls));
        }
    }
    SummaryAggregate agg;
    agg.runs = runs.size();
    agg.success_rate = mean_std(rate);
    agg.cumulative_reward = mean_std(reward);
    if (with_regret) {
        agg.regret = mean_std(reg);
    }
    for (const auto& p : pulls) {
        agg.pulls.push_back(mean_std(p));
    }
    return agg;
}

} // namespace iotbandit
