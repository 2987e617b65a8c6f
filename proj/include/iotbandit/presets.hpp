#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iotbandit/bench.hpp"
#include "iotbandit/environment.hpp"
#include "iotbandit/metrics.hpp"
#include "iotbandit/simulator.hpp"

namespace iotbandit {

/// Lab testbed layout: a traffic generator loading channels at 20/10/5/0 %
/// (pattern repeated for 8 or 16 channels), one device sending 1 s uplinks
/// every 5 s, short interferer bursts, and an ACK inside one second.
inline ScenarioConfig malin_preset(std::size_t channels = 4)
{
    static constexpr double pattern[] = {0.20, 0.10, 0.05, 0.0};
    ScenarioConfig c;
    c.channels = channels;
    for (std::size_t k = 0; k < channels; ++k) {
        c.channel_labels.push_back("ch" + std::to_string(k + 1));
        c.interferer_load.push_back(pattern[k % 4]);
    }
    c.interferer_duration = 0.1;
    c.ack_delay = 0.2;
    c.ack_duration = 0.2;
    c.ack_timeout = 1.0;
    c.horizon_messages = 2000;
    c.seed = 1;
    c.devices.push_back(DeviceConfig{PolicySpec{PolicyKind::ucb1, kDefaultUcbAlpha}, 1.0, 5.0, 0.1});
    return c;
}

/// Interferer load giving the closed-form bidirectional success probability
/// `target` for the given timing; loads are capped at `max_load`.
inline double load_for_success(double target, double interferer_duration, double uplink_duration, double ack_delay,
                               double ack_duration, double max_load = 0.95)
{
    const double at_unit = aloha_success_probability(1.0, interferer_duration, uplink_duration, ack_delay,
                                                     ack_duration);
    // success(load) = at_unit^load, so load = ln(target) / ln(at_unit).
    if (target >= 1.0) {
        return 0.0;
    }
    if (target <= 0.0) {
        return max_load;
    }
    return std::min(max_load, std::log(target) / std::log(at_unit));
}

/// Three EU868 uplink channels with interferer loads calibrated so that the
/// per-channel success probability matches the field means (0, 0.115,
/// 0.051); one message every two hours, 129 messages.
inline ScenarioConfig iotligent_preset()
{
    ScenarioConfig c;
    c.channels = 3;
    c.channel_labels = {"868100000", "868300000", "868500000"};
    c.interferer_duration = 0.1;
    c.ack_delay = 1.0;
    c.ack_duration = 0.5;
    c.ack_timeout = 2.0;
    const double uplink = 1.0;
    for (const double mu : kFieldMeans) {
        c.interferer_load.push_back(
            load_for_success(mu, c.interferer_duration, uplink, c.ack_delay, c.ack_duration));
    }
    c.horizon_messages = 129;
    c.seed = 1;
    c.interferer_log = InterfererLog::overlapping;
    c.devices.push_back(DeviceConfig{PolicySpec{PolicyKind::ucb1, kDefaultUcbAlpha}, uplink, 7200.0, 0.1});
    return c;
}

inline std::vector<std::string> preset_names() { return {"malin4", "malin8", "malin16", "iotligent3"}; }

inline std::optional<ScenarioConfig> find_preset(std::string_view name)
{
    if (name == "malin4") {
        return malin_preset(4);
    }
    if (name == "malin8") {
        return malin_preset(8);
    }
    if (name == "malin16") {
        return malin_preset(16);
    }
    if (name == "iotligent3") {
        return iotligent_preset();
    }
    return std::nullopt;
}

struct TableReplay {
    std::vector<BenchRecord> trace;
    RunSummary summary;
};

/// Surrogate of the 11-day field run: UCB1 (alpha = 0.5) on Bernoulli
/// channels with the measured means, for exactly 129 transmissions.
inline TableReplay table_i_replay(std::uint64_t seed)
{
    const BernoulliEnv env(kFieldMeans);
    TableReplay out;
    out.trace = run_bench(PolicySpec{PolicyKind::ucb1, 0.5}, env, 129, seed);
    out.summary = table_summary(out.trace, env.channels(), env.means());
    return out;
}

} // namespace iotbandit
