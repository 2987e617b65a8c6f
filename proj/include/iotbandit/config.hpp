#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "iotbandit/environment.hpp"
#include "iotbandit/errors.hpp"
#include "iotbandit/policy.hpp"
#include "iotbandit/presets.hpp"
#include "iotbandit/simulator.hpp"

// Config files are INI text:
//
//   [scenario]   preset, channels, channel_labels, interferer_load,
//                interferer_duration, ack_delay, ack_duration, ack_timeout,
//                horizon, seed, seeds, reset_interval, interferer_log
//   [device.N]   policy, alpha, uplink_duration, period, jitter
//   [bench]      means, policies, alpha, horizon, seed, seeds,
//                reset_interval, regret_decimation
//   [sweep]      loads, alphas, devices, seeds
//
// Lists are comma separated. Unknown sections or keys are errors.

namespace iotbandit {

struct BenchConfig {
    std::vector<double> means = kFieldMeans;
    std::vector<PolicySpec> policies = {PolicySpec{PolicyKind::ucb1, kDefaultUcbAlpha},
                                        PolicySpec{PolicyKind::thompson, kDefaultUcbAlpha},
                                        PolicySpec{PolicyKind::uniform, kDefaultUcbAlpha}};
    std::uint64_t horizon = 10000;
    std::uint64_t seed = 1;
    std::size_t seeds = 200;
    std::uint64_t reset_interval = 0;
    std::uint64_t regret_decimation = 1;

    friend bool operator==(const BenchConfig&, const BenchConfig&) = default;
};

struct SweepGrid {
    std::vector<double> loads;
    std::vector<double> alphas;
    std::vector<std::size_t> device_counts;
    std::size_t seeds = 20;

    [[nodiscard]] bool empty() const noexcept
    {
        return loads.empty() && alphas.empty() && device_counts.empty();
    }

    friend bool operator==(const SweepGrid&, const SweepGrid&) = default;
};

struct RunConfig {
    std::string preset = "malin4";
    ScenarioConfig scenario = malin_preset(4);
    std::size_t sim_seeds = 1;
    BenchConfig bench;
    SweepGrid sweep;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace config_detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    if (trim(text).empty()) {
        return out;
    }
    std::size_t pos = 0;
    while (true) {
        const auto comma = text.find(',', pos);
        out.push_back(trim(std::string_view(text).substr(pos, comma == std::string::npos ? std::string::npos
                                                                                          : comma - pos)));
        if (comma == std::string::npos) {
            return out;
        }
        pos = comma + 1;
    }
}

template <class T>
T parse_number(const std::string& key, const std::string& text)
{
    T value{};
    const std::string t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ConfigError(key, "cannot parse '" + text + "' as a number");
    }
    return value;
}

template <class T>
std::vector<T> parse_numbers(const std::string& key, const std::string& text)
{
    std::vector<T> out;
    for (const auto& item : split_list(text)) {
        out.push_back(parse_number<T>(key, item));
    }
    return out;
}

inline std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <class T>
std::string join(const std::vector<T>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out += ",";
        }
        if constexpr (std::is_floating_point_v<T>) {
            out += fmt(values[i]);
        } else if constexpr (std::is_same_v<T, std::string>) {
            out += values[i];
        } else {
            out += std::to_string(values[i]);
        }
    }
    return out;
}

inline std::string to_string(InterfererLog mode)
{
    switch (mode) {
    case InterfererLog::all: return "all";
    case InterfererLog::overlapping: return "overlapping";
    case InterfererLog::none: return "none";
    }
    return "?";
}

inline InterfererLog parse_log_mode(const std::string& key, const std::string& text)
{
    const auto t = trim(text);
    if (t == "all") {
        return InterfererLog::all;
    }
    if (t == "overlapping") {
        return InterfererLog::overlapping;
    }
    if (t == "none") {
        return InterfererLog::none;
    }
    throw ConfigError(key, "expected all, overlapping or none");
}

inline PolicySpec parse_policy_value(const std::string& key, const std::string& text, double alpha)
{
    try {
        return parse_policy(trim(text), alpha);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
    }
}

using Section = boost::property_tree::ptree;

inline void apply_scenario(const Section& sec, RunConfig& cfg)
{
    auto& sc = cfg.scenario;
    // The preset is applied first so that the other keys override it.
    if (const auto preset = sec.get_optional<std::string>("preset")) {
        const auto base = find_preset(trim(*preset));
        if (!base) {
            throw ConfigError("scenario.preset", "unknown preset '" + *preset + "'");
        }
        cfg.preset = trim(*preset);
        sc = *base;
    }
    for (const auto& [name, node] : sec) {
        const std::string key = "scenario." + name;
        const std::string v = node.data();
        if (name == "preset") {
            continue;
        }
        if (name == "channels") {
            sc.channels = parse_number<std::size_t>(key, v);
        } else if (name == "channel_labels") {
            sc.channel_labels = split_list(v);
        } else if (name == "interferer_load") {
            sc.interferer_load = parse_numbers<double>(key, v);
        } else if (name == "interferer_duration") {
            sc.interferer_duration = parse_number<double>(key, v);
        } else if (name == "ack_delay") {
            sc.ack_delay = parse_number<double>(key, v);
        } else if (name == "ack_duration") {
            sc.ack_duration = parse_number<double>(key, v);
        } else if (name == "ack_timeout") {
            sc.ack_timeout = parse_number<double>(key, v);
        } else if (name == "horizon") {
            sc.horizon_messages = parse_number<std::uint64_t>(key, v);
        } else if (name == "seed") {
            sc.seed = parse_number<std::uint64_t>(key, v);
        } else if (name == "seeds") {
            cfg.sim_seeds = parse_number<std::size_t>(key, v);
        } else if (name == "reset_interval") {
            sc.reset_interval = parse_number<std::uint64_t>(key, v);
        } else if (name == "interferer_log") {
            sc.interferer_log = parse_log_mode(key, v);
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
}

inline DeviceConfig parse_device(const std::string& section, const Section& sec, DeviceConfig dev)
{
    std::string policy_text;
    std::optional<double> alpha;
    for (const auto& [name, node] : sec) {
        const std::string key = section + "." + name;
        const std::string v = node.data();
        if (name == "policy") {
            policy_text = v;
        } else if (name == "alpha") {
            alpha = parse_number<double>(key, v);
        } else if (name == "uplink_duration") {
            dev.uplink_duration = parse_number<double>(key, v);
        } else if (name == "period") {
            dev.period = parse_number<double>(key, v);
        } else if (name == "jitter") {
            dev.jitter_fraction = parse_number<double>(key, v);
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
    if (!policy_text.empty()) {
        dev.policy = parse_policy_value(section + ".policy", policy_text, alpha.value_or(dev.policy.alpha));
    } else if (alpha) {
        dev.policy.alpha = *alpha;
    }
    if (dev.policy.kind == PolicyKind::ucb1 && !(dev.policy.alpha > 0.0)) {
        throw ConfigError(section + ".alpha", "must be positive");
    }
    return dev;
}

inline void apply_bench(const Section& sec, BenchConfig& b)
{
    std::optional<std::string> policies;
    for (const auto& [name, node] : sec) {
        const std::string key = "bench." + name;
        const std::string v = node.data();
        if (name == "means") {
            b.means = parse_numbers<double>(key, v);
        } else if (name == "policies") {
            policies = v;
        } else if (name == "alpha") {
            const double alpha = parse_number<double>(key, v);
            if (!(alpha > 0.0)) {
                throw ConfigError(key, "must be positive");
            }
            for (auto& p : b.policies) {
                p.alpha = alpha;
            }
        } else if (name == "horizon") {
            b.horizon = parse_number<std::uint64_t>(key, v);
        } else if (name == "seed") {
            b.seed = parse_number<std::uint64_t>(key, v);
        } else if (name == "seeds") {
            b.seeds = parse_number<std::size_t>(key, v);
        } else if (name == "reset_interval") {
            b.reset_interval = parse_number<std::uint64_t>(key, v);
        } else if (name == "regret_decimation") {
            b.regret_decimation = parse_number<std::uint64_t>(key, v);
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
    if (policies) {
        const double alpha = b.policies.empty() ? kDefaultUcbAlpha : b.policies.front().alpha;
        std::vector<PolicySpec> parsed;
        for (const auto& item : split_list(*policies)) {
            parsed.push_back(parse_policy_value("bench.policies", item, alpha));
        }
        b.policies = std::move(parsed);
    }
}

inline void apply_sweep(const Section& sec, SweepGrid& g)
{
    for (const auto& [name, node] : sec) {
        const std::string key = "sweep." + name;
        const std::string v = node.data();
        if (name == "loads") {
            g.loads = parse_numbers<double>(key, v);
        } else if (name == "alphas") {
            g.alphas = parse_numbers<double>(key, v);
        } else if (name == "devices") {
            g.device_counts = parse_numbers<std::size_t>(key, v);
        } else if (name == "seeds") {
            g.seeds = parse_number<std::size_t>(key, v);
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
}

} // namespace config_detail

/// Overlays INI text on `base`. Device sections, when present, replace the
/// device list; section device.N starts from the base's device N (or its
/// first device) so partial sections only change what they name.
inline RunConfig parse_config(std::string_view text, RunConfig base = {})
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("", "line " + std::to_string(e.line()) + ": " + e.message());
    }

    RunConfig cfg = std::move(base);
    if (const auto sec = tree.get_child_optional(pt::ptree::path_type("scenario", '\0'))) {
        config_detail::apply_scenario(*sec, cfg);
    }
    std::map<std::size_t, const pt::ptree*> device_sections;
    for (const auto& [name, node] : tree) {
        if (name == "scenario" || name == "bench" || name == "sweep") {
            if (node.data().size() > 0 && node.empty()) {
                throw ConfigError(name, "top-level keys must be inside a section");
            }
            continue;
        }
        if (name.rfind("device.", 0) == 0) {
            const auto idx = config_detail::parse_number<std::size_t>(name, name.substr(7));
            device_sections[idx] = &node;
            continue;
        }
        if (!node.data().empty()) {
            throw ConfigError(name, "keys must be inside a section");
        }
        throw ConfigError(name, "unknown section");
    }
    if (!device_sections.empty()) {
        std::vector<DeviceConfig> devices;
        std::size_t expect = 0;
        for (const auto& [idx, sec] : device_sections) {
            if (idx != expect++) {
                throw ConfigError("device." + std::to_string(idx), "device sections must be numbered 0, 1, 2, ...");
            }
            DeviceConfig start = idx < cfg.scenario.devices.size() ? cfg.scenario.devices[idx]
                                 : cfg.scenario.devices.empty() ? DeviceConfig{}
                                                                : cfg.scenario.devices.front();
            devices.push_back(config_detail::parse_device("device." + std::to_string(idx), *sec, start));
        }
        cfg.scenario.devices = std::move(devices);
    }
    if (const auto sec = tree.get_child_optional("bench")) {
        config_detail::apply_bench(*sec, cfg.bench);
    }
    if (const auto sec = tree.get_child_optional("sweep")) {
        config_detail::apply_sweep(*sec, cfg.sweep);
    }
    return cfg;
}

/// Fully resolved configuration as ordered (section, key, value) entries.
using ConfigEntries = std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>;

inline ConfigEntries config_entries(const RunConfig& cfg)
{
    using config_detail::fmt;
    using config_detail::join;
    const auto& sc = cfg.scenario;
    ConfigEntries out;
    out.push_back({"scenario",
                   {{"preset", cfg.preset},
                    {"channels", std::to_string(sc.channels)},
                    {"channel_labels", join(sc.channel_labels)},
                    {"interferer_load", join(sc.interferer_load)},
                    {"interferer_duration", fmt(sc.interferer_duration)},
                    {"ack_delay", fmt(sc.ack_delay)},
                    {"ack_duration", fmt(sc.ack_duration)},
                    {"ack_timeout", fmt(sc.ack_timeout)},
                    {"horizon", std::to_string(sc.horizon_messages)},
                    {"seed", std::to_string(sc.seed)},
                    {"seeds", std::to_string(cfg.sim_seeds)},
                    {"reset_interval", std::to_string(sc.reset_interval)},
                    {"interferer_log", config_detail::to_string(sc.interferer_log)}}});
    for (std::size_t d = 0; d < sc.devices.size(); ++d) {
        const auto& dev = sc.devices[d];
        out.push_back({"device." + std::to_string(d),
                       {{"policy", to_string(dev.policy.kind)},
                        {"alpha", fmt(dev.policy.alpha)},
                        {"uplink_duration", fmt(dev.uplink_duration)},
                        {"period", fmt(dev.period)},
                        {"jitter", fmt(dev.jitter_fraction)}}});
    }
    std::vector<std::string> policies;
    for (const auto& p : cfg.bench.policies) {
        policies.push_back(p.kind == PolicyKind::ucb1 ? "ucb1:" + fmt(p.alpha) : to_string(p.kind));
    }
    const auto& b = cfg.bench;
    out.push_back({"bench",
                   {{"means", join(b.means)},
                    {"policies", join(policies)},
                    {"horizon", std::to_string(b.horizon)},
                    {"seed", std::to_string(b.seed)},
                    {"seeds", std::to_string(b.seeds)},
                    {"reset_interval", std::to_string(b.reset_interval)},
                    {"regret_decimation", std::to_string(b.regret_decimation)}}});
    const auto& g = cfg.sweep;
    out.push_back({"sweep",
                   {{"loads", join(g.loads)},
                    {"alphas", join(g.alphas)},
                    {"devices", join(g.device_counts)},
                    {"seeds", std::to_string(g.seeds)}}});
    return out;
}

/// INI text that parse_config maps back to `cfg`.
inline std::string to_ini(const RunConfig& cfg)
{
    std::string out;
    for (const auto& [section, entries] : config_entries(cfg)) {
        out += "[" + section + "]\n";
        for (const auto& [key, value] : entries) {
            out += key + " = " + value + "\n";
        }
        out += "\n";
    }
    return out;
}

} // namespace iotbandit
