#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "iotbandit/presets.hpp"
#include "iotbandit/simulator.hpp"

namespace iotbandit {
namespace {

Transmission tx(std::size_t ch, double s, double e, SourceKind src = SourceKind::device)
{
    return {ch, s, e, src, 0};
}

ScenarioConfig quiet(std::size_t channels, PolicyKind kind = PolicyKind::ucb1)
{
    ScenarioConfig c;
    c.channels = channels;
    c.interferer_load.assign(channels, 0.0);
    c.devices.push_back(DeviceConfig{PolicySpec{kind, 0.5}, 1.0, 5.0, 0.1});
    c.horizon_messages = 200;
    return c;
}

TEST(Overlaps, HalfOpenSameChannel)
{
    EXPECT_TRUE(overlaps(tx(2, 10, 11), tx(2, 10.5, 10.6)));
    EXPECT_FALSE(overlaps(tx(2, 10, 11), tx(3, 10.5, 10.6)));
    EXPECT_FALSE(overlaps(tx(2, 10, 11), tx(2, 11, 12)));
    EXPECT_FALSE(overlaps(tx(2, 11, 12), tx(2, 10, 11)));
    EXPECT_TRUE(overlaps(tx(0, 0, 2), tx(0, 1.999, 5)));
}

TEST(GenInterference, ZeroLoadIsEmpty)
{
    EXPECT_TRUE(gen_interference(0, 0.0, 0.1, 1e4, Rng{1}).empty());
}

TEST(GenInterference, AirtimeMatchesLoad)
{
    const auto v = gen_interference(1, 0.2, 0.1, 1e4, Rng{2});
    // (count * duration) / horizon; the count's Poisson sd gives ~0.0014
    EXPECT_NEAR(static_cast<double>(v.size()) * 0.1 / 1e4, 0.2, 0.01);
    EXPECT_TRUE(std::ranges::is_sorted(v, {}, &Transmission::start));
    for (const auto& t : v) {
        EXPECT_EQ(t.channel, 1U);
        EXPECT_NEAR(t.end - t.start, 0.1, 1e-9);
        EXPECT_LT(t.start, 1e4);
        EXPECT_EQ(t.source, SourceKind::interferer);
    }
}

TEST(GenInterference, ArrivalCountIsPoisson)
{
    const auto v = gen_interference(0, 0.05, 1.0, 1e5, Rng{3});
    EXPECT_NEAR(static_cast<double>(v.size()), 5000.0, 3.0 * std::sqrt(5000.0));
}

TEST(Validate, RejectsBrokenScenarios)
{
    auto base = malin_preset(4);
    EXPECT_NO_THROW(validate(base));
    auto expect_key = [](ScenarioConfig c, const std::string& key) {
        try {
            validate(c);
            ADD_FAILURE() << "expected error for " << key;
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.key(), key);
        }
    };
    auto c = base;
    c.channels = 1;
    expect_key(c, "channels");
    c = base;
    c.interferer_load[2] = 1.0;
    expect_key(c, "interferer_load");
    c = base;
    c.interferer_load.pop_back();
    expect_key(c, "interferer_load");
    c = base;
    c.ack_duration = 0.9;
    expect_key(c, "ack_timeout");
    c = base;
    c.interferer_duration = 0.0;
    expect_key(c, "interferer_duration");
    c = base;
    c.devices[0].uplink_duration = 5.0;
    expect_key(c, "device.0.uplink_duration");
    c = base;
    c.devices[0].period = 2.0;
    expect_key(c, "device.0.period");
    c = base;
    c.devices.clear();
    expect_key(c, "device");
    c = base;
    c.channel_labels = {"a"};
    expect_key(c, "channel_labels");
}

TEST(RunScenario, IdleBandAlwaysSucceeds)
{
    const auto res = run_scenario(quiet(3));
    ASSERT_EQ(res.trace.size(), 200U);
    for (const auto& r : res.trace) {
        EXPECT_TRUE(r.reward);
    }
}

TEST(RunScenario, SaturatedBandAlmostAlwaysFails)
{
    auto c = quiet(3, PolicyKind::uniform);
    c.interferer_load.assign(3, 0.999);
    const auto res = run_scenario(c);
    int wins = 0;
    for (const auto& r : res.trace) {
        wins += r.reward;
    }
    EXPECT_LE(wins, 2);
}

TEST(RunScenario, SingleDeviceMatchesClosedFormPerChannel)
{
    auto c = malin_preset(4);
    c.devices[0].policy = {PolicyKind::uniform, 0.5};
    c.horizon_messages = 40000;
    c.interferer_log = InterfererLog::none;
    const auto res = run_scenario(c);
    std::vector<double> n(4, 0.0);
    std::vector<double> ok(4, 0.0);
    for (const auto& r : res.trace) {
        n[r.channel] += 1;
        ok[r.channel] += r.reward;
    }
    // exp(-rate * 1.1) * exp(-rate * 0.3) with rate = load / 0.1
    const double expected[] = {0.0608100626, 0.2465969639, 0.4965853038, 1.0};
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(ok[k] / n[k], expected[k], 0.02) << "channel " << k;
    }
}

TEST(RunScenario, DeterministicForSameSeed)
{
    auto c = malin_preset(4);
    c.horizon_messages = 300;
    c.devices.push_back(DeviceConfig{PolicySpec{PolicyKind::thompson, 0.5}, 1.0, 5.0, 0.1});
    const auto a = run_scenario(c);
    const auto b = run_scenario(c);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(a.transmissions, b.transmissions);
    c.seed = 2;
    const auto d = run_scenario(c);
    EXPECT_NE(a.transmissions, d.transmissions);
}

TEST(RunScenario, AddingADeviceKeepsInterfererDraws)
{
    auto c = malin_preset(4);
    c.horizon_messages = 100;
    auto interferers = [](const SimResult& r, double until) {
        std::vector<Transmission> out;
        for (const auto& t : r.transmissions) {
            if (t.source == SourceKind::interferer && t.start < until) {
                out.push_back(t);
            }
        }
        return out;
    };
    const auto one = run_scenario(c);
    c.devices.push_back(DeviceConfig{PolicySpec{PolicyKind::uniform, 0.5}, 1.0, 5.0, 0.1});
    const auto two = run_scenario(c);
    EXPECT_EQ(interferers(one, 400.0), interferers(two, 400.0));

    // and the lazily generated packets equal the eager generator's
    const auto eager = gen_interference(0, c.interferer_load[0], c.interferer_duration, 400.0,
                                        make_stream(c.seed, StreamTag::interferer, 0));
    auto lazy = interferers(one, 400.0);
    std::erase_if(lazy, [](const Transmission& t) { return t.channel != 0; });
    EXPECT_EQ(lazy, eager);
}

// Structural invariants of the trace against the transmission log.
TEST(RunScenarioProperty, RewardsAcksAndCollisionsAreConsistent)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto c = malin_preset(4);
        c.seed = seed;
        c.horizon_messages = 400;
        for (int d = 0; d < 3; ++d) {
            c.devices.push_back(DeviceConfig{PolicySpec{PolicyKind::uniform, 0.5}, 1.0, 5.0, 0.1});
        }
        const auto res = run_scenario(c);
        std::map<std::pair<std::size_t, double>, const Transmission*> acks; // (device, start)
        std::vector<const Transmission*> uplinks;
        for (const auto& t : res.transmissions) {
            EXPECT_LT(t.start, t.end);
            if (t.source == SourceKind::gateway) {
                acks[{t.id, t.start}] = &t;
            } else if (t.source == SourceKind::device) {
                uplinks.push_back(&t);
            }
        }
        ASSERT_EQ(res.trace.size(), 4U * 400U);
        std::map<std::size_t, double> last_outcome;
        for (const auto& r : res.trace) {
            EXPECT_EQ(r.reward, r.uplink_ok && r.ack_ok);
            EXPECT_TRUE(!r.ack_ok || r.uplink_ok);
            const double uplink_end = r.time + 1.0;
            const auto it = acks.find({r.device_id, uplink_end + c.ack_delay});
            EXPECT_EQ(it != acks.end(), r.uplink_ok);
            if (it != acks.end()) {
                EXPECT_EQ(it->second->channel, r.channel);
            }
            // causality: the previous message's outcome was known before this start
            if (const auto prev = last_outcome.find(r.device_id); prev != last_outcome.end()) {
                EXPECT_LE(prev->second, r.time);
            }
            last_outcome[r.device_id] = r.uplink_ok ? uplink_end + c.ack_delay + c.ack_duration : uplink_end;
        }
        // collision symmetry: overlapping uplinks both fail
        std::map<std::pair<std::size_t, double>, bool> up_ok;
        for (const auto& r : res.trace) {
            up_ok[{r.device_id, r.time}] = r.uplink_ok;
        }
        int collisions = 0;
        for (std::size_t i = 0; i < uplinks.size(); ++i) {
            for (std::size_t j = i + 1; j < uplinks.size() && uplinks[j]->start < uplinks[i]->end; ++j) {
                if (overlaps(*uplinks[i], *uplinks[j])) {
                    ++collisions;
                    EXPECT_FALSE((up_ok[{uplinks[i]->id, uplinks[i]->start}]));
                    EXPECT_FALSE((up_ok[{uplinks[j]->id, uplinks[j]->start}]));
                }
            }
        }
        EXPECT_GT(collisions, 0);
    }
}

TEST(RunScenario, OverlappingLogKeepsOnlyRelevantInterferers)
{
    auto c = malin_preset(4);
    c.horizon_messages = 300;
    c.interferer_log = InterfererLog::overlapping;
    const auto res = run_scenario(c);
    std::vector<Transmission> ours;
    std::size_t logged = 0;
    for (const auto& t : res.transmissions) {
        if (t.source != SourceKind::interferer) {
            ours.push_back(t);
        }
    }
    for (const auto& t : res.transmissions) {
        if (t.source == SourceKind::interferer) {
            ++logged;
            EXPECT_TRUE(std::ranges::any_of(ours, [&](const Transmission& o) { return overlaps(o, t); }));
        }
    }
    EXPECT_GT(logged, 0U);
    c.interferer_log = InterfererLog::none;
    const auto quiet_log = run_scenario(c);
    EXPECT_EQ(quiet_log.trace, res.trace);
}

TEST(Presets, ShippedScenariosAreValid)
{
    for (const auto& name : preset_names()) {
        const auto p = find_preset(name);
        ASSERT_TRUE(p.has_value()) << name;
        EXPECT_NO_THROW(validate(*p)) << name;
    }
    EXPECT_EQ(find_preset("malin16")->channels, 16U);
    EXPECT_FALSE(find_preset("nope").has_value());
    const auto malin = malin_preset(4);
    EXPECT_EQ(malin.interferer_load, (std::vector<double>{0.2, 0.1, 0.05, 0.0}));
    EXPECT_DOUBLE_EQ(malin.devices[0].uplink_duration / malin.devices[0].period, 0.2);
}

TEST(Presets, IotligentLoadsReproduceFieldMeans)
{
    const auto c = iotligent_preset();
    const auto& dev = c.devices[0];
    EXPECT_LT(dev.uplink_duration / dev.period, 0.01); // one message every two hours
    EXPECT_EQ(c.horizon_messages, 129U);
    EXPECT_EQ(c.channel_labels, (std::vector<std::string>{"868100000", "868300000", "868500000"}));
    const double p1 = aloha_success_probability(c.interferer_load[1], c.interferer_duration, dev.uplink_duration,
                                                c.ack_delay, c.ack_duration);
    const double p2 = aloha_success_probability(c.interferer_load[2], c.interferer_duration, dev.uplink_duration,
                                                c.ack_delay, c.ack_duration);
    EXPECT_NEAR(p1, 0.115, 1e-12);
    EXPECT_NEAR(p2, 0.051, 1e-12);
    EXPECT_LT(aloha_success_probability(c.interferer_load[0], c.interferer_duration, dev.uplink_duration,
                                        c.ack_delay, c.ack_duration),
              1e-6);
    const auto res = run_scenario(c);
    EXPECT_EQ(res.trace.size(), 129U);
}

TEST(ClosedForm, OverlappingWindowsCountedOnce)
{
    // ACK delay shorter than an interferer packet: the two exposure windows
    // merge into (s - L_int, s + L_up + delay + L_ack).
    const double p = aloha_success_probability(0.1, 0.5, 1.0, 0.2, 0.3);
    EXPECT_NEAR(p, std::exp(-0.2 * (0.5 + 1.0 + 0.2 + 0.3)), 1e-12);
}

TEST(TableReplay, ShapeAndDegenerateChannel)
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto r = table_i_replay(seed);
        ASSERT_EQ(r.summary.channels.size(), 3U);
        std::uint64_t total = 0;
        for (const auto& ch : r.summary.channels) {
            total += ch.pulls;
        }
        EXPECT_EQ(total, 129U);
        EXPECT_EQ(r.summary.channels[0].empirical_mean, 0.0);
        EXPECT_EQ(r.summary.channels[0].successes, 0U);
    }
}

TEST(TableReplay, MedianOrderingOverSeeds)
{
    std::vector<double> tk[3];
    for (std::uint64_t seed = 1; seed <= 500; ++seed) {
        const auto r = table_i_replay(seed);
        for (std::size_t k = 0; k < 3; ++k) {
            tk[k].push_back(static_cast<double>(r.summary.channels[k].pulls));
        }
    }
    auto median = [](std::vector<double> v) {
        std::ranges::sort(v);
        return (v[v.size() / 2 - 1] + v[v.size() / 2]) / 2.0;
    };
    EXPECT_GT(median(tk[1]), median(tk[0]));
    EXPECT_GT(median(tk[1]), median(tk[2]));
}

} // namespace
} // namespace iotbandit
