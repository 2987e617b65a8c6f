#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "iotbandit/errors.hpp"
#include "iotbandit/policy.hpp"
#include "iotbandit/random.hpp"

namespace iotbandit {

// Ordering rank at identical timestamps: interferer < device < gateway.
enum class SourceKind : int { interferer = 0, device = 1, gateway = 2 };

inline const char* to_string(SourceKind kind)
{
    switch (kind) {
    case SourceKind::interferer: return "interferer";
    case SourceKind::device: return "uplink";
    case SourceKind::gateway: return "ack";
    }
    return "?";
}

/// Airtime [start, end) on one channel. `id` is the device id for uplinks and
/// ACKs, and the per-channel arrival number for interferer packets.
struct Transmission {
    std::size_t channel = 0;
    double start = 0.0;
    double end = 0.0;
    SourceKind source = SourceKind::interferer;
    std::size_t id = 0;

    friend bool operator==(const Transmission&, const Transmission&) = default;
};

/// Same channel and a non-empty intersection of the half-open intervals.
inline bool overlaps(const Transmission& a, const Transmission& b) noexcept
{
    return a.channel == b.channel && a.start < b.end && b.start < a.end;
}

struct DeviceConfig {
    PolicySpec policy;
    double uplink_duration = 1.0;
    double period = 5.0;
    double jitter_fraction = 0.1;

    friend bool operator==(const DeviceConfig&, const DeviceConfig&) = default;
};

enum class InterfererLog { all, overlapping, none };

struct ScenarioConfig {
    std::size_t channels = 0;
    std::vector<std::string> channel_labels;
    std::vector<double> interferer_load;
    double interferer_duration = 0.1;
    std::vector<DeviceConfig> devices;
    double ack_delay = 0.2;
    double ack_duration = 0.2;
    double ack_timeout = 1.0;
    std::uint64_t horizon_messages = 2000;
    std::uint64_t seed = 1;
    std::uint64_t reset_interval = 0; // 0: never reset
    InterfererLog interferer_log = InterfererLog::all;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// One uplink attempt as seen by the transmitting device.
struct TraceRecord {
    std::size_t device_id = 0;
    std::uint64_t t_index = 0; // 1-based message number of this device
    double time = 0.0;         // uplink start
    std::size_t channel = 0;
    bool uplink_ok = false;
    bool ack_ok = false;
    bool reward = false;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct SimResult {
    std::vector<TraceRecord> trace;
    std::vector<Transmission> transmissions;
};

namespace detail {

inline bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

} // namespace detail

/// Throws ConfigError naming the first violated constraint.
inline void validate(const ScenarioConfig& c)
{
    using detail::positive_finite;
    if (c.channels < 2) {
        throw ConfigError("channels", "at least 2 channels are required");
    }
    if (!c.channel_labels.empty() && c.channel_labels.size() != c.channels) {
        throw ConfigError("channel_labels", "expected " + std::to_string(c.channels) + " labels");
    }
    if (c.interferer_load.size() != c.channels) {
        throw ConfigError("interferer_load", "expected " + std::to_string(c.channels) + " loads");
    }
    for (const double load : c.interferer_load) {
        if (!(load >= 0.0 && load < 1.0)) {
            throw ConfigError("interferer_load", "loads must lie in [0, 1)");
        }
    }
    if (!positive_finite(c.interferer_duration)) {
        throw ConfigError("interferer_duration", "must be positive");
    }
    if (!positive_finite(c.ack_delay)) {
        throw ConfigError("ack_delay", "must be positive");
    }
    if (!positive_finite(c.ack_duration)) {
        throw ConfigError("ack_duration", "must be positive");
    }
    if (!positive_finite(c.ack_timeout)) {
        throw ConfigError("ack_timeout", "must be positive");
    }
    if (c.ack_delay + c.ack_duration > c.ack_timeout) {
        throw ConfigError("ack_timeout", "ack_delay + ack_duration must not exceed ack_timeout");
    }
    if (c.horizon_messages == 0) {
        throw ConfigError("horizon", "must be at least 1 message");
    }
    if (c.devices.empty()) {
        throw ConfigError("device", "at least one device is required");
    }
    for (std::size_t d = 0; d < c.devices.size(); ++d) {
        const auto& dev = c.devices[d];
        const std::string prefix = "device." + std::to_string(d) + ".";
        if (!positive_finite(dev.uplink_duration)) {
            throw ConfigError(prefix + "uplink_duration", "must be positive");
        }
        if (!positive_finite(dev.period)) {
            throw ConfigError(prefix + "period", "must be positive");
        }
        if (!(dev.jitter_fraction >= 0.0 && dev.jitter_fraction < 1.0)) {
            throw ConfigError(prefix + "jitter", "must lie in [0, 1)");
        }
        if (dev.uplink_duration >= dev.period) {
            throw ConfigError(prefix + "uplink_duration", "must be shorter than the period");
        }
        // The shortest gap between two transmissions must cover the uplink and
        // the whole ACK window, so the reward is known before the next choice.
        if (dev.uplink_duration + c.ack_timeout > dev.period * (1.0 - dev.jitter_fraction)) {
            throw ConfigError(prefix + "period",
                              "uplink_duration + ack_timeout must fit in period * (1 - jitter)");
        }
        if (dev.policy.kind == PolicyKind::ucb1 && !positive_finite(dev.policy.alpha)) {
            throw ConfigError(prefix + "alpha", "must be positive");
        }
    }
}

/// Poisson packet arrivals with rate load / duration, produced on demand.
class PoissonArrivals {
public:
    PoissonArrivals(double load, double duration, Rng rng)
        : rate_(load / duration), rng_(std::move(rng))
    {
        next_ = rate_ > 0.0 ? draw_gap() : std::numeric_limits<double>::infinity();
    }

    [[nodiscard]] double peek() const noexcept { return next_; }

    double pop()
    {
        const double t = next_;
        next_ += draw_gap();
        return t;
    }

    // Drops pending arrivals before t. Arrivals after t of a Poisson process
    // are independent of those before it, so the stream stays exact.
    void skip_to(double t)
    {
        if (next_ < t) {
            next_ = t + draw_gap();
        }
    }

private:
    double draw_gap() { return -std::log1p(-unit_uniform(rng_)) / rate_; }

    double rate_;
    Rng rng_;
    double next_;
};

/// All interferer packets on `channel` starting in [0, horizon), sorted.
inline std::vector<Transmission> gen_interference(std::size_t channel, double load, double duration, double horizon,
                                                  Rng rng)
{
    std::vector<Transmission> out;
    if (load <= 0.0) {
        return out;
    }
    PoissonArrivals arrivals(load, duration, std::move(rng));
    std::size_t n = 0;
    while (arrivals.peek() < horizon) {
        const double s = arrivals.pop();
        out.push_back({channel, s, s + duration, SourceKind::interferer, n++});
    }
    return out;
}

namespace detail {

// Interferer packets of one channel, generated lazily up to the latest query
// time and pruned once no pending interval can reach them.
class InterfererChannel {
public:
    // `reach`: longest queried interval plus the packet duration. Queries
    // arrive with non-decreasing end times, so packets starting before
    // e - reach can never matter again.
    InterfererChannel(std::size_t channel, double load, double duration, double reach, Rng rng, InterfererLog mode,
                      std::vector<Transmission>& log)
        : channel_(channel), duration_(duration), reach_(reach), arrivals_(load, duration, std::move(rng)),
          mode_(mode), log_(&log)
    {
    }

    // True if any packet overlaps [s, e). Packets are generated up to e; when
    // the full log is not kept, long idle stretches are skipped.
    bool hits(double s, double e)
    {
        if (mode_ != InterfererLog::all) {
            arrivals_.skip_to(e - reach_);
        }
        generate_until(e);
        bool hit = false;
        for (auto it = recent_.rbegin(); it != recent_.rend(); ++it) {
            if (it->start >= e) {
                continue;
            }
            if (it->start + duration_ <= s) {
                break; // equal durations: earlier packets end earlier still
            }
            hit = true;
            if (mode_ == InterfererLog::overlapping && !it->logged) {
                it->logged = true;
                log_->push_back({channel_, it->start, it->start + duration_, SourceKind::interferer, it->seq});
            }
            if (mode_ != InterfererLog::overlapping) {
                break;
            }
        }
        return hit;
    }

    void generate_until(double t)
    {
        while (arrivals_.peek() < t) {
            const double s = arrivals_.pop();
            recent_.push_back({s, next_seq_, false});
            if (mode_ == InterfererLog::all) {
                log_->push_back({channel_, s, s + duration_, SourceKind::interferer, next_seq_});
            }
            ++next_seq_;
        }
    }

    void prune_before(double t)
    {
        while (!recent_.empty() && recent_.front().start + duration_ < t) {
            recent_.pop_front();
        }
    }

private:
    struct Packet {
        double start;
        std::size_t seq;
        bool logged;
    };

    std::size_t channel_;
    double duration_;
    double reach_;
    PoissonArrivals arrivals_;
    InterfererLog mode_;
    std::vector<Transmission>* log_;
    std::deque<Packet> recent_;
    std::size_t next_seq_ = 0;
};

enum class EventType : int { uplink_end = 0, ack_end = 1, device_start = 2 };

struct Event {
    double time;
    int phase; // 0: interval ends, 1: transmission starts
    SourceKind kind;
    std::size_t entity;
    EventType type;
    std::size_t ref;

    [[nodiscard]] auto key() const { return std::tie(time, phase, kind, entity, type, ref); }
    friend bool operator>(const Event& a, const Event& b) { return a.key() > b.key(); }
};

struct DeviceRuntime {
    DeviceConfig config;
    Policy policy;
    Rng policy_rng;
    Rng timing_rng;
    double phase = 0.0;
    std::uint64_t sent = 0;
    bool awaiting = false;
};

class Simulation {
public:
    explicit Simulation(const ScenarioConfig& config) : config_(config)
    {
        validate(config_);
        const std::size_t k_count = config_.channels;
        uplinks_.resize(k_count);
        acks_.resize(k_count);
        for (const auto& dc : config_.devices) {
            max_uplink_ = std::max(max_uplink_, dc.uplink_duration);
        }
        const double reach = std::max(max_uplink_, config_.ack_duration) + config_.interferer_duration;
        for (std::size_t k = 0; k < k_count; ++k) {
            interferers_.emplace_back(k, config_.interferer_load[k], config_.interferer_duration, reach,
                                      make_stream(config_.seed, StreamTag::interferer, k), config_.interferer_log,
                                      interferer_log_);
        }
        for (std::size_t d = 0; d < config_.devices.size(); ++d) {
            const auto& dc = config_.devices[d];
            DeviceRuntime rt{dc,
                             Policy(dc.policy, k_count, config_.reset_interval),
                             make_stream(config_.seed, StreamTag::device_policy, d),
                             make_stream(config_.seed, StreamTag::device_timing, d)};
            rt.phase = dc.period * (0.5 + unit_uniform(rt.timing_rng));
            devices_.push_back(std::move(rt));
        }
    }

    SimResult run()
    {
        for (std::size_t d = 0; d < devices_.size(); ++d) {
            schedule_next_start(d);
        }
        while (!queue_.empty()) {
            const Event ev = queue_.top();
            queue_.pop();
            switch (ev.type) {
            case EventType::device_start: on_device_start(ev); break;
            case EventType::uplink_end: on_uplink_end(ev); break;
            case EventType::ack_end: on_ack_end(ev); break;
            }
            prune(ev.time);
        }
        return finish();
    }

private:
    void schedule_next_start(std::size_t d)
    {
        auto& dev = devices_[d];
        if (dev.sent >= config_.horizon_messages) {
            return;
        }
        const double period = dev.config.period;
        const double jitter = (unit_uniform(dev.timing_rng) - 0.5) * dev.config.jitter_fraction * period;
        const double t = dev.phase + static_cast<double>(dev.sent) * period + jitter;
        queue_.push({t, 1, SourceKind::device, d, EventType::device_start, dev.sent});
    }

    void on_device_start(const Event& ev)
    {
        auto& dev = devices_[ev.entity];
        if (dev.awaiting) {
            throw std::logic_error("device transmitted before learning the previous outcome");
        }
        const Decision choice = dev.policy.select(dev.policy_rng);
        const std::size_t idx = tx_.size();
        tx_.push_back({choice.channel, ev.time, ev.time + dev.config.uplink_duration, SourceKind::device, ev.entity});
        uplinks_[choice.channel].push_back(idx);
        queue_.push({ev.time + dev.config.uplink_duration, 0, SourceKind::device, ev.entity, EventType::uplink_end,
                     idx});
        dev.awaiting = true;
        ++dev.sent;
        schedule_next_start(ev.entity);
    }

    void on_uplink_end(const Event& ev)
    {
        const Transmission up = tx_[ev.ref];
        const bool clean = !interferers_[up.channel].hits(up.start, up.end) &&
                           !collides_with(uplinks_[up.channel], up, ev.ref) &&
                           !collides_with(acks_[up.channel], up, ev.ref);
        if (!clean) {
            finalize(ev.entity, up, false, false);
            return;
        }
        const std::size_t idx = tx_.size();
        const double start = up.end + config_.ack_delay;
        tx_.push_back({up.channel, start, start + config_.ack_duration, SourceKind::gateway, ev.entity});
        acks_[up.channel].push_back(idx);
        ack_parent_.emplace_back(idx, ev.ref);
        queue_.push({start + config_.ack_duration, 0, SourceKind::gateway, ev.entity, EventType::ack_end, idx});
    }

    void on_ack_end(const Event& ev)
    {
        const Transmission ack = tx_[ev.ref];
        const bool clean = !interferers_[ack.channel].hits(ack.start, ack.end) &&
                           !collides_with(uplinks_[ack.channel], ack, ev.ref);
        const auto parent = std::ranges::find_if(ack_parent_, [&](const auto& p) { return p.first == ev.ref; });
        finalize(ev.entity, tx_[parent->second], true, clean);
        ack_parent_.erase(parent);
    }

    // Any transmission in `list` (sorted by start) other than `self`
    // overlapping `tx`.
    bool collides_with(const std::vector<std::size_t>& list, const Transmission& tx, std::size_t self) const
    {
        const double lookback = std::max(max_uplink_, config_.ack_duration);
        auto it = std::ranges::upper_bound(list, tx.end, std::less<>{},
                                           [this](std::size_t i) { return tx_[i].start; });
        while (it != list.begin()) {
            --it;
            const Transmission& other = tx_[*it];
            if (other.start + lookback <= tx.start) {
                break;
            }
            if (*it != self && overlaps(other, tx)) {
                return true;
            }
        }
        return false;
    }

    void finalize(std::size_t d, const Transmission& uplink, bool uplink_ok, bool ack_ok)
    {
        auto& dev = devices_[d];
        const bool reward = uplink_ok && ack_ok;
        dev.policy.update(uplink.channel, reward);
        dev.awaiting = false;
        trace_.push_back({d, ++completed_[d], uplink.start, uplink.channel, uplink_ok, ack_ok, reward});
    }

    void prune(double now)
    {
        const double keep = now - std::max(max_uplink_, config_.ack_duration) - config_.interferer_duration - 1.0;
        for (auto& ch : interferers_) {
            ch.prune_before(keep);
        }
    }

    SimResult finish()
    {
        if (config_.interferer_log == InterfererLog::all) {
            double last = 0.0;
            for (const auto& t : tx_) {
                last = std::max(last, t.end);
            }
            for (auto& ch : interferers_) {
                ch.generate_until(last);
            }
        }
        SimResult result;
        result.trace = std::move(trace_);
        std::ranges::sort(result.trace, {}, [](const TraceRecord& r) { return std::tie(r.device_id, r.t_index); });
        result.transmissions = std::move(tx_);
        result.transmissions.insert(result.transmissions.end(), interferer_log_.begin(), interferer_log_.end());
        std::ranges::sort(result.transmissions, {}, [](const Transmission& t) {
            return std::make_tuple(t.start, t.channel, static_cast<int>(t.source), t.id);
        });
        return result;
    }

    ScenarioConfig config_;
    std::vector<DeviceRuntime> devices_;
    std::vector<InterfererChannel> interferers_;
    std::vector<Transmission> interferer_log_;
    std::vector<Transmission> tx_; // device uplinks and gateway ACKs
    std::vector<std::vector<std::size_t>> uplinks_;
    std::vector<std::vector<std::size_t>> acks_;
    std::vector<std::pair<std::size_t, std::size_t>> ack_parent_; // (ack, uplink) in flight
    std::vector<TraceRecord> trace_;
    std::vector<std::uint64_t> completed_ = std::vector<std::uint64_t>(config_.devices.size(), 0);
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    double max_uplink_ = 0.0;
};

} // namespace detail

/// Runs the pure-ALOHA scenario to completion: every device sends
/// horizon_messages uplinks, the gateway answers clean uplinks on the same
/// channel, and each device learns from its own ACKs.
inline SimResult run_scenario(const ScenarioConfig& config)
{
    return detail::Simulation(config).run();
}

/// Closed-form probability that an isolated uplink and its ACK both avoid
/// Poisson interferer packets: exp(-rate * |vulnerable time|), where the
/// vulnerable time is the union of (s - L_int, s + L_up) and the ACK's
/// (a - L_int, a + L_ack).
inline double aloha_success_probability(double load, double interferer_duration, double uplink_duration,
                                        double ack_delay, double ack_duration)
{
    const double rate = load / interferer_duration;
    const double up = uplink_duration + interferer_duration;
    const double ack = ack_duration + interferer_duration;
    const double gap = ack_delay - interferer_duration; // ACK window starts this long after the uplink ends
    const double exposure = gap >= 0.0 ? up + ack : up + ack + gap;
    return std::exp(-rate * exposure);
}

} // namespace iotbandit
