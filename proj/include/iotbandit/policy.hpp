#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iotbandit/arm_stats.hpp"
#include "iotbandit/baselines.hpp"
#include "iotbandit/thompson.hpp"
#include "iotbandit/ucb1.hpp"

namespace iotbandit {

enum class PolicyKind { ucb1, thompson, greedy, uniform };

inline constexpr std::string_view kValidPolicyNames = "ucb1[:ALPHA], thompson, greedy, uniform";

struct PolicySpec {
    PolicyKind kind = PolicyKind::ucb1;
    double alpha = kDefaultUcbAlpha;

    friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

class UnknownPolicyError : public std::invalid_argument {
public:
    explicit UnknownPolicyError(const std::string& name)
        : std::invalid_argument("unknown policy '" + name + "'; valid names: " + std::string(kValidPolicyNames))
    {
    }
};

inline std::string to_string(PolicyKind kind)
{
    switch (kind) {
    case PolicyKind::ucb1: return "ucb1";
    case PolicyKind::thompson: return "thompson";
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::uniform: return "uniform";
    }
    return "?";
}

/// Canonical name, e.g. "ucb1" for the default alpha and "ucb1:2" otherwise.
inline std::string policy_label(const PolicySpec& spec)
{
    if (spec.kind != PolicyKind::ucb1 || spec.alpha == kDefaultUcbAlpha) {
        return to_string(spec.kind);
    }
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, spec.alpha);
    return "ucb1:" + std::string(buf, ec == std::errc{} ? end : buf);
}

/// Parses "ucb1", "ucb1:ALPHA", "thompson" (or "ts"), "greedy", "uniform".
inline PolicySpec parse_policy(std::string_view text, double default_alpha = kDefaultUcbAlpha)
{
    const auto colon = text.find(':');
    const std::string_view head = text.substr(0, colon);
    PolicySpec spec;
    spec.alpha = default_alpha;
    if (head == "ucb1" || head == "ucb") {
        spec.kind = PolicyKind::ucb1;
        if (colon != std::string_view::npos) {
            const auto arg = text.substr(colon + 1);
            double alpha = 0.0;
            const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), alpha);
            if (ec != std::errc{} || ptr != arg.data() + arg.size() || !(alpha > 0.0)) {
                throw std::invalid_argument("invalid UCB1 alpha in '" + std::string(text) + "'");
            }
            spec.alpha = alpha;
        }
        return spec;
    }
    if (colon == std::string_view::npos) {
        if (head == "thompson" || head == "ts") {
            spec.kind = PolicyKind::thompson;
            return spec;
        }
        if (head == "greedy") {
            spec.kind = PolicyKind::greedy;
            return spec;
        }
        if (head == "uniform" || head == "random") {
            spec.kind = PolicyKind::uniform;
            return spec;
        }
    }
    throw UnknownPolicyError(std::string(text));
}

inline std::vector<PolicySpec> parse_policy_list(std::string_view text, double default_alpha = kDefaultUcbAlpha)
{
    std::vector<PolicySpec> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        if (item.empty()) {
            throw std::invalid_argument("empty policy name in list '" + std::string(text) + "'");
        }
        out.push_back(parse_policy(item, default_alpha));
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

/// Any of the four policies behind one value type, plus the optional periodic
/// reset: with reset_interval = R > 0 the learner forgets everything after
/// every R observed rewards.
class Policy {
public:
    using Variant = std::variant<Ucb1Policy, ThompsonPolicy, GreedyPolicy, UniformPolicy>;

    Policy(const PolicySpec& spec, std::size_t channels, std::uint64_t reset_interval = 0)
        : spec_(spec), impl_(make(spec, channels)), reset_interval_(reset_interval)
    {
    }

    [[nodiscard]] const PolicySpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const Variant& impl() const noexcept { return impl_; }
    [[nodiscard]] std::size_t channels() const
    {
        return std::visit([](const auto& p) { return p.channels(); }, impl_);
    }

    template <std::uniform_random_bit_generator Generator>
    [[nodiscard]] Decision select(Generator& gen) const
    {
        return std::visit([&gen](const auto& p) { return p.select(gen); }, impl_);
    }

    void update(std::size_t k, bool reward)
    {
        std::visit([&](auto& p) { p.update(k, reward); }, impl_);
        if (reset_interval_ > 0 && ++since_reset_ == reset_interval_) {
            std::visit([](auto& p) { p.reset(); }, impl_);
            since_reset_ = 0;
        }
    }

private:
    static Variant make(const PolicySpec& spec, std::size_t channels)
    {
        switch (spec.kind) {
        case PolicyKind::ucb1: return Ucb1Policy(channels, spec.alpha);
        case PolicyKind::thompson: return ThompsonPolicy(channels);
        case PolicyKind::greedy: return GreedyPolicy(channels);
        case PolicyKind::uniform: return UniformPolicy(channels);
        }
        throw std::invalid_argument("unhandled policy kind");
    }

    PolicySpec spec_;
    Variant impl_;
    std::uint64_t reset_interval_ = 0;
    std::uint64_t since_reset_ = 0;
};

} // namespace iotbandit
