#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "iotbandit/bench.hpp"
#include "iotbandit/simulator.hpp"

namespace iotbandit::csv {

inline constexpr std::string_view kSimTraceHeader = "device_id,t_index,time_s,channel,uplink_ok,ack_ok,reward";
inline constexpr std::string_view kBenchTraceHeader = "policy,seed,t,channel,reward";
inline constexpr std::string_view kRegretHeader = "policy,t,mean_regret,std_regret";
inline constexpr std::string_view kTransmissionsHeader = "channel,start_s,end_s,source,id";

/// Nine significant digits, the precision used by every CSV artifact.
inline std::string number(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

inline void write_sim_trace(std::ostream& os, std::span<const TraceRecord> trace)
{
    os << kSimTraceHeader << '\n';
    for (const auto& r : trace) {
        os << r.device_id << ',' << r.t_index << ',' << number(r.time) << ',' << r.channel << ','
           << int{r.uplink_ok} << ',' << int{r.ack_ok} << ',' << int{r.reward} << '\n';
    }
}

inline void write_transmissions(std::ostream& os, std::span<const Transmission> log)
{
    os << kTransmissionsHeader << '\n';
    for (const auto& t : log) {
        os << t.channel << ',' << number(t.start) << ',' << number(t.end) << ',' << to_string(t.source) << ','
           << t.id << '\n';
    }
}

/// Appends rows (no header) for one policy/seed run.
inline void write_bench_rows(std::ostream& os, std::string_view policy, std::uint64_t seed,
                             std::span<const BenchRecord> trace)
{
    std::string row;
    for (const auto& r : trace) {
        row.clear();
        row.append(policy).append(",").append(std::to_string(seed)).append(",");
        row.append(std::to_string(r.t)).append(",").append(std::to_string(r.channel)).append(",");
        row.append(r.reward ? "1" : "0").append("\n");
        os << row;
    }
}

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
    {
    }

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

inline std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (comma == std::string_view::npos) {
            return out;
        }
        pos = comma + 1;
    }
}

namespace detail {

template <class T>
T parse_field(std::string_view text, std::size_t line, std::string_view column)
{
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError(line, "bad value '" + std::string(text) + "' in column " + std::string(column));
    }
    return value;
}

inline bool parse_flag(std::string_view text, std::size_t line, std::string_view column)
{
    if (text == "0") {
        return false;
    }
    if (text == "1") {
        return true;
    }
    throw ParseError(line, "column " + std::string(column) + " must be 0 or 1, got '" + std::string(text) + "'");
}

} // namespace detail

/// Reads a sim_trace.csv stream. Errors carry the 1-based line number.
inline std::vector<TraceRecord> read_sim_trace(std::istream& is)
{
    std::vector<TraceRecord> out;
    std::string line;
    std::size_t n = 0;
    if (!std::getline(is, line)) {
        throw ParseError(1, "missing header");
    }
    ++n;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kSimTraceHeader) {
        throw ParseError(1, "unexpected header '" + line + "', expected '" + std::string(kSimTraceHeader) + "'");
    }
    while (std::getline(is, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto f = split(line);
        if (f.size() != 7) {
            throw ParseError(n, "expected 7 fields, found " + std::to_string(f.size()));
        }
        TraceRecord r;
        r.device_id = detail::parse_field<std::size_t>(f[0], n, "device_id");
        r.t_index = detail::parse_field<std::uint64_t>(f[1], n, "t_index");
        r.time = detail::parse_field<double>(f[2], n, "time_s");
        r.channel = detail::parse_field<std::size_t>(f[3], n, "channel");
        r.uplink_ok = detail::parse_flag(f[4], n, "uplink_ok");
        r.ack_ok = detail::parse_flag(f[5], n, "ack_ok");
        r.reward = detail::parse_flag(f[6], n, "reward");
        if (r.reward != (r.uplink_ok && r.ack_ok)) {
            throw ParseError(n, "reward must equal uplink_ok AND ack_ok");
        }
        out.push_back(r);
    }
    return out;
}

} // namespace iotbandit::csv
