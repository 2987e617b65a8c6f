#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "iotbandit/bench.hpp"
#include "iotbandit/csv.hpp"
#include "iotbandit/metrics.hpp"
#include "iotbandit/presets.hpp"
#include "iotbandit/simulator.hpp"

namespace iotbandit::cli {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_output(const fs::path& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw IoError("cannot write " + path.string());
    }
    return os;
}

void close_output(std::ofstream& os, const fs::path& path)
{
    os.close();
    if (!os) {
        throw IoError("error while writing " + path.string());
    }
}

void make_out_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
}

std::string sha256_hex(const std::string& bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg, std::uint64_t seed,
                    const std::vector<std::string>& files, const std::string& started)
{
    nlohmann::ordered_json j;
    j["tool"] = "iotbandit";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["master_seed"] = seed;
    j["started_at"] = started;
    nlohmann::ordered_json conf = nlohmann::ordered_json::object();
    for (const auto& [section, entries] : config_entries(cfg)) {
        auto& sec = conf[section];
        for (const auto& [key, value] : entries) {
            sec[key] = value;
        }
    }
    j["config"] = conf;
    j["config_ini"] = to_ini(cfg);
    auto& out_files = j["files"];
    out_files = nlohmann::ordered_json::object();
    for (const auto& name : files) {
        const auto bytes = read_file(dir / name);
        out_files[name] = {{"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}};
    }
    const auto path = dir / "manifest.json";
    auto os = open_output(path);
    os << j.dump(2) << '\n';
    close_output(os, path);
}

std::vector<PolicySpec> policies_from_flag(const std::string& text, double alpha)
{
    try {
        return parse_policy_list(text, alpha);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("policy", e.what());
    }
}

template <class T>
std::vector<T> list_from_flag(const std::string& key, const std::string& text)
{
    return config_detail::parse_numbers<T>(key, text);
}

std::string row(std::initializer_list<std::string> fields)
{
    std::string out;
    bool first = true;
    for (const auto& f : fields) {
        if (!first) {
            out += ',';
        }
        out += f;
        first = false;
    }
    out += '\n';
    return out;
}

} // namespace

RunConfig resolve_config(const Options& opts)
{
    RunConfig cfg;
    if (opts.preset) {
        const auto preset = find_preset(*opts.preset);
        if (!preset) {
            std::string names;
            for (const auto& n : preset_names()) {
                names += (names.empty() ? "" : ", ") + n;
            }
            throw ConfigError("preset", "unknown preset '" + *opts.preset + "'; valid presets: " + names);
        }
        cfg.preset = *opts.preset;
        cfg.scenario = *preset;
    }
    if (opts.config) {
        cfg = parse_config(read_file(*opts.config), std::move(cfg));
    }
    if (opts.seed) {
        cfg.scenario.seed = *opts.seed;
        cfg.bench.seed = *opts.seed;
    }
    if (opts.seeds) {
        cfg.sim_seeds = *opts.seeds;
        cfg.bench.seeds = *opts.seeds;
        cfg.sweep.seeds = *opts.seeds;
    }
    if (opts.horizon) {
        cfg.scenario.horizon_messages = *opts.horizon;
        cfg.bench.horizon = *opts.horizon;
    }
    if (opts.policy) {
        const double alpha = cfg.bench.policies.empty() ? kDefaultUcbAlpha : cfg.bench.policies.front().alpha;
        cfg.bench.policies = policies_from_flag(*opts.policy, alpha);
        const auto specs = policies_from_flag(*opts.policy, kDefaultUcbAlpha);
        auto& devices = cfg.scenario.devices;
        if (specs.size() == 1) {
            for (auto& d : devices) {
                d.policy = specs.front();
            }
        } else if (specs.size() == devices.size()) {
            for (std::size_t i = 0; i < devices.size(); ++i) {
                devices[i].policy = specs[i];
            }
        } else {
            throw ConfigError("policy", "give one policy for all devices or one per device (" +
                                            std::to_string(devices.size()) + ")");
        }
    }
    if (opts.loads) {
        cfg.sweep.loads = list_from_flag<double>("loads", *opts.loads);
    }
    if (opts.alphas) {
        cfg.sweep.alphas = list_from_flag<double>("alphas", *opts.alphas);
    }
    if (opts.devices) {
        cfg.sweep.device_counts = list_from_flag<std::size_t>("devices", *opts.devices);
    }
    return cfg;
}

ScenarioConfig sweep_scenario(const ScenarioConfig& base, std::optional<double> max_load,
                              std::optional<double> alpha, std::optional<std::size_t> device_count)
{
    ScenarioConfig sc = base;
    if (max_load) {
        if (!(*max_load >= 0.0 && *max_load < 1.0)) {
            throw ConfigError("sweep.loads", "loads must lie in [0, 1)");
        }
        const double top = sc.interferer_load.empty()
                               ? 0.0
                               : *std::ranges::max_element(sc.interferer_load);
        for (auto& load : sc.interferer_load) {
            load = top > 0.0 ? load / top * *max_load : *max_load;
        }
    }
    if (device_count) {
        if (*device_count == 0 || sc.devices.empty()) {
            throw ConfigError("sweep.devices", "device counts must be positive");
        }
        std::vector<DeviceConfig> devices;
        for (std::size_t i = 0; i < *device_count; ++i) {
            devices.push_back(base.devices[i % base.devices.size()]);
        }
        sc.devices = std::move(devices);
    }
    if (alpha) {
        if (!(*alpha > 0.0)) {
            throw ConfigError("sweep.alphas", "alpha must be positive");
        }
        for (auto& d : sc.devices) {
            d.policy = PolicySpec{PolicyKind::ucb1, *alpha};
        }
    }
    return sc;
}

void cmd_bench(const Options& opts, std::ostream& out)
{
    const std::string started = utc_timestamp();
    const RunConfig cfg = resolve_config(opts);
    const BenchConfig& b = cfg.bench;
    std::optional<BernoulliEnv> env_holder;
    try {
        env_holder.emplace(b.means);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("bench.means", e.what());
    }
    const BernoulliEnv& env = *env_holder;
    if (b.horizon == 0) {
        throw ConfigError("bench.horizon", "must be at least 1");
    }
    if (b.seeds == 0) {
        throw ConfigError("bench.seeds", "must be at least 1");
    }
    if (b.regret_decimation == 0) {
        throw ConfigError("bench.regret_decimation", "must be at least 1");
    }
    if (b.policies.empty()) {
        throw ConfigError("bench.policies", "no policy selected");
    }

    // Rows are ordered by (policy label, seed, t).
    std::vector<std::pair<std::string, PolicySpec>> policies;
    for (const auto& p : b.policies) {
        policies.emplace_back(policy_label(p), p);
    }
    std::ranges::sort(policies, {}, [](const auto& p) { return p.first; });
    if (std::ranges::adjacent_find(policies, {}, [](const auto& p) { return p.first; }) != policies.end()) {
        throw ConfigError("bench.policies", "duplicate policy");
    }

    make_out_dir(opts.out);
    const auto trace_path = opts.out / "bench_trace.csv";
    const auto summary_path = opts.out / "bench_summary.csv";
    const auto regret_path = opts.out / "regret.csv";
    auto trace_os = open_output(trace_path);
    auto summary_os = open_output(summary_path);
    auto regret_os = open_output(regret_path);
    trace_os << csv::kBenchTraceHeader << '\n';
    summary_os << "policy,seeds,horizon,mean_success_rate,std_success_rate,mean_regret,std_regret,"
                  "mean_best_channel_fraction_final,std_best_channel_fraction_final\n";
    regret_os << csv::kRegretHeader << '\n';

    const std::size_t best = static_cast<std::size_t>(std::ranges::max_element(env.means()) - env.means().begin());
    const std::uint64_t window = std::max<std::uint64_t>(1, b.horizon / 10);

    for (const auto& [label, spec] : policies) {
        const auto runs = run_bench_seeds(spec, env, b.horizon, b.seed, b.seeds, b.reset_interval);
        std::vector<double> rates;
        std::vector<double> final_regret;
        std::vector<double> best_fraction;
        std::vector<std::vector<double>> curves;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& trace = runs[i];
            csv::write_bench_rows(trace_os, label, b.seed + i, trace);
            const auto summary = table_summary(trace, env.channels(), env.means());
            rates.push_back(summary.success_rate);
            final_regret.push_back(*summary.regret);
            best_fraction.push_back(channel_fraction(trace, best, b.horizon - window));
            curves.push_back(regret_curve(trace, env.means()));
        }
        const auto rate = mean_std(rates);
        const auto reg = mean_std(final_regret);
        const auto frac = mean_std(best_fraction);
        summary_os << row({label, std::to_string(b.seeds), std::to_string(b.horizon), csv::number(rate.mean),
                           csv::number(rate.std), csv::number(reg.mean), csv::number(reg.std),
                           csv::number(frac.mean), csv::number(frac.std)});
        const auto envelope = aggregate(curves);
        for (std::uint64_t t = 1; t <= b.horizon; ++t) {
            if (t % b.regret_decimation == 0 || t == b.horizon) {
                regret_os << row({label, std::to_string(t), csv::number(envelope.mean[t - 1]),
                                  csv::number(envelope.std[t - 1])});
            }
        }
        out << label << ": success rate " << csv::number(rate.mean) << " (uniform baseline "
            << csv::number(random_baseline_rate(env.means())) << "), regret(" << b.horizon << ") "
            << csv::number(reg.mean) << '\n';
    }
    close_output(trace_os, trace_path);
    close_output(summary_os, summary_path);
    close_output(regret_os, regret_path);
    write_manifest(opts.out, "bench", cfg, b.seed, {"bench_trace.csv", "bench_summary.csv", "regret.csv"}, started);
}

void cmd_sim(const Options& opts, std::ostream& out)
{
    const std::string started = utc_timestamp();
    const RunConfig cfg = resolve_config(opts);
    validate(cfg.scenario);
    if (cfg.sim_seeds == 0) {
        throw ConfigError("scenario.seeds", "must be at least 1");
    }
    const auto& base = cfg.scenario;

    struct SeedResult {
        std::vector<RunSummary> per_device;
    };
    std::vector<SeedResult> results(cfg.sim_seeds);
    SimResult first;
    parallel_for(cfg.sim_seeds, [&](std::size_t i) {
        ScenarioConfig sc = base;
        sc.seed = base.seed + i;
        if (i > 0) {
            sc.interferer_log = InterfererLog::none;
        }
        SimResult res = run_scenario(sc);
        for (std::size_t d = 0; d < sc.devices.size(); ++d) {
            std::vector<TraceRecord> mine;
            std::ranges::copy_if(res.trace, std::back_inserter(mine),
                                 [d](const TraceRecord& r) { return r.device_id == d; });
            results[i].per_device.push_back(table_summary(mine, sc.channels));
        }
        if (i == 0) {
            first = std::move(res);
        }
    });

    make_out_dir(opts.out);
    const auto trace_path = opts.out / "sim_trace.csv";
    const auto tx_path = opts.out / "transmissions.csv";
    const auto summary_path = opts.out / "sim_summary.csv";
    {
        auto os = open_output(trace_path);
        csv::write_sim_trace(os, first.trace);
        close_output(os, trace_path);
    }
    {
        auto os = open_output(tx_path);
        csv::write_transmissions(os, first.transmissions);
        close_output(os, tx_path);
    }
    {
        auto os = open_output(summary_path);
        os << "seed,device_id,policy,channel,label,pulls,successes,empirical_mean,device_success_rate\n";
        for (std::size_t i = 0; i < results.size(); ++i) {
            for (std::size_t d = 0; d < results[i].per_device.size(); ++d) {
                const auto& s = results[i].per_device[d];
                for (std::size_t k = 0; k < s.channels.size(); ++k) {
                    const auto& c = s.channels[k];
                    const std::string label = k < base.channel_labels.size() ? base.channel_labels[k] : "";
                    os << row({std::to_string(base.seed + i), std::to_string(d),
                               policy_label(base.devices[d].policy), std::to_string(k), label,
                               std::to_string(c.pulls), std::to_string(c.successes), csv::number(c.empirical_mean),
                               csv::number(s.success_rate)});
                }
            }
        }
        close_output(os, summary_path);
    }

    std::vector<double> channel_means(base.channels);
    for (std::size_t k = 0; k < base.channels; ++k) {
        channel_means[k] =
            aloha_success_probability(base.interferer_load[k], base.interferer_duration,
                                      base.devices.front().uplink_duration, base.ack_delay, base.ack_duration);
    }
    for (std::size_t d = 0; d < base.devices.size(); ++d) {
        const auto& s = results.front().per_device[d];
        out << "device " << d << " (" << policy_label(base.devices[d].policy) << "), seed " << base.seed << ":\n"
            << format_table(s, base.channel_labels);
        std::vector<double> rates;
        for (const auto& r : results) {
            rates.push_back(r.per_device[d].success_rate);
        }
        const auto ms = mean_std(rates);
        out << "mean success rate over " << rates.size() << " seed(s): " << csv::number(ms.mean) << " (std "
            << csv::number(ms.std) << ")\n\n";
    }
    out << "isolated-device closed-form success per channel:";
    for (const double m : channel_means) {
        out << ' ' << csv::number(m);
    }
    out << "\nuniform-access expectation: " << csv::number(random_baseline_rate(channel_means)) << '\n';
    write_manifest(opts.out, "sim", cfg, base.seed, {"sim_trace.csv", "transmissions.csv", "sim_summary.csv"},
                   started);
}

void cmd_sweep(const Options& opts, std::ostream& out)
{
    const std::string started = utc_timestamp();
    const RunConfig cfg = resolve_config(opts);
    const auto& grid = cfg.sweep;
    if (grid.empty()) {
        throw ConfigError("sweep", "empty grid: give loads, alphas and/or devices");
    }
    if (grid.seeds == 0) {
        throw ConfigError("sweep.seeds", "must be at least 1");
    }
    validate(cfg.scenario);

    struct Point {
        std::optional<double> load;
        std::optional<double> alpha;
        std::optional<std::size_t> devices;
        ScenarioConfig scenario;
    };
    auto dims = [](const auto& values) {
        using T = typename std::decay_t<decltype(values)>::value_type;
        std::vector<std::optional<T>> out;
        for (const auto& v : values) {
            out.emplace_back(v);
        }
        if (out.empty()) {
            out.emplace_back(std::nullopt);
        }
        return out;
    };
    std::vector<Point> points;
    for (const auto& load : dims(grid.loads)) {
        for (const auto& alpha : dims(grid.alphas)) {
            for (const auto& count : dims(grid.device_counts)) {
                Point p{load, alpha, count, sweep_scenario(cfg.scenario, load, alpha, count)};
                p.scenario.interferer_log = InterfererLog::none;
                validate(p.scenario);
                points.push_back(std::move(p));
            }
        }
    }

    const std::size_t jobs = points.size() * grid.seeds;
    std::vector<std::string> rows(jobs);
    parallel_for(jobs, [&](std::size_t j) {
        const auto& p = points[j / grid.seeds];
        ScenarioConfig sc = p.scenario;
        sc.seed = cfg.scenario.seed + j % grid.seeds;
        const auto res = run_scenario(sc);
        const auto s = table_summary(res.trace, sc.channels);
        const double load = sc.interferer_load.empty() ? 0.0 : *std::ranges::max_element(sc.interferer_load);
        rows[j] = row({csv::number(load), csv::number(sc.devices.front().policy.alpha),
                       std::to_string(sc.devices.size()), std::to_string(sc.seed),
                       policy_label(sc.devices.front().policy), std::to_string(s.transmissions),
                       std::to_string(s.successes), csv::number(s.success_rate)});
    });

    make_out_dir(opts.out);
    const auto path = opts.out / "sweep.csv";
    auto os = open_output(path);
    os << "load,alpha,devices,seed,policy,transmissions,successes,success_rate\n";
    for (const auto& r : rows) {
        os << r;
    }
    close_output(os, path);
    out << "sweep: " << points.size() << " grid point(s) x " << grid.seeds << " seed(s) = " << jobs << " rows\n";
    write_manifest(opts.out, "sweep", cfg, cfg.scenario.seed, {"sweep.csv"}, started);
}

void cmd_report(const Options& opts, std::ostream& out)
{
    std::ifstream in(opts.trace, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + opts.trace.string());
    }
    const auto trace = csv::read_sim_trace(in);

    std::size_t channels = opts.channels.value_or(0);
    std::map<std::size_t, std::vector<TraceRecord>> by_device;
    for (const auto& r : trace) {
        channels = std::max(channels, r.channel + 1);
        by_device[r.device_id].push_back(r);
    }
    if (by_device.empty()) {
        by_device[0] = {};
    }
    for (const auto& [device, records] : by_device) {
        const auto s = table_summary(records, channels);
        out << "device " << device << ": " << s.transmissions << " transmissions\n" << format_table(s);
        std::vector<double> xk;
        for (const auto& c : s.channels) {
            xk.push_back(c.empirical_mean);
        }
        const double baseline = xk.empty() ? 0.0 : random_baseline_rate(xk);
        char line[200];
        std::snprintf(line, sizeof line, "success rate %.1f%% (%llu/%llu), uniform-access baseline %.1f%%",
                      100.0 * s.success_rate, static_cast<unsigned long long>(s.successes),
                      static_cast<unsigned long long>(s.transmissions), 100.0 * baseline);
        out << line;
        if (baseline > 0.0) {
            std::snprintf(line, sizeof line, ", ratio %.2fx", s.success_rate / baseline);
            out << line;
        }
        out << "\n\n";
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Decentralized bandit channel selection for ALOHA IoT devices", "iotbandit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    Options opts;

    auto add_common = [&opts](CLI::App* sub) {
        sub->add_option("--config", opts.config, "INI configuration file")->check(CLI::ExistingFile);
        sub->add_option("--preset", opts.preset, "scenario preset: malin4, malin8, malin16, iotligent3");
        sub->add_option("--seed", opts.seed, "master seed");
        sub->add_option("--seeds", opts.seeds, "number of consecutive seeds");
        sub->add_option("--policy", opts.policy, "policy list: ucb1[:ALPHA], thompson, greedy, uniform");
        sub->add_option("--horizon", opts.horizon, "transmissions per device / bench rounds");
        sub->add_option("--out", opts.out, "output directory")->capture_default_str();
    };
    auto* bench = app.add_subcommand("bench", "policies against i.i.d. Bernoulli channels");
    add_common(bench);
    auto* sim = app.add_subcommand("sim", "pure-ALOHA radio simulation");
    add_common(sim);
    auto* sweep = app.add_subcommand("sweep", "simulation over a parameter grid");
    add_common(sweep);
    sweep->add_option("--loads", opts.loads, "maximum channel loads, comma separated");
    sweep->add_option("--alphas", opts.alphas, "UCB1 alpha values, comma separated");
    sweep->add_option("--devices", opts.devices, "device counts, comma separated");
    auto* report = app.add_subcommand("report", "per-channel Tk/Sk/Xk table from a sim_trace.csv");
    report->add_option("trace", opts.trace, "sim_trace.csv path")->required();
    report->add_option("--channels", opts.channels, "channel count (default: inferred from the trace)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (bench->parsed()) {
            cmd_bench(opts, out);
        } else if (sim->parsed()) {
            cmd_sim(opts, out);
        } else if (sweep->parsed()) {
            cmd_sweep(opts, out);
        } else if (report->parsed()) {
            cmd_report(opts, out);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return kConfigError;
    } catch (const csv::ParseError& e) {
        err << "parse error: " << opts.trace.string() << ": " << e.what() << '\n';
        return kIoError;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIoError;
    }
    return kSuccess;
}

} // namespace iotbandit::cli
