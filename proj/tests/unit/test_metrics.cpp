#include <gtest/gtest.h>

#include <cstdio>
#include <vector>

#include "iotbandit/bench.hpp"
#include "iotbandit/metrics.hpp"
#include "iotbandit/presets.hpp"

namespace iotbandit {
namespace {

// A trace with the field experiment's final counts: Tk = (29, 61, 39),
// Sk = (0, 7, 2).
std::vector<BenchRecord> field_counts_trace()
{
    const std::uint64_t pulls[] = {29, 61, 39};
    const std::uint64_t wins[] = {0, 7, 2};
    std::vector<BenchRecord> trace;
    std::uint64_t t = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        for (std::uint64_t i = 0; i < pulls[k]; ++i) {
            trace.push_back({++t, k, i < wins[k]});
        }
    }
    return trace;
}

std::string three_decimals(double x)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

TEST(Metrics, CumulativeReward)
{
    std::vector<BenchRecord> ones(10, BenchRecord{0, 0, true});
    EXPECT_EQ(cumulative_reward(ones), 10U);
    ones[3].reward = false;
    EXPECT_EQ(cumulative_reward(ones), 9U);
    EXPECT_EQ(cumulative_reward(std::vector<BenchRecord>{}), 0U);
}

TEST(Metrics, FieldTableArithmetic)
{
    const auto trace = field_counts_trace();
    const auto s = table_summary(trace, 3, kFieldMeans);
    EXPECT_EQ(s.transmissions, 129U);
    EXPECT_EQ(s.successes, 9U);
    EXPECT_EQ(three_decimals(s.channels[0].empirical_mean), "0.000");
    EXPECT_EQ(three_decimals(s.channels[1].empirical_mean), "0.115");
    EXPECT_EQ(three_decimals(s.channels[2].empirical_mean), "0.051");
    EXPECT_NEAR(s.channels[1].empirical_mean, 0.1147540984, 1e-10);
    EXPECT_NEAR(s.channels[2].empirical_mean, 0.0512820513, 1e-10);
    ASSERT_TRUE(s.regret.has_value());
    EXPECT_NEAR(*s.regret, 5.835, 1e-9);
    EXPECT_NEAR(regret(trace, kFieldMeans), 5.835, 1e-9);
    EXPECT_NEAR(random_baseline_rate(kFieldMeans), 0.0553333333, 1e-9);
    EXPECT_NEAR(random_baseline_rate(kFieldMeans) * 100.0, 5.5, 0.05);

    const std::vector<std::string> labels = {"868100000", "868300000", "868500000"};
    const auto text = format_table(s, labels);
    EXPECT_NE(text.find("868300000"), std::string::npos);
    EXPECT_NE(text.find("0.115"), std::string::npos);
    EXPECT_NE(text.find("129"), std::string::npos);
}

TEST(Metrics, RegretIdentities)
{
    const std::vector<double> mu = {0.2, 0.7};
    std::vector<BenchRecord> trace;
    for (std::uint64_t t = 1; t <= 50; ++t) {
        trace.push_back({t, 1, t % 3 == 0});
    }
    const auto curve = regret_curve(trace, mu);
    ASSERT_EQ(curve.size(), 50U);
    EXPECT_DOUBLE_EQ(curve.back(), regret(trace, mu));
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const double expected = static_cast<double>(i + 1) * 0.7 - static_cast<double>((i + 1) / 3);
        EXPECT_NEAR(curve[i], expected, 1e-12);
    }
    EXPECT_DOUBLE_EQ(regret(std::vector<BenchRecord>{}, mu), 0.0);
    EXPECT_THROW(regret(trace, std::span<const double>{}), std::invalid_argument);
}

TEST(Metrics, SummaryRejectsImpossibleCounts)
{
    const std::vector<std::uint64_t> pulls = {3, 1};
    const std::vector<std::uint64_t> wins = {4, 0};
    EXPECT_THROW(summary_from_counts(pulls, wins), std::invalid_argument);
    const std::vector<BenchRecord> bad = {{1, 5, true}};
    EXPECT_THROW(table_summary(bad, 3), std::out_of_range);
}

TEST(Metrics, UnusedChannelReportsZeroMean)
{
    const std::vector<BenchRecord> trace = {{1, 0, true}, {2, 0, false}};
    const auto s = table_summary(trace, 3);
    EXPECT_EQ(s.channels[2].pulls, 0U);
    EXPECT_EQ(s.channels[2].empirical_mean, 0.0);
    EXPECT_FALSE(s.regret.has_value());
    EXPECT_DOUBLE_EQ(s.success_rate, 0.5);
}

TEST(Metrics, AggregatePopulationStd)
{
    const std::vector<std::vector<double>> runs = {{8.0, 1.0}, {10.0, 1.0}};
    const auto env = aggregate(runs);
    EXPECT_DOUBLE_EQ(env.mean[0], 9.0);
    EXPECT_DOUBLE_EQ(env.std[0], 1.0);
    EXPECT_DOUBLE_EQ(env.std[1], 0.0);
    const std::vector<std::vector<double>> ragged = {{1.0}, {1.0, 2.0}};
    EXPECT_THROW(aggregate(ragged), std::invalid_argument);
    EXPECT_THROW(aggregate(std::span<const std::vector<double>>{}), std::invalid_argument);
}

TEST(Metrics, AggregateSummaries)
{
    const std::vector<std::uint64_t> p1 = {10, 0};
    const std::vector<std::uint64_t> s1 = {8, 0};
    const std::vector<std::uint64_t> p2 = {0, 10};
    const std::vector<std::uint64_t> s2 = {0, 10};
    const std::vector<double> mu = {0.5, 1.0};
    const std::vector<RunSummary> runs = {summary_from_counts(p1, s1, mu), summary_from_counts(p2, s2, mu)};
    const auto agg = aggregate(runs);
    EXPECT_EQ(agg.runs, 2U);
    EXPECT_DOUBLE_EQ(agg.cumulative_reward.mean, 9.0);
    EXPECT_DOUBLE_EQ(agg.cumulative_reward.std, 1.0);
    ASSERT_TRUE(agg.regret.has_value());
    EXPECT_DOUBLE_EQ(agg.regret->mean, 1.0);
    EXPECT_DOUBLE_EQ(agg.pulls[0].mean, 5.0);
}

TEST(Metrics, ChannelFractionWindow)
{
    std::vector<BenchRecord> trace;
    for (std::uint64_t t = 1; t <= 10; ++t) {
        trace.push_back({t, t > 6 ? 1U : 0U, false});
    }
    EXPECT_DOUBLE_EQ(channel_fraction(trace, 1, 0), 0.4);
    EXPECT_DOUBLE_EQ(channel_fraction(trace, 1, 6), 1.0);
    EXPECT_DOUBLE_EQ(channel_fraction(trace, 1, 10), 0.0);
}

TEST(MetricsProperty, TrajectoryPullsAreMonotone)
{
    const BernoulliEnv env(kFieldMeans);
    const auto trace = run_bench(PolicySpec{PolicyKind::ucb1, 0.5}, env, 1000, 11);
    const auto traj = trajectory(trace, 3, 7);
    ASSERT_FALSE(traj.points.empty());
    EXPECT_EQ(traj.points.back().t, 1000U);
    for (std::size_t i = 1; i < traj.points.size(); ++i) {
        std::uint64_t total = 0;
        for (std::size_t k = 0; k < 3; ++k) {
            EXPECT_GE(traj.points[i].pulls[k], traj.points[i - 1].pulls[k]);
            total += traj.points[i].pulls[k];
        }
        EXPECT_EQ(total, traj.points[i].t);
    }
    const auto end = table_summary(trace, 3);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(traj.points.back().pulls[k], end.channels[k].pulls);
        EXPECT_DOUBLE_EQ(traj.points.back().means[k], end.channels[k].empirical_mean);
    }
    EXPECT_THROW(trajectory(trace, 3, 0), std::invalid_argument);
}

TEST(MetricsProperty, LearnerBeatsBaselineOnFieldMeans)
{
    const BernoulliEnv env(kFieldMeans);
    const auto runs = run_bench_seeds(PolicySpec{PolicyKind::ucb1, 0.5}, env, 2000, 1, 200);
    std::vector<RunSummary> summaries;
    for (const auto& r : runs) {
        summaries.push_back(table_summary(r, 3, kFieldMeans));
    }
    const auto agg = aggregate(summaries);
    EXPECT_GT(agg.success_rate.mean, random_baseline_rate(kFieldMeans));
    EXPECT_LT(agg.success_rate.mean, 0.115);
}

} // namespace
} // namespace iotbandit
