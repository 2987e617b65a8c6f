#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "iotbandit/bench.hpp"
#include "iotbandit/environment.hpp"

namespace iotbandit {
namespace {

TEST(BernoulliEnv, DegenerateArms)
{
    std::mt19937_64 gen(1);
    const BernoulliEnv env({0.0, 1.0});
    for (int i = 0; i < 10000; ++i) {
        EXPECT_FALSE(env.draw(0, gen));
        EXPECT_TRUE(env.draw(1, gen));
    }
}

TEST(BernoulliEnv, FrequencyMatchesMean)
{
    std::mt19937_64 gen(2);
    const BernoulliEnv env(kFieldMeans);
    int hits = 0;
    constexpr int n = 100000;
    for (int i = 0; i < n; ++i) {
        hits += env.draw(1, gen);
    }
    // binomial sd = sqrt(0.115 * 0.885 / 1e5) ~ 0.001
    EXPECT_NEAR(hits / static_cast<double>(n), 0.115, 0.005);
}

TEST(BernoulliEnv, RejectsBadInput)
{
    EXPECT_THROW(BernoulliEnv({0.5}), std::invalid_argument);
    EXPECT_THROW(BernoulliEnv({0.5, 1.5}), std::invalid_argument);
    EXPECT_THROW(BernoulliEnv({-0.1, 0.5}), std::invalid_argument);
    std::mt19937_64 gen(1);
    const BernoulliEnv env({0.5, 0.5});
    EXPECT_THROW((void)env.draw(2, gen), std::out_of_range);
}

TEST(BernoulliEnvProperty, NoLagOneAutocorrelation)
{
    std::mt19937_64 gen(3);
    const BernoulliEnv env({0.3, 0.7});
    constexpr int n = 100000;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
        x[i] = env.draw(static_cast<std::size_t>(i % 2), gen) ? 1.0 : 0.0;
    }
    // alternate arms, so centre each draw on its own arm's sample mean
    double m[2] = {0.0, 0.0};
    for (int i = 0; i < n; ++i) {
        m[i % 2] += x[i];
    }
    m[0] /= n / 2;
    m[1] /= n / 2;
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i < n; ++i) {
        const double c = x[i] - m[i % 2];
        den += c * c;
        if (i + 1 < n) {
            num += c * (x[i + 1] - m[(i + 1) % 2]);
        }
    }
    EXPECT_NEAR(num / den, 0.0, 0.01);
}

TEST(BernoulliEnvProperty, SameSeedSameRewards)
{
    const BernoulliEnv env(kFieldMeans);
    const auto a = run_bench({PolicyKind::thompson, 0.5}, env, 2000, 77);
    const auto b = run_bench({PolicyKind::thompson, 0.5}, env, 2000, 77);
    const auto c = run_bench({PolicyKind::thompson, 0.5}, env, 2000, 78);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

} // namespace
} // namespace iotbandit
