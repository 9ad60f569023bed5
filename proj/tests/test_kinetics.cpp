#include "macromc/error.hpp"
#include "macromc/kinetics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace macromc;

namespace {

// Independent oracle: the two-exponential form evaluated literally.
double literal_bound(double C0, double k1, double k2, double t)
{
    return k1 * C0 / (k2 - k1) * (std::exp(-k1 * t) - std::exp(-k2 * t));
}

} // namespace

TEST(Kinetics, BoundConcentrationIsZeroAtStart)
{
    EXPECT_EQ(kinetics::bound_concentration(3.0, {2.0, 0.5}, 0.0), 0.0);
    EXPECT_EQ(kinetics::bound_concentration(3.0, {1.0, 1.0}, 0.0), 0.0);
}

TEST(Kinetics, PeakValueMatchesClosedForm)
{
    const double t_star = std::log(4.0) / 1.5;
    // B(t*) = e^{-k2 t*} for C0 = 1, k1 = 2, k2 = 0.5 (mpmath: 0.629960524947436582)
    EXPECT_NEAR(kinetics::bound_concentration(1.0, {2.0, 0.5}, t_star), 0.629960524947436582, 1e-14);
}

TEST(Kinetics, ConfluentLimit)
{
    EXPECT_NEAR(kinetics::bound_concentration(1.0, {1.0, 1.0}, 1.0), std::exp(-1.0), 1e-15);
    // RK4 oracle with k2 nudged off confluence
    const auto traj = kinetics::solve_kinetics_numeric(1.0, {1.0, 1.0 + 1e-9}, 1.0, 1e-4);
    EXPECT_NEAR(traj.back().B, std::exp(-1.0), 1e-9);
}

TEST(Kinetics, MatchesLiteralFormAwayFromConfluence)
{
    for (double t : {0.1, 0.5, 1.0, 3.0, 10.0}) {
        EXPECT_NEAR(kinetics::bound_concentration(1.3, {2.0, 0.5}, t), literal_bound(1.3, 2.0, 0.5, t), 1e-15);
        EXPECT_NEAR(kinetics::bound_concentration(1.3, {0.3, 7.0}, t), literal_bound(1.3, 0.3, 7.0, t), 1e-15);
    }
}

TEST(Kinetics, FreeConcentration)
{
    EXPECT_EQ(kinetics::free_concentration(1.7, {2.0, 0.5}, 0.0), 1.7);
    EXPECT_NEAR(kinetics::free_concentration(1.0, {2.0, 0.5}, std::log(2.0) / 2.0), 0.5, 1e-15);
    // mpmath: 1.3602e-3 * e^-2 = 1.84083052258440583e-4
    EXPECT_NEAR(kinetics::free_concentration(1.3602e-3, {2.0, 0.5}, 1.0), 1.84083052258440583e-4, 1e-18);
}

TEST(Kinetics, PeakTime)
{
    EXPECT_NEAR(kinetics::peak_time({2.0, 0.5}), 0.924196240746593746, 1e-15);
    EXPECT_DOUBLE_EQ(kinetics::peak_time({1.0, 1.0}), 1.0);
    EXPECT_EQ(kinetics::peak_time({2.0, 0.5}), kinetics::peak_time({0.5, 2.0}));
    EXPECT_NEAR(kinetics::peak_time({1.0, 1.0 + 1e-12}), 1.0, 1e-11);
}

TEST(Kinetics, PeakTimeSeparatesRiseAndDecay)
{
    const KineticsParams kin{3.0, 0.4};
    const double ts = kinetics::peak_time(kin);
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
        const double B = kinetics::bound_concentration(1.0, kin, ts * i / 100.0);
        EXPECT_GT(B, prev);
        prev = B;
    }
    for (int i = 1; i <= 100; ++i) {
        const double B = kinetics::bound_concentration(1.0, kin, ts + i * 0.05);
        EXPECT_LT(B, prev);
        prev = B;
    }
}

TEST(Kinetics, SwapScaleIdentity)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> rate(0.05, 20.0);
    std::uniform_real_distribution<double> time(0.0, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double k1 = rate(rng);
        const double k2 = rate(rng);
        const double t = time(rng);
        const double lhs = kinetics::bound_concentration(2.0, {k1, k2}, t);
        const double rhs = kinetics::bound_concentration(2.0 * k1 / k2, {k2, k1}, t);
        EXPECT_NEAR(lhs, rhs, 1e-13 * std::max(lhs, 1e-300)) << k1 << ' ' << k2 << ' ' << t;
    }
}

TEST(Kinetics, NonNegativeNearConfluence)
{
    for (double k : {0.05, 0.7, 5.0, 20.0}) {
        for (double eps : {0.0, 1e-16, 1e-12, 1e-10, 1e-9, -1e-12, -1e-9}) {
            for (double t : {1e-8, 0.01, 1.0, 50.0, 1e3}) {
                EXPECT_GE(kinetics::bound_concentration(1.0, {k, k * (1.0 + eps)}, t), 0.0);
            }
        }
    }
}

TEST(Kinetics, ContinuousAtConfluence)
{
    for (double k : {0.1, 1.0, 10.0}) {
        for (int i = 1; i <= 50; ++i) {
            const double t = 10.0 / k * i / 50.0;
            const double conf = kinetics::bound_concentration(1.0, {k, k}, t);
            const double near = kinetics::bound_concentration(1.0, {k, k + 1e-6}, t);
            // d B / d k2 is bounded by (t + 1 / k) B near the diagonal
            EXPECT_NEAR(near, conf, 1e-6 * (t + 1.0 / k) * conf);
        }
    }
}

TEST(Kinetics, NoOverflowForWideRateGap)
{
    const double B = kinetics::bound_concentration(1.0, {50.0, 0.05}, 40.0);
    EXPECT_TRUE(std::isfinite(B));
    EXPECT_NEAR(B, literal_bound(1.0, 50.0, 0.05, 40.0), 1e-15);
}

TEST(Kinetics, DomainErrors)
{
    EXPECT_THROW(kinetics::bound_concentration(1.0, {2.0, 0.5}, -1.0), DomainError);
    EXPECT_THROW(kinetics::bound_concentration(-1.0, {2.0, 0.5}, 1.0), DomainError);
    EXPECT_THROW(kinetics::bound_concentration(1.0, {0.0, 0.5}, 1.0), ValidationError);
    EXPECT_THROW(kinetics::free_concentration(1.0, {2.0, -1.0}, 1.0), ValidationError);
    EXPECT_THROW(kinetics::solve_kinetics_numeric(1.0, {2.0, 0.5}, 1.0, 0.0), DomainError);
    EXPECT_THROW(kinetics::solve_kinetics_numeric(1.0, {2.0, 0.5}, 1.0, -0.1), DomainError);
    EXPECT_THROW(kinetics::solve_kinetics_numeric(1.0, {2.0, 0.5}, 0.1, 1.0), DomainError);
}

TEST(KineticsNumeric, ZeroInitialConcentrationStaysZero)
{
    for (const auto& s : kinetics::solve_kinetics_numeric(0.0, {2.0, 0.5}, 1.0, 0.01)) {
        EXPECT_EQ(s.C, 0.0);
        EXPECT_EQ(s.B, 0.0);
        EXPECT_EQ(s.Z, 0.0);
    }
}

TEST(KineticsNumeric, MatchesAnalyticAndConservesMass)
{
    const KineticsParams kin{2.0, 0.5};
    double max_err = 0.0;
    double last_mass_err = 0.0;
    std::size_t count = 0;
    kinetics::integrate_kinetics(1.0, kin, 10.0, 1e-4, [&](const KineticsState& s) {
        max_err = std::max(max_err, std::abs(s.B - kinetics::bound_concentration(1.0, kin, s.t)));
        last_mass_err = std::abs(s.C + s.B + s.Z - 1.0);
        ++count;
    });
    EXPECT_EQ(count, 100001u);
    EXPECT_LT(max_err, 1e-8);
    EXPECT_LT(last_mass_err, 1e-8);
}

TEST(KineticsNumeric, StrideKeepsFinalState)
{
    const auto traj = kinetics::solve_kinetics_numeric(1.0, {2.0, 0.5}, 1.0, 0.03, 10);
    EXPECT_DOUBLE_EQ(traj.front().t, 0.0);
    EXPECT_DOUBLE_EQ(traj.back().t, 1.0);
    for (std::size_t i = 1; i < traj.size(); ++i) {
        EXPECT_GT(traj[i].t, traj[i - 1].t);
    }
}
