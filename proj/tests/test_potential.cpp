#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "hillspec/potential.hpp"

using hill::cplx;
using hill::Potential;

TEST(Potential, ZeroEvaluatesToZero)
{
    EXPECT_EQ(Potential::zero()(0.37), cplx(0.0));
    EXPECT_EQ(Potential::zero().mean(), cplx(0.0));
}

TEST(Potential, SingleExponentialAtHalfPi)
{
    const auto p = Potential::from_fourier({{1, {1.0, 0.0}}});
    EXPECT_NEAR(std::abs(p(std::numbers::pi / 2) - cplx(-1.0)), 0.0, 1e-14);
}

TEST(Potential, MathieuAtOrigin)
{
    EXPECT_NEAR(std::abs(Potential::mathieu(1.0)(0.0) - cplx(2.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(Potential::complex_mathieu(0.5)(0.0) - cplx(0.0, 1.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(Potential::gasymov()(0.3) - std::polar(1.0, 0.6)), 0.0, 1e-14);
}

TEST(Potential, FromFourierMeans)
{
    EXPECT_EQ(Potential::from_fourier({}).mean(), cplx(0.0));
    const auto c = Potential::from_fourier({{0, {3.0, 1.0}}});
    EXPECT_EQ(c.mean(), cplx(3.0, 1.0));
    EXPECT_EQ(c(1.234), cplx(3.0, 1.0));
    const auto m = Potential::from_fourier({{1, {1.0, 0.0}}, {-1, {1.0, 0.0}}});
    EXPECT_EQ(m.mean(), cplx(0.0));
    EXPECT_NEAR(std::abs(m(0.4) - 2.0 * std::cos(0.8)), 0.0, 1e-14);
}

TEST(Potential, DuplicateIndexRejected)
{
    try {
        Potential::from_fourier({{2, {1.0, 0.0}}, {2, {0.5, 0.0}}});
        FAIL() << "expected rejection";
    } catch (const hill::InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find('2'), std::string::npos);
    }
}

TEST(Potential, SampleCountValidated)
{
    EXPECT_THROW(Potential::from_samples(std::vector<cplx>(7)), hill::InvalidInput);
    EXPECT_THROW(Potential::from_samples(std::vector<cplx>(2)), hill::InvalidInput);
}

TEST(Potential, SamplesOfCosineInterpolate)
{
    std::vector<cplx> s(8);
    for (int j = 0; j < 8; ++j)
        s[j] = 2.0 * std::cos(2.0 * j * std::numbers::pi / 8);
    const auto p = Potential::from_samples(s);
    EXPECT_NEAR(std::abs(p(std::numbers::pi / 4)), 0.0, 1e-12);
    for (int j = 0; j < 8; ++j)
        EXPECT_NEAR(std::abs(p(j * std::numbers::pi / 8) - s[j]), 0.0, 1e-12);
}

TEST(Potential, ZeroSamples)
{
    const auto p = Potential::from_samples(std::vector<cplx>(8));
    EXPECT_EQ(p.mean(), cplx(0.0));
    EXPECT_EQ(p(0.77), cplx(0.0));
}

TEST(Potential, CoefficientRecoveryMatchesDiscreteTransform)
{
    std::vector<cplx> s(16);
    for (int j = 0; j < 16; ++j)
        s[j] = std::polar(1.0, 2.0 * j * std::numbers::pi / 16);
    const auto p = Potential::from_samples(s);
    // direct transform oracle: c_n = (1/N) sum_j s_j exp(-2 i n x_j)
    for (int n = -7; n <= 7; ++n) {
        cplx c{};
        for (int j = 0; j < 16; ++j)
            c += s[j] * std::polar(1.0, -2.0 * n * j * std::numbers::pi / 16);
        c /= 16.0;
        EXPECT_NEAR(std::abs(p.coefficient(n) - c), 0.0, 1e-12) << n;
    }
    EXPECT_NEAR(std::abs(p.coefficient(1) - cplx(1.0)), 0.0, 1e-12);
}

TEST(Potential, PeriodicityOnRandomPoints)
{
    const auto p = Potential::from_fourier({{1, {0.3, -0.2}}, {-3, {1.1, 0.4}}, {0, {0.5, 0.0}}});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int i = 0; i < 100; ++i) {
        const double x = u(rng);
        EXPECT_NEAR(std::abs(p(x) - p(x + std::numbers::pi)), 0.0, 1e-12);
    }
}

TEST(Potential, BandLimitedResamplingReproduces)
{
    const auto f = Potential::from_fourier({{2, {0.7, 0.1}}, {-1, {0.2, -0.5}}, {0, {1.0, 1.0}}});
    std::vector<cplx> s(16);
    for (int j = 0; j < 16; ++j)
        s[j] = f(j * std::numbers::pi / 16);
    const auto g = Potential::from_samples(s);
    for (int i = 0; i < 50; ++i) {
        const double x = 0.0731 * i;
        EXPECT_NEAR(std::abs(f(x) - g(x)), 0.0, 1e-12);
    }
}

TEST(Potential, MeanMatchesTrapezoid)
{
    const auto p = Potential::from_fourier({{1, {0.3, -0.2}}, {-2, {1.1, 0.4}}, {0, {0.5, 0.25}}});
    const int n = 200;
    cplx acc{};
    for (int j = 0; j < n; ++j)
        acc += p(j * std::numbers::pi / n);
    EXPECT_NEAR(std::abs(acc / static_cast<double>(n) - p.mean()), 0.0, 1e-10);
}

TEST(Potential, RealityAndBounds)
{
    EXPECT_TRUE(Potential::mathieu(1.0).is_real());
    EXPECT_FALSE(Potential::gasymov().is_real());
    const auto b = Potential::mathieu(1.0).bounds();
    EXPECT_LE(b.re_min, -2.0);
    EXPECT_GE(b.re_max, 2.0);
    EXPECT_LT(b.re_max, 2.1);
}
