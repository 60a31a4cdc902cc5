#include <gtest/gtest.h>

#include "hillspec/spectra.hpp"
#include "oracles/hill_method.hpp"

using hill::cplx;
using hill::Potential;
using hill::Rect;

TEST(CountZeros, FreePeriodicSimpleAtZero)
{
    const auto f = hill::discriminant_fn(Potential::zero(), 1.0);
    EXPECT_EQ(hill::count_zeros(f, {-0.5, 0.5, -0.5, 0.5}).count, 1);
}

TEST(CountZeros, FreePeriodicDoubleAtFour)
{
    const auto f = hill::discriminant_fn(Potential::zero(), 1.0);
    EXPECT_EQ(hill::count_zeros(f, {3.0, 5.0, -1.0, 1.0}).count, 2);
}

TEST(CountZeros, FreeDirichletFourZeros)
{
    const auto f = hill::dirichlet_fn(Potential::zero());
    EXPECT_EQ(hill::count_zeros(f, {0.5, 20.0, -1.0, 1.0}).count, 4);
}

TEST(CountZeros, DilatesAwayFromContourZero)
{
    // the right edge passes through the simple zero at 1 of phi(., pi)
    const auto f = hill::dirichlet_fn(Potential::zero());
    const auto w = hill::count_zeros(f, {-1.0, 1.0, -0.5, 0.5});
    EXPECT_GT(w.rect.re_hi, 1.0);
    EXPECT_EQ(w.count, 1);
}

TEST(CountZeros, DegenerateRectangleRejected)
{
    const auto f = hill::dirichlet_fn(Potential::zero());
    EXPECT_THROW(hill::count_zeros(f, {1.0, 1.0, -1.0, 1.0}), hill::InvalidInput);
}

TEST(RefineRoot, CriticalPointFree)
{
    const auto r = hill::refine_root(hill::critical_fn(Potential::zero()), 0.9);
    EXPECT_NEAR(std::abs(r.location - cplx(1.0)), 0.0, 1e-9);
    EXPECT_EQ(r.multiplicity, 1);
}

TEST(RefineRoot, DoublePeriodicFree)
{
    const auto r = hill::refine_root(hill::discriminant_fn(Potential::zero(), 1.0), 4.2);
    EXPECT_NEAR(std::abs(r.location - cplx(4.0)), 0.0, 1e-8);
    EXPECT_EQ(r.multiplicity, 2);
    EXPECT_LE(r.residual, 1e-8 * 5.0);
}

TEST(RefineRoot, MathieuDirichletMatchesSineBasis)
{
    const auto p = Potential::mathieu(1.0);
    const auto r = hill::refine_root(hill::dirichlet_fn(p), 1.1);
    const auto mu = oracle::dirichlet_eigenvalues(p, 64);
    EXPECT_NEAR(std::abs(r.location - mu[0]), 0.0, 1e-6);
    EXPECT_EQ(r.multiplicity, 1);
}

TEST(RefineRoot, DivergenceReported)
{
    // exp(z) - has no zeros; Newton wanders off
    hill::AnalyticFn f{[](cplx z, int) {
                           hill::Jet j;
                           j.order = 3;
                           j.d = {std::exp(z), std::exp(z), std::exp(z), std::exp(z)};
                           return j;
                       },
                       3, "exp"};
    EXPECT_THROW(hill::refine_root(f, 0.0), hill::RootError);
}

TEST(FindRoots, PolynomialWithCluster)
{
    // (z-1)(z-1-1e-8)(z-3i): the close pair merges into one double root
    const cplx a = 1.0, b = 1.0 + 1e-8, c(0.0, 3.0);
    hill::AnalyticFn f{[=](cplx z, int) {
                           hill::Jet j;
                           j.order = 3;
                           const cplx u = z - a, v = z - b, w = z - c;
                           j.d = {u * v * w, u * v + v * w + u * w, 2.0 * (u + v + w), 6.0};
                           return j;
                       },
                       3, "poly"};
    const auto roots = hill::find_roots(f, {-2.0, 4.0, -1.0, 4.0});
    ASSERT_EQ(roots.size(), 2u);
    int total = 0;
    for (const auto& r : roots)
        total += r.multiplicity;
    EXPECT_EQ(total, 3);
    EXPECT_NEAR(std::abs(roots[0].location - cplx(0.0, 3.0)) * std::abs(roots[1].location - cplx(1.0)), 0.0, 1e-6);
}
