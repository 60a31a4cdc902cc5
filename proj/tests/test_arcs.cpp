#include <gtest/gtest.h>

#include <map>
#include <numbers>
#include <sstream>

#include "hillspec/arcs.hpp"
#include "oracles/hill_method.hpp"
#include "oracles/rk4.hpp"

using hill::cplx;
using hill::Potential;
using hill::Root;

namespace {

constexpr double pi = std::numbers::pi;

struct Built {
    hill::SpectrumCatalog cat;
    hill::ArcDiagram dg;
};

const Built& diagram(const std::string& name)
{
    static std::map<std::string, Built> cache;
    auto it = cache.find(name);
    if (it != cache.end())
        return it->second;
    Potential p = name == "zero"      ? Potential::zero()
                  : name == "mathieu" ? Potential::mathieu(1.0)
                  : name == "gasymov" ? Potential::gasymov()
                                      : Potential::complex_mathieu(0.5);
    hill::CatalogOptions co;
    co.bound = 45.0;
    Built b{hill::build_catalog(p, 4, co), {}};
    b.dg = hill::build_diagram(p, b.cat, 30.0);
    return cache.emplace(name, std::move(b)).first->second;
}

double rk4_residual(const Potential& p, const hill::ArcSample& s)
{
    const auto m = oracle::rk4_monodromy(p, s.lambda, 6000);
    return std::abs(0.5 * (m.theta + m.phi_prime) - std::cos(s.t));
}

}  // namespace

TEST(TraceArc, FreeGroundBand)
{
    const auto arcs = hill::trace_arc(Potential::zero(), Root{.location = 0.0, .multiplicity = 1});
    ASSERT_EQ(arcs.size(), 1u);
    const auto& a = arcs[0];
    ASSERT_EQ(a.samples.size(), 65u);
    for (const auto& s : a.samples) {
        EXPECT_NEAR(s.lambda.real(), (s.t / pi) * (s.t / pi), 1e-8) << s.t;
        EXPECT_NEAR(s.lambda.imag(), 0.0, 1e-8);
    }
    EXPECT_DOUBLE_EQ(a.samples.back().t, pi);
}

TEST(TraceArc, FreeDoubleRootBothBranches)
{
    const auto arcs = hill::trace_arc(Potential::zero(), Root{.location = 4.0, .multiplicity = 2});
    ASSERT_EQ(arcs.size(), 2u);
    std::vector<double> ends;
    for (const auto& a : arcs) {
        const double sgn = a.samples.back().lambda.real() > 4.0 ? 1.0 : -1.0;
        ends.push_back(a.samples.back().lambda.real());
        for (const auto& s : a.samples) {
            const double want = (2.0 + sgn * s.t / pi) * (2.0 + sgn * s.t / pi);
            EXPECT_NEAR(s.lambda.real(), want, 1e-8) << s.t;
            EXPECT_NEAR(s.lambda.imag(), 0.0, 1e-8);
        }
        EXPECT_TRUE(a.is_singular(0));
    }
    std::sort(ends.begin(), ends.end());
    EXPECT_NEAR(ends[0], 1.0, 1e-8);
    EXPECT_NEAR(ends[1], 9.0, 1e-8);
}

TEST(TraceArc, MathieuGroundEndpointMatchesOracle)
{
    const auto p = Potential::mathieu(1.0);
    const auto per = oracle::periodic_eigenvalues(p, 64);
    const auto anti = oracle::antiperiodic_eigenvalues(p, 64);
    const Root start{.location = per[0], .multiplicity = 1};
    const auto arcs = hill::trace_arc(p, start);
    ASSERT_EQ(arcs.size(), 1u);
    const cplx end = arcs[0].samples.back().lambda;
    EXPECT_NEAR(end.real(), anti[0].real(), 1e-6);
    EXPECT_NEAR(end.imag(), 0.0, 1e-8);
}

TEST(TraceArc, RejectsBadInput)
{
    EXPECT_THROW(hill::trace_arc(Potential::zero(), Root{.location = 2.0, .multiplicity = 1}),
                 hill::InvalidInput);
    hill::ArcOptions o;
    o.steps = 8;
    EXPECT_THROW(hill::trace_arc(Potential::zero(), Root{.location = 0.0, .multiplicity = 1}, o),
                 hill::InvalidInput);
}

TEST(TraceArc, BranchAmbiguityIsSurfaced)
{
    // V = i cos 2x: the ground arc runs into a critical point on the real axis
    const auto p = Potential::complex_mathieu(0.5);
    const auto& b = diagram("complex_mathieu");
    const Root start = b.cat.periodic.front();
    try {
        hill::trace_arc(p, start);
        FAIL() << "expected a branch ambiguity";
    } catch (const hill::BranchAmbiguity& e) {
        const auto& j = e.junction();
        EXPECT_TRUE(j.interior);
        EXPECT_GT(j.t_star, 0.0);
        EXPECT_LT(j.t_star, pi);
        const auto s = hill::integrate_fundamental(p, j.delta, 1e-12);
        EXPECT_LT(std::abs(s.delta_plus_dot), 1e-8);
        EXPECT_NEAR(std::abs(s.delta_plus - std::cos(j.t_star)), 0.0, 1e-8);
        EXPECT_NE(e.candidates()[0], e.candidates()[1]);
        EXPECT_EQ(e.partial().samples.back().lambda, j.delta);
    }
}

TEST(Diagram, FreeCoversHalfLineWithoutIntersections)
{
    const auto& dg = diagram("zero").dg;
    EXPECT_TRUE(dg.intersections.empty());
    // every point of [0, 30] is on some arc
    for (double x = 0.0; x <= 30.0; x += 0.37)
        EXPECT_LT(hill::distance_to_spectrum(dg, x), 1e-8) << x;
    for (const auto& a : dg.arcs)
        for (const auto& s : a.samples)
            EXPECT_NEAR(s.lambda.imag(), 0.0, 1e-8);
}

TEST(Diagram, DefiningEquationAgainstRk4)
{
    for (const std::string name : {"mathieu", "complex_mathieu", "gasymov"}) {
        const auto& dg = diagram(name).dg;
        for (const auto& a : dg.arcs)
            for (std::size_t i = 0; i < a.samples.size(); i += 4) {
                const auto& s = a.samples[i];
                EXPECT_LE(rk4_residual(dg.potential, s), 1e-8 * (1.0 + std::abs(s.lambda)))
                    << name << " band " << a.band_index << " t=" << s.t;
            }
    }
}

TEST(Diagram, MathieuBandsAndGapsMatchOracle)
{
    const auto& b = diagram("mathieu");
    const auto per = oracle::periodic_eigenvalues(Potential::mathieu(1.0), 64);
    const auto anti = oracle::antiperiodic_eigenvalues(Potential::mathieu(1.0), 64);
    // Band edges lambda_0^+ < lambda_1^- <= lambda_1^+ < lambda_2^- <= ...
    std::vector<double> edges{per[0].real(), anti[0].real(), anti[1].real(), per[1].real(),
                              per[2].real(), anti[2].real(), anti[3].real(), per[3].real(),
                              per[4].real()};
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
        EXPECT_LE(edges[k], edges[k + 1]);

    // arc k spans [edges[2k], edges[2k+1]]
    std::vector<std::pair<double, double>> spans;
    for (const auto& a : b.dg.arcs) {
        double lo = 1e300, hi = -1e300;
        for (const auto& s : a.samples) {
            EXPECT_NEAR(s.lambda.imag(), 0.0, 1e-8);
            lo = std::min(lo, s.lambda.real());
            hi = std::max(hi, s.lambda.real());
        }
        spans.push_back({lo, hi});
    }
    std::sort(spans.begin(), spans.end());
    ASSERT_GE(spans.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(spans[k].first, edges[2 * k], 1e-6) << k;
        EXPECT_NEAR(spans[k].second, edges[2 * k + 1], 1e-6) << k;
    }
    EXPECT_TRUE(b.dg.intersections.empty());

    // first gap (lambda_1^-, lambda_1^+)
    const double mid = 0.5 * (anti[0].real() + anti[1].real());
    const double half = 0.5 * (anti[1].real() - anti[0].real());
    EXPECT_NEAR(hill::distance_to_spectrum(b.dg, mid), half, 1e-4);
}

TEST(Diagram, GasymovGapsClosed)
{
    const auto& dg = diagram("gasymov").dg;
    for (double x = 0.0; x <= 30.0; x += 0.41)
        EXPECT_LT(hill::distance_to_spectrum(dg, x), 1e-7) << x;
    // free discriminant: cos(pi sqrt(lambda)) = cos t along every arc
    for (const auto& a : dg.arcs)
        for (const auto& s : a.samples) {
            EXPECT_NEAR(s.lambda.imag(), 0.0, 1e-8);
            EXPECT_LT(std::abs(std::cos(pi * std::sqrt(s.lambda)) - std::cos(s.t)), 1e-8);
        }
    EXPECT_TRUE(dg.intersections.empty());
}

TEST(Diagram, ComplexMathieuJunction)
{
    const auto& dg = diagram("complex_mathieu").dg;
    ASSERT_FALSE(dg.intersections.empty());
    const auto& x = dg.intersections.front();
    EXPECT_NEAR(x.lambda.imag(), 0.0, 1e-8);
    EXPECT_EQ(x.arcs.size(), 4u);
    // two arcs leave the real axis and end at the complex antiperiodic pair
    int off_axis = 0;
    for (int i : x.arcs) {
        const auto& a = dg.arcs[static_cast<std::size_t>(i)];
        if (std::abs(a.samples.back().lambda.imag()) > 0.1)
            ++off_axis;
    }
    EXPECT_EQ(off_axis, 2);
}

TEST(Diagram, EndpointsAndTangents)
{
    for (const std::string name : {"zero", "mathieu", "complex_mathieu", "gasymov"}) {
        const auto& b = diagram(name);
        for (const auto& a : b.dg.arcs) {
            // endpoints resolved to a catalog root at t = 0 and t = pi
            if (a.samples.front().t == 0.0) {
                EXPECT_EQ(a.start.kind, hill::ArcEndpoint::Kind::root) << name << " " << a.band_index;
            }
            if (a.samples.back().t == pi) {
                EXPECT_EQ(a.end.kind, hill::ArcEndpoint::Kind::root) << name << " " << a.band_index;
            }
            for (std::size_t i = 1; i + 1 < a.samples.size(); ++i) {
                if (a.is_singular(i) || a.is_singular(i - 1) || a.is_singular(i + 1))
                    continue;
                const cplx d0 = a.samples[i].lambda - a.samples[i - 1].lambda;
                const cplx d1 = a.samples[i + 1].lambda - a.samples[i].lambda;
                EXPECT_GT((d1 * std::conj(d0)).real(), 0.0) << name << " " << a.band_index << " " << i;
            }
        }
    }
}

TEST(Distance, FreeExamples)
{
    const auto& dg = diagram("zero").dg;
    EXPECT_NEAR(hill::distance_to_spectrum(dg, -1.0), 1.0, 1e-10);
    EXPECT_NEAR(hill::distance_to_spectrum(dg, 4.0), 0.0, 1e-10);
    EXPECT_NEAR(hill::distance_to_spectrum(dg, cplx(10.0, 2.0)), 2.0, 1e-8);
    EXPECT_THROW(hill::distance_to_spectrum(dg, 100.0), hill::InvalidInput);
    hill::ArcDiagram empty;
    EXPECT_THROW(hill::distance_to_spectrum(empty, 0.0), hill::InvalidInput);
}

TEST(Diagram, CatalogMustCoverBound)
{
    const auto cat = hill::build_catalog(Potential::zero(), 4);
    EXPECT_THROW(hill::build_diagram(Potential::zero(), cat, 200.0), hill::InvalidInput);
}

TEST(Diagram, CsvExport)
{
    const auto& dg = diagram("zero").dg;
    std::ostringstream os;
    hill::write_arcs_csv(os, dg);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "band_index,t,re_lambda,im_lambda,singular_flag");
    std::size_t rows = 0;
    while (std::getline(is, line))
        ++rows;
    std::size_t want = 0;
    for (const auto& a : dg.arcs)
        want += a.samples.size();
    EXPECT_EQ(rows, want);
}
