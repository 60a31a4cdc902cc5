#pragma once

// Eigenfunction expansion and band projections for real potentials.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hillspec/detail/quadrature.hpp"
#include "hillspec/errors.hpp"
#include "hillspec/io.hpp"
#include "hillspec/monodromy.hpp"
#include "hillspec/parallel.hpp"
#include "hillspec/potential.hpp"
#include "hillspec/spectra.hpp"

namespace hill {

/// Values on the uniform grid x0 + i h, i = 0..n-1, h = (x1 - x0)/(n - 1).
/// The grid is the declared support: the function is zero outside it.
struct FunctionOnGrid {
    double x0 = 0.0, x1 = 1.0;
    std::vector<cplx> values;

    std::size_t size() const { return values.size(); }
    double step() const { return (x1 - x0) / static_cast<double>(values.size() - 1); }
    double x(std::size_t i) const { return i + 1 == values.size() ? x1 : x0 + step() * static_cast<double>(i); }

    std::vector<double> nodes() const
    {
        std::vector<double> xs(size());
        for (std::size_t i = 0; i < size(); ++i)
            xs[i] = x(i);
        return xs;
    }

    static FunctionOnGrid zeros(double x0, double x1, std::size_t n)
    {
        if (n < 3 || !(x1 > x0))
            throw InvalidInput("grid needs x1 > x0 and at least 3 nodes");
        return {x0, x1, std::vector<cplx>(n)};
    }

    static FunctionOnGrid sample(double x0, double x1, std::size_t n, const std::function<cplx(double)>& f)
    {
        auto g = zeros(x0, x1, n);
        for (std::size_t i = 0; i < n; ++i)
            g.values[i] = f(g.x(i));
        return g;
    }

    /// Same step, support widened by whole steps on each side, zero-padded.
    FunctionOnGrid padded(std::size_t left, std::size_t right) const
    {
        const double h = step();
        FunctionOnGrid g{x0 - h * static_cast<double>(left), x1 + h * static_cast<double>(right), {}};
        g.values.assign(left, cplx{});
        g.values.insert(g.values.end(), values.begin(), values.end());
        g.values.insert(g.values.end(), right, cplx{});
        return g;
    }

    bool same_grid(const FunctionOnGrid& o) const
    {
        return size() == o.size() && std::abs(x0 - o.x0) <= 1e-12 * (1.0 + std::abs(x0)) &&
               std::abs(x1 - o.x1) <= 1e-12 * (1.0 + std::abs(x1));
    }
};

namespace detail {

inline std::vector<double> trapezoid_weights(const FunctionOnGrid& f)
{
    std::vector<double> w(f.size(), f.step());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

inline void require_same_grid(const FunctionOnGrid& a, const FunctionOnGrid& b)
{
    if (!a.same_grid(b))
        throw InvalidInput("functions live on different grids");
}

inline void require_real(const Potential& p)
{
    if (!p.is_real(1e-12))
        throw InvalidInput("self-adjoint only: the expansion needs a real-valued potential");
}

}  // namespace detail

/// Integral of a conj(b) by the trapezoid rule.
inline cplx inner(const FunctionOnGrid& a, const FunctionOnGrid& b)
{
    detail::require_same_grid(a, b);
    const auto w = detail::trapezoid_weights(a);
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i)
        s += w[i] * a.values[i] * std::conj(b.values[i]);
    return s;
}

inline double l2_norm(const FunctionOnGrid& f) { return std::sqrt(std::max(0.0, inner(f, f).real())); }

inline double l2_distance(const FunctionOnGrid& a, const FunctionOnGrid& b)
{
    detail::require_same_grid(a, b);
    FunctionOnGrid d = a;
    for (std::size_t i = 0; i < d.size(); ++i)
        d.values[i] -= b.values[i];
    return l2_norm(d);
}

/// -f'' + V f by fourth-order central differences, zero outside the grid.
inline FunctionOnGrid apply_hill_operator(const Potential& p, const FunctionOnGrid& f)
{
    const double h = f.step();
    const auto v = [&](std::ptrdiff_t i) {
        return i < 0 || i >= static_cast<std::ptrdiff_t>(f.size()) ? cplx{} : f.values[static_cast<std::size_t>(i)];
    };
    FunctionOnGrid out = f;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const auto i = static_cast<std::ptrdiff_t>(k);
        const cplx d2 = (-v(i - 2) + 16.0 * v(i - 1) - 30.0 * v(i) + 16.0 * v(i + 1) - v(i + 2)) / (12.0 * h * h);
        out.values[k] = -d2 + p(f.x(k)) * v(i);
    }
    return out;
}

/// Solutions at one spectral parameter inside a band.
struct SpectralFunctionData {
    double lambda = 0.0;
    std::vector<cplx> theta_x, phi_x;   // on the working grid
    double weight = 0.0;                // 1 / sqrt(1 - Delta_+^2)
    int band_index = 0;
    int sign = 1;                       // (-1)^band_index
};

struct SpectralIntegrand {
    SpectralFunctionData data;
    cplx F1{}, F2{};
    cplx phi_pi{}, theta_prime_pi{}, delta_minus{}, delta_plus_dot{};
    FunctionOnGrid values;              // Phi(lambda, . ; f)
};

namespace detail {

/// Number of zeros of phi(lambda, .) in (0, pi]; equals the band index for
/// lambda inside a band.
inline int dirichlet_count(const Potential& p, double lambda, double tol)
{
    const int n = 64 + static_cast<int>(16.0 * std::sqrt(std::max(0.0, lambda)));
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        xs[static_cast<std::size_t>(i)] = std::numbers::pi * (i + 1) / n;
    const auto s = solve_on_grid(p, lambda, xs, tol);
    int count = 0;
    double prev = 1.0;   // phi > 0 just right of 0
    for (const auto& v : s.phi) {
        if (v.real() * prev < 0.0)
            ++count;
        if (v.real() != 0.0)
            prev = v.real();
    }
    return count;
}

inline cplx weighted_sum(const std::vector<double>& w, const std::vector<cplx>& f, const std::vector<cplx>& g)
{
    cplx s{};
    for (std::size_t i = 0; i < f.size(); ++i)
        s += w[i] * f[i] * g[i];
    return s;
}

/// out += scale Phi(lambda, . ; f) given F1, F2 at lambda.
inline void assemble_phi(const SpectralIntegrand& s, cplx F1, cplx F2, std::vector<cplx>& out, cplx scale)
{
    const auto& th = s.data.theta_x;
    const auto& ph = s.data.phi_x;
    const cplx a = scale * (s.phi_pi * F1 - s.delta_minus * F2);
    const cplx b = scale * (-s.theta_prime_pi * F2 - s.delta_minus * F1);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += a * th[i] + b * ph[i];
}

}  // namespace detail

/// Phi(lambda, x; f) on f's grid, with F1, F2 by the trapezoid rule.
inline SpectralIntegrand spectral_integrand(const Potential& p, double lambda, const FunctionOnGrid& f,
                                            double tol = default_tol)
{
    detail::require_real(p);
    const auto s = integrate_fundamental(p, lambda, tol, 1);
    const double d = s.delta_plus.real();
    if (!(1.0 - std::abs(d) > 1e-10))
        throw InvalidInput("lambda = " + io::fmt(lambda) + " is not strictly inside a band (Delta_+ = " + io::fmt(d) + ")");
    SpectralIntegrand out;
    const auto g = solve_on_grid(p, lambda, f.nodes(), tol);
    out.data.lambda = lambda;
    out.data.theta_x = g.theta;
    out.data.phi_x = g.phi;
    out.data.weight = 1.0 / std::sqrt(1.0 - d * d);
    out.data.band_index = detail::dirichlet_count(p, lambda, tol);
    out.data.sign = out.data.band_index % 2 == 0 ? 1 : -1;
    out.phi_pi = s.phi_pi;
    out.theta_prime_pi = s.theta_prime_pi;
    out.delta_minus = s.delta_minus;
    out.delta_plus_dot = s.delta_plus_dot;
    const auto w = detail::trapezoid_weights(f);
    out.F1 = detail::weighted_sum(w, f.values, g.theta);
    out.F2 = detail::weighted_sum(w, f.values, g.phi);
    out.values = FunctionOnGrid{f.x0, f.x1, std::vector<cplx>(f.size())};
    detail::assemble_phi(out, out.F1, out.F2, out.values.values, 1.0);
    return out;
}

/// Band k = [lo, hi] = [lambda_k^+, lambda_{k+1}^-].
struct Band {
    int index = 0;
    double lo = 0.0, hi = 0.0;
};

/// Consecutive bands joined across closed gaps, parametrized by a single
/// tau in [0, count pi] with (-1)^first Delta_+(lambda(tau)) = cos tau.
struct BandInterval {
    int first_band = 0, count = 1;
    double lo = 0.0, hi = 0.0;
};

struct BandSystem {
    std::vector<Band> bands;
    std::vector<BandInterval> intervals;
    std::vector<bool> gap_closed;   // gap_closed[k] for the gap below band k (k >= 1)
};

/// The first `bands` bands from the periodic and antiperiodic catalogs.
inline BandSystem band_system(const SpectrumCatalog& cat, int bands)
{
    if (bands < 1)
        throw InvalidInput("need at least one band");
    // edges of gap k (k >= 1), lambda_0 for k = 0
    auto gap = [&](int k) {
        const auto& set = k % 2 == 0 ? cat.periodic : cat.antiperiodic;
        const int label = k % 2 == 0 ? k / 2 : (k - 1) / 2;
        std::vector<double> e;
        double sep = 0.0;
        for (const auto& r : set) {
            if (r.window != label)
                continue;
            if (std::abs(r.location.imag()) > 1e-6 * (1.0 + std::abs(r.location)))
                throw InvalidInput("band edge " + to_string(r.location) + " is not real");
            for (int m = 0; m < r.multiplicity; ++m)
                e.push_back(r.location.real());
            sep = std::max(sep, r.separation);
        }
        const std::size_t want = k == 0 ? 1 : 2;
        if (e.size() != want)
            throw InvalidInput("band edges of gap " + std::to_string(k) +
                               " are not in the catalog; use a larger count_target or bound");
        std::sort(e.begin(), e.end());
        return std::pair{e, sep};
    };
    BandSystem bs;
    bs.gap_closed.assign(static_cast<std::size_t>(bands), false);
    double lo = gap(0).first[0];
    for (int k = 0; k < bands; ++k) {
        const auto [e, sep] = gap(k + 1);
        const bool closed = e[1] - e[0] <= 1e-6 * (1.0 + std::abs(e[0])) + 2.0 * sep;
        const double mid = 0.5 * (e[0] + e[1]);
        bs.bands.push_back({k, lo, closed ? mid : e[0]});
        if (k + 1 < bands)
            bs.gap_closed[static_cast<std::size_t>(k + 1)] = closed;
        lo = closed ? mid : e[1];
    }
    for (int k = 0; k < bands; ++k) {
        if (k > 0 && bs.gap_closed[static_cast<std::size_t>(k)]) {
            auto& iv = bs.intervals.back();
            ++iv.count;
            iv.hi = bs.bands[static_cast<std::size_t>(k)].hi;
        } else {
            bs.intervals.push_back({k, 1, bs.bands[static_cast<std::size_t>(k)].lo, bs.bands[static_cast<std::size_t>(k)].hi});
        }
    }
    return bs;
}

/// Catalog options reaching the top of band `bands - 1`.
inline CatalogOptions band_catalog_options(const Potential& p, int bands, double tol = default_tol)
{
    CatalogOptions o;
    o.tol = tol;
    o.dirichlet = false;
    o.critical = false;
    const double top = (bands + 1.0) * (bands + 1.0) + p.mean().real();
    o.bound = top + 2.0 * bands + 4.0;
    return o;
}

struct SpectralOptions {
    int nodes_per_band = 32;
    double tol = default_tol;
    int workers = 1;
};

namespace detail {

/// lambda in band b with (-1)^k Delta_+(lambda) = cos tau, 0 <= tau <= pi.
inline double band_lambda(const Potential& p, const Band& b, double tau, double tol)
{
    const double sg = b.index % 2 == 0 ? 1.0 : -1.0;
    const double c = std::cos(tau);
    double lo = b.lo, hi = b.hi;
    double x = lo + (hi - lo) * 0.5 * (1.0 - c);
    for (int it = 0; it < 100; ++it) {
        const auto s = integrate_fundamental(p, x, tol, 1);
        const double g = sg * s.delta_plus.real() - c;
        const double dg = sg * s.delta_plus_dot.real();
        if (g > 0.0) lo = x; else hi = x;   // g decreases along the band
        double next = dg != 0.0 ? x - g / dg : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        const double step = std::abs(next - x);
        x = next;
        if (step <= 1e-14 * (1.0 + std::abs(x)) || hi - lo <= 1e-14 * (1.0 + std::abs(x)))
            break;
    }
    return x;
}

inline double band_tau(const Potential& p, const Band& b, double lambda, double tol)
{
    if (lambda <= b.lo)
        return 0.0;
    if (lambda >= b.hi)
        return std::numbers::pi;
    const double sg = b.index % 2 == 0 ? 1.0 : -1.0;
    const double d = sg * integrate_fundamental(p, lambda, tol, 0).delta_plus.real();
    return std::acos(std::clamp(d, -1.0, 1.0));
}

}  // namespace detail

/// One quadrature node of a band-integral: data at lambda(tau) and the
/// weight multiplying Phi(lambda, x; f) in the sum.
struct SpectralNode {
    SpectralIntegrand kernel;   // F1, F2 and values unused until applied
    double tau = 0.0;
    double qweight = 0.0;
};

/// Sub-interval [a, b] of the real line; the part lying in bands counts.
struct SpectralSet {
    std::vector<std::pair<double, double>> intervals;
};

/// Precomputed sum over band quadrature nodes; applying to f on the grid it
/// was built for costs two inner products and one accumulation per node.
class SpectralProjector {
public:
    SpectralProjector(const Potential& p, const BandSystem& bs, const SpectralSet& sigma,
                      const FunctionOnGrid& grid, const SpectralOptions& o = {})
        : grid_{grid.x0, grid.x1, std::vector<cplx>(grid.size())}, bands_(bs)
    {
        detail::require_real(p);
        if (o.nodes_per_band < 2)
            throw InvalidInput("nodes_per_band must be at least 2");
        auto iv = sigma.intervals;
        std::sort(iv.begin(), iv.end());
        for (std::size_t i = 0; i < iv.size(); ++i) {
            if (!(iv[i].second > iv[i].first))
                throw InvalidInput("empty or reversed spectral interval");
            if (i > 0 && iv[i].first < iv[i - 1].second)
                throw InvalidInput("spectral intervals overlap");
        }
        if (!iv.empty() && iv.back().second > bs.bands.back().hi * (1.0 + 1e-12) + 1e-12)
            throw InvalidInput("spectral interval reaches past the computed bands (top " +
                               io::fmt(bs.bands.back().hi) + ")");

        // (band, tau range, node count) pieces
        struct Piece {
            std::size_t band;
            double t0, t1;
            int n;
        };
        std::vector<Piece> pieces;
        for (std::size_t k = 0; k < bs.bands.size(); ++k) {
            const auto& b = bs.bands[k];
            for (const auto& [a, c] : iv) {
                const double lo = std::max(a, b.lo), hi = std::min(c, b.hi);
                if (!(hi > lo))
                    continue;
                const double t0 = lo <= b.lo ? 0.0 : detail::band_tau(p, b, lo, o.tol);
                const double t1 = hi >= b.hi ? std::numbers::pi : detail::band_tau(p, b, hi, o.tol);
                const int n = std::max(4, static_cast<int>(std::ceil(o.nodes_per_band * (t1 - t0) / std::numbers::pi - 1e-9)));
                pieces.push_back({k, t0, t1, n});
            }
        }
        std::vector<std::pair<std::size_t, double>> taus;   // band, tau
        std::vector<double> qw;
        for (const auto& pc : pieces) {
            const auto& g = detail::gauss_legendre(pc.n);
            for (std::size_t i = 0; i < g.nodes.size(); ++i) {
                taus.push_back({pc.band, pc.t0 + 0.5 * (pc.t1 - pc.t0) * (g.nodes[i] + 1.0)});
                qw.push_back(0.5 * (pc.t1 - pc.t0) * g.weights[i]);
            }
        }
        nodes_.resize(taus.size());
        node_band_.resize(taus.size());
        const auto xs = grid.nodes();
        parallel_for(taus.size(), o.workers, [&](std::size_t i) {
            const auto& b = bs.bands[taus[i].first];
            const double lam = detail::band_lambda(p, b, taus[i].second, o.tol);
            const auto s = integrate_fundamental(p, lam, o.tol, 1);
            const auto g = solve_on_grid(p, lam, xs, o.tol);
            SpectralNode nd;
            nd.tau = taus[i].second;
            auto& k = nd.kernel;
            k.data.lambda = lam;
            k.data.theta_x = g.theta;
            k.data.phi_x = g.phi;
            const double d = s.delta_plus.real();
            k.data.weight = std::abs(d) < 1.0 ? 1.0 / std::sqrt(1.0 - d * d) : 0.0;
            k.data.band_index = b.index;
            k.data.sign = b.index % 2 == 0 ? 1 : -1;
            k.phi_pi = s.phi_pi;
            k.theta_prime_pi = s.theta_prime_pi;
            k.delta_minus = s.delta_minus;
            k.delta_plus_dot = s.delta_plus_dot;
            // dlambda / sqrt(1 - Delta^2) (-1)^k = -dtau / Delta_+.
            nd.qweight = -qw[i] / (2.0 * std::numbers::pi * s.delta_plus_dot.real());
            nodes_[i] = std::move(nd);
            node_band_[i] = b.index;
        });
    }

    const std::vector<SpectralNode>& nodes() const { return nodes_; }
    const BandSystem& bands() const { return bands_; }

    /// P f on the grid, plus per-band contributions when requested.
    FunctionOnGrid apply(const FunctionOnGrid& f, std::vector<FunctionOnGrid>* per_band = nullptr) const
    {
        detail::require_same_grid(grid_, f);
        const auto w = detail::trapezoid_weights(f);
        const std::size_t nb = bands_.bands.size();
        std::vector<std::vector<cplx>> acc(nb, std::vector<cplx>(f.size()));
        std::vector<bool> used(nb, false);
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const auto& s = nodes_[i].kernel;
            const cplx F1 = detail::weighted_sum(w, f.values, s.data.theta_x);
            const cplx F2 = detail::weighted_sum(w, f.values, s.data.phi_x);
            const auto k = static_cast<std::size_t>(node_band_[i]);
            detail::assemble_phi(s, F1, F2, acc[k], nodes_[i].qweight);
            used[k] = true;
        }
        FunctionOnGrid out = grid_;
        if (per_band)
            per_band->clear();
        for (std::size_t k = 0; k < nb; ++k) {   // fixed band order
            for (std::size_t j = 0; j < f.size(); ++j)
                out.values[j] += acc[k][j];
            if (per_band)
                per_band->push_back(FunctionOnGrid{f.x0, f.x1, std::move(acc[k])});
        }
        return out;
    }

private:
    FunctionOnGrid grid_;
    BandSystem bands_;
    std::vector<SpectralNode> nodes_;
    std::vector<int> node_band_;
};

/// Every band of the system, edge to edge.
inline SpectralSet all_bands(const BandSystem& bs)
{
    SpectralSet s;
    for (const auto& iv : bs.intervals)
        s.intervals.push_back({iv.lo, iv.hi});
    return s;
}

struct ExpansionResult {
    FunctionOnGrid reconstruction;
    BandSystem bands;
    std::vector<double> band_norms;   // L2 norm of each band's contribution on the grid
    int nodes_per_band = 0;
};

/// Truncated expansion over the first `bands` bands of a prepared catalog.
inline ExpansionResult expand(const Potential& p, const FunctionOnGrid& f, const SpectrumCatalog& cat, int bands,
                              const SpectralOptions& o = {})
{
    detail::require_real(p);
    const auto bs = band_system(cat, bands);
    const SpectralProjector P(p, bs, all_bands(bs), f, o);
    ExpansionResult r;
    std::vector<FunctionOnGrid> parts;
    r.reconstruction = P.apply(f, &parts);
    r.bands = bs;
    r.nodes_per_band = o.nodes_per_band;
    for (const auto& g : parts)
        r.band_norms.push_back(l2_norm(g));
    return r;
}

inline ExpansionResult expand(const Potential& p, const FunctionOnGrid& f, int bands, const SpectralOptions& o = {})
{
    detail::require_real(p);
    if (bands < 1)
        throw InvalidInput("need at least one band");
    auto co = band_catalog_options(p, bands, o.tol);
    co.workers = o.workers;
    return expand(p, f, build_catalog(p, 4, co), bands, o);
}

/// P(sigma) f.
inline FunctionOnGrid project(const Potential& p, const FunctionOnGrid& f, const SpectralSet& sigma,
                              const BandSystem& bs, const SpectralOptions& o = {})
{
    if (sigma.intervals.empty()) {
        detail::require_real(p);
        return FunctionOnGrid{f.x0, f.x1, std::vector<cplx>(f.size())};
    }
    return SpectralProjector(p, bs, sigma, f, o).apply(f);
}

/// Band system large enough for sigma, built from a fresh catalog.
inline BandSystem band_system_for(const Potential& p, double top, const SpectralOptions& o = {})
{
    detail::require_real(p);
    const int bands = std::max(1, static_cast<int>(std::ceil(std::sqrt(std::max(0.0, top - p.mean().real())))) + 1);
    auto co = band_catalog_options(p, bands, o.tol);
    co.workers = o.workers;
    return band_system(build_catalog(p, 4, co), bands);
}

inline FunctionOnGrid project(const Potential& p, const FunctionOnGrid& f, const SpectralSet& sigma,
                              const SpectralOptions& o = {})
{
    if (sigma.intervals.empty())
        return project(p, f, sigma, BandSystem{}, o);
    double top = 0.0;
    for (const auto& iv : sigma.intervals)
        top = std::max(top, iv.second);
    return project(p, f, sigma, band_system_for(p, top, o), o);
}

/// CSV with header x,re_f,im_f.
inline void write_function_csv(std::ostream& os, const FunctionOnGrid& f)
{
    io::csv_row(os, {"x", "re_f", "im_f"});
    for (std::size_t i = 0; i < f.size(); ++i)
        io::csv_row(os, {io::fmt(f.x(i)), io::fmt(f.values[i].real()), io::fmt(f.values[i].imag())});
}

/// Reads x,re_f,im_f rows on a uniform grid (header optional).
inline FunctionOnGrid read_function_csv(std::istream& is)
{
    std::vector<double> xs;
    std::vector<cplx> vs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ','))
            throw InvalidInput("line " + std::to_string(lineno) + ": expected x,re,im");
        try {
            const double x = std::stod(a);
            xs.push_back(x);
            vs.emplace_back(std::stod(b), std::stod(c));
        } catch (const std::exception&) {
            if (lineno == 1 && xs.empty())
                continue;   // header
            throw InvalidInput("line " + std::to_string(lineno) + ": not a number");
        }
    }
    if (xs.size() < 3)
        throw InvalidInput("function needs at least 3 grid nodes");
    const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    if (!(h > 0.0))
        throw InvalidInput("grid must be increasing");
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (std::abs(xs[i] - (xs.front() + h * static_cast<double>(i))) > 1e-9 * (1.0 + std::abs(xs[i])))
            throw InvalidInput("grid is not uniform at node " + std::to_string(i));
    return {xs.front(), xs.back(), std::move(vs)};
}

}  // namespace hill
