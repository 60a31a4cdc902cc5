#pragma once

// Periodic, antiperiodic, Dirichlet and critical-point spectra, and the
// spectra of the t-family H(t) (zeros of Delta_+ - cos t).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "hillspec/io.hpp"
#include "hillspec/monodromy.hpp"
#include "hillspec/parallel.hpp"
#include "hillspec/potential.hpp"
#include "hillspec/roots.hpp"

namespace hill {

inline constexpr const char* tag_discriminant = "delta_plus_minus_w";
inline constexpr const char* tag_dirichlet = "phi_pi";
inline constexpr const char* tag_critical = "delta_plus_dot";

inline constexpr double fine_tol = 1e-12;

namespace detail {

inline AnalyticFn with_fine(AnalyticFn f, AnalyticFn fine)
{
    f.fine = std::move(fine.eval);
    return f;
}

inline AnalyticFn discriminant_raw(const Potential& p, cplx w, double tol)
{
    return {[p, w, tol](cplx z, int order) {
                const auto s = integrate_fundamental(p, z, tol, std::max(order, 1));
                Jet j;
                j.order = s.order;
                for (int k = 0; k <= s.order; ++k)
                    j.d[static_cast<std::size_t>(k)] = s.delta_plus_derivative(k);
                j.d[0] -= w;
                return j;
            },
            3, tag_discriminant};
}

inline AnalyticFn dirichlet_raw(const Potential& p, double tol)
{
    return {[p, tol](cplx z, int order) {
                const auto s = integrate_fundamental(p, z, tol, std::max(order, 1));
                Jet j;
                j.order = s.order;
                for (int k = 0; k <= s.order; ++k)
                    j.d[static_cast<std::size_t>(k)] = s.taylor[static_cast<std::size_t>(k)].phi;
                return j;
            },
            3, tag_dirichlet};
}

inline AnalyticFn critical_raw(const Potential& p, double tol)
{
    return {[p, tol](cplx z, int order) {
                const int need = std::min(order + 1, max_derivative_order);
                const auto s = integrate_fundamental(p, z, tol, need);
                Jet j;
                j.order = need - 1;
                for (int k = 0; k < need; ++k)
                    j.d[static_cast<std::size_t>(k)] = s.delta_plus_derivative(k + 1);
                return j;
            },
            2, tag_critical};
}

}  // namespace detail

/// Delta_+(z) - w with derivatives up to order 3.
inline AnalyticFn discriminant_fn(const Potential& p, cplx w, double tol = default_tol)
{
    return detail::with_fine(detail::discriminant_raw(p, w, tol),
                             detail::discriminant_raw(p, w, std::min(tol, fine_tol)));
}

/// phi(z, pi) with derivatives up to order 3.
inline AnalyticFn dirichlet_fn(const Potential& p, double tol = default_tol)
{
    return detail::with_fine(detail::dirichlet_raw(p, tol),
                             detail::dirichlet_raw(p, std::min(tol, fine_tol)));
}

/// Delta_+'(z) with derivatives up to order 2.
inline AnalyticFn critical_fn(const Potential& p, double tol = default_tol)
{
    return detail::with_fine(detail::critical_raw(p, tol),
                             detail::critical_raw(p, std::min(tol, fine_tol)));
}

enum class SpectrumSet { periodic, antiperiodic, dirichlet, critical };

inline const char* set_name(SpectrumSet s)
{
    switch (s) {
    case SpectrumSet::periodic: return "periodic";
    case SpectrumSet::antiperiodic: return "antiperiodic";
    case SpectrumSet::dirichlet: return "dirichlet";
    case SpectrumSet::critical: return "critical";
    }
    return "?";
}

struct SpectrumCatalog {
    std::vector<Root> periodic, antiperiodic, dirichlet, critical;
    Rect search_region;          // union of all windows
    int count_target = 0;
    double covered_bound = 0.0;  // real parts below this are covered by every requested set
    double tol = default_tol;
    RootOptions root_options;

    const std::vector<Root>& get(SpectrumSet s) const
    {
        switch (s) {
        case SpectrumSet::periodic: return periodic;
        case SpectrumSet::antiperiodic: return antiperiodic;
        case SpectrumSet::dirichlet: return dirichlet;
        case SpectrumSet::critical: return critical;
        }
        return periodic;
    }
};

struct CatalogOptions {
    double tol = default_tol;
    int workers = 1;
    bool periodic = true, antiperiodic = true, dirichlet = true, critical = true;
    double bound = 0.0;  // extend windows past this real part
    RootOptions roots;
};

namespace detail {

struct Strip {
    double re_lo, im_lo, im_hi;
};

inline Strip search_strip(const Potential& p)
{
    const auto& b = p.bounds();
    const double pad = 0.5 + 0.1 * (b.im_max - b.im_min);
    return {b.re_min - 1.0, b.im_min - pad, b.im_max + pad};
}

/// Moves a vertical cut line off nearby zeros of f: samples |f| along the
/// segment and shifts by a fraction of `spacing` until no sample is small
/// against the median.
inline double clean_cut(const AnalyticFn& f, double x, double im_lo, double im_hi, double spacing)
{
    static constexpr double shifts[] = {0.0, 0.031, -0.029, 0.067, -0.061, 0.113, -0.107, 0.171};
    for (double sh : shifts) {
        const double xc = x + sh * spacing;
        std::vector<double> mags;
        for (int i = 0; i <= 16; ++i) {
            const double y = im_lo + (im_hi - im_lo) * i / 16.0;
            mags.push_back(std::abs(f(cplx(xc, y), 0)[0]));
        }
        const double lo = *std::min_element(mags.begin(), mags.end());
        if (lo >= 1e-2 * median(mags))
            return xc;
    }
    return x + shifts[7] * spacing;
}

struct WindowRoots {
    std::vector<Root> roots;
    std::vector<int> counts;
    std::vector<double> cuts;
};

/// Zeros of f in consecutive windows [cut_j, cut_{j+1}] x strip, window j
/// labelled labels[j].
inline WindowRoots roots_in_windows(const AnalyticFn& f, std::vector<double> cuts,
                                    const std::vector<int>& labels, const Strip& strip,
                                    const CatalogOptions& o)
{
    // zeros near the real axis approach a fixed-height contour like 1/sqrt(Re)
    auto grow = [](double re) { return 0.1 * std::sqrt(std::max(0.0, re)); };
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const double left = i > 0 ? cuts[i] - cuts[i - 1] : cuts[1] - cuts[0];
        const double right = i + 1 < cuts.size() ? cuts[i + 1] - cuts[i] : left;
        const double g = grow(i + 1 < cuts.size() ? cuts[i + 1] : cuts[i]);
        cuts[i] = clean_cut(f, cuts[i], strip.im_lo - g, strip.im_hi + g, std::min(left, right));
    }
    const std::size_t nw = cuts.size() - 1;
    std::vector<std::vector<Root>> per(nw);
    std::vector<int> counts(nw);
    parallel_for(nw, o.workers, [&](std::size_t w) {
        const double g = grow(cuts[w + 1]);
        const Rect r{cuts[w], cuts[w + 1], strip.im_lo - g, strip.im_hi + g};
        const auto wr = winding_fixed(f, r, o.roots);
        counts[w] = wr.count;
        try {
            per[w] = find_roots(f, r, o.roots, wr.count);
        } catch (const CountShortfall& e) {
            throw CountShortfall(f.tag + " window " + std::to_string(labels[w]) + ": " + e.what());
        }
        for (auto& x : per[w])
            x.window = labels[w];
    });
    WindowRoots out;
    out.counts = counts;
    out.cuts = cuts;
    for (auto& v : per)
        for (auto& x : v)
            out.roots.push_back(x);
    // clusters may straddle a cut
    out.roots = merge_clusters(std::move(out.roots), o.roots);
    return out;
}

/// Cuts at midpoints between asymptotic window centres.
inline std::vector<double> window_cuts(const std::vector<double>& centers, double lower)
{
    std::vector<double> cuts{std::min(lower, centers.front() - 1.0)};
    for (std::size_t i = 0; i + 1 < centers.size(); ++i)
        cuts.push_back(0.5 * (centers[i] + centers[i + 1]));
    const double last = centers.back();
    const double next_gap = centers.size() > 1 ? last - centers[centers.size() - 2] : 2.0;
    cuts.push_back(last + 0.5 * std::max(next_gap + 2.0, 2.0));
    return cuts;
}

}  // namespace detail

/// First count_target windows of each set: periodic around (2j)^2 + mean,
/// antiperiodic around (2j+1)^2 + mean (j = 0..K-1), Dirichlet and critical
/// around j^2 + mean (j = 1..K).  With a positive `bound` in the options,
/// each set gets enough windows for its last cut to exceed it.
inline SpectrumCatalog build_catalog(const Potential& p, int count_target,
                                     const CatalogOptions& o = {})
{
    if (count_target < 4)
        throw InvalidInput("count_target must be at least 4, got " + std::to_string(count_target));
    const auto strip = detail::search_strip(p);
    const double m = p.mean().real();
    SpectrumCatalog cat;
    cat.count_target = count_target;
    cat.tol = o.tol;
    cat.root_options = o.roots;

    double hi = 1e300, top = strip.re_lo;
    // center(j) for window j; labels start at `first`
    auto run = [&](bool enabled, const AnalyticFn& f, auto center, int first,
                   std::vector<Root>& dst) {
        if (!enabled)
            return;
        std::vector<double> centers;
        std::vector<int> labels;
        for (int j = first;; ++j) {
            centers.push_back(center(j) + m);
            labels.push_back(j);
            if (static_cast<int>(centers.size()) >= count_target &&
                detail::window_cuts(centers, strip.re_lo).back() > o.bound)
                break;
        }
        const auto w = detail::roots_in_windows(f, detail::window_cuts(centers, strip.re_lo),
                                                labels, strip, o);
        dst = w.roots;
        hi = std::min(hi, w.cuts.back());
        top = std::max(top, w.cuts.back());
    };
    auto sq = [](double v) { return v * v; };
    run(o.periodic, discriminant_fn(p, 1.0, o.tol), [&](int j) { return sq(2.0 * j); }, 0,
        cat.periodic);
    run(o.antiperiodic, discriminant_fn(p, -1.0, o.tol), [&](int j) { return sq(2.0 * j + 1.0); },
        0, cat.antiperiodic);
    run(o.dirichlet, dirichlet_fn(p, o.tol), [&](int j) { return sq(j); }, 1, cat.dirichlet);
    run(o.critical, critical_fn(p, o.tol), [&](int j) { return sq(j); }, 1, cat.critical);
    cat.covered_bound = hi;
    const double g = 0.1 * std::sqrt(std::max(0.0, top));
    cat.search_region = {strip.re_lo, top, strip.im_lo - g, strip.im_hi + g};
    return cat;
}

/// Zeros of Delta_+ - cos t, the spectrum of H(t).  t and 2 pi - t give
/// the same equation; t is canonicalized to [0, pi].  Returns the first
/// `count` distinct zeros by real part, with multiplicities.
inline std::vector<Root> spectrum_Ht(const Potential& p, double t, int count,
                                     const CatalogOptions& o = {})
{
    if (!(t >= 0.0 && t <= 2.0 * std::numbers::pi))
        throw InvalidInput("t must lie in [0, 2 pi]");
    if (count < 1)
        throw InvalidInput("count must be positive");
    if (t > std::numbers::pi)
        t = 2.0 * std::numbers::pi - t;
    const double s = t / std::numbers::pi;
    const double m = p.mean().real();
    const auto strip = detail::search_strip(p);
    const auto f = discriminant_fn(p, std::cos(t), o.tol);

    std::vector<Root> out;
    for (int windows = count + 1;; windows *= 2) {
        // free-case roots (2j +- s)^2, grouped when closer than 1
        std::vector<double> vals{s * s};
        for (int j = 1; static_cast<int>(vals.size()) < 2 * windows + 2; ++j) {
            vals.push_back((2.0 * j - s) * (2.0 * j - s));
            vals.push_back((2.0 * j + s) * (2.0 * j + s));
        }
        std::sort(vals.begin(), vals.end());
        std::vector<double> centers;
        for (double v : vals) {
            if (!centers.empty() && v - centers.back() < 1.0)
                centers.back() = 0.5 * (centers.back() + v);
            else
                centers.push_back(v);
        }
        centers.resize(std::min<std::size_t>(centers.size(), static_cast<std::size_t>(windows)));
        for (auto& c : centers)
            c += m;
        std::vector<int> labels(centers.size());
        for (std::size_t i = 0; i < labels.size(); ++i)
            labels[i] = static_cast<int>(i);
        auto w = detail::roots_in_windows(f, detail::window_cuts(centers, strip.re_lo), labels,
                                          strip, o);
        if (static_cast<int>(w.roots.size()) >= count || windows > 4 * count + 8) {
            out = std::move(w.roots);
            break;
        }
    }
    std::sort(out.begin(), out.end(), [](const Root& a, const Root& b) {
        return a.location.real() < b.location.real();
    });
    if (static_cast<int>(out.size()) > count)
        out.resize(static_cast<std::size_t>(count));
    if (static_cast<int>(out.size()) < count)
        throw CountShortfall("H(t) spectrum: found " + std::to_string(out.size()) + " of " +
                             std::to_string(count) + " zeros");
    return out;
}

/// Algebraic and geometric multiplicity of E as an eigenvalue of H(t).
struct MultiplicityData {
    int algebraic = 1;
    int geometric = 1;
    bool diagonalizable = true;
    double identity_defect = 0.0;   // ||U(E, pi) - e^{it} I||, t in {0, pi}
    double identity_tol = 0.0;
};

/// Monodromy test for the root functions at a zero of Delta_+ - cos t.  At
/// t in {0, pi} the geometric multiplicity is 2 exactly when U(E, pi) is
/// e^{it} times the identity; for interior t the multipliers e^{+-it} are
/// distinct and the geometric multiplicity per multiplier is 1.
inline MultiplicityData ht_multiplicity_data(const Potential& p, const Root& root, double t,
                                             double tol = default_tol)
{
    const auto s = integrate_fundamental(p, root.location, tol, 1);
    const cplx mismatch = s.delta_plus - std::cos(t);
    if (std::abs(mismatch) > 1e-6 * (1.0 + std::abs(root.location)))
        throw InvalidInput("E=" + to_string(root.location) + " is not a zero of Delta_+ - cos t at t=" +
                           std::to_string(t));
    MultiplicityData d;
    d.algebraic = root.multiplicity;
    const double c = std::cos(t);
    const bool edge = std::abs(std::sin(t)) < 1e-12;
    if (edge) {
        const double e = c > 0 ? 1.0 : -1.0;
        d.identity_defect = std::sqrt(std::norm(s.theta_pi - e) + std::norm(s.phi_pi) +
                                      std::norm(s.theta_prime_pi) + std::norm(s.phi_prime_pi - e));
        const double du = std::sqrt(std::norm(s.dz_theta_pi) + std::norm(s.dz_phi_pi) +
                                    std::norm(s.dz_theta_prime_pi) + std::norm(s.dz_phi_prime_pi));
        // a merged near-degenerate pair sits up to one separation from either member
        d.identity_tol = 1e-7 * (1.0 + std::abs(root.location)) + 4.0 * du * root.separation;
        d.geometric = (root.multiplicity >= 2 && d.identity_defect <= d.identity_tol) ? 2 : 1;
    }
    d.diagonalizable = d.algebraic == d.geometric;
    return d;
}

/// Index k of a root's window: 2j periodic, 2j+1 antiperiodic, j otherwise.
inline int k_index(SpectrumSet s, const Root& r)
{
    switch (s) {
    case SpectrumSet::periodic: return 2 * r.window;
    case SpectrumSet::antiperiodic: return 2 * r.window + 1;
    default: return r.window;
    }
}

/// CSV rows: set, k, re E, im E, multiplicity, residual.
inline void write_catalog_csv(std::ostream& os, const SpectrumCatalog& cat)
{
    io::csv_row(os, {"set", "k", "re_E", "im_E", "multiplicity", "residual"});
    for (auto s : {SpectrumSet::periodic, SpectrumSet::antiperiodic, SpectrumSet::dirichlet,
                   SpectrumSet::critical}) {
        for (const auto& r : cat.get(s))
            io::csv_row(os, {set_name(s), std::to_string(k_index(s, r)), io::fmt(r.location.real()),
                             io::fmt(r.location.imag()), std::to_string(r.multiplicity),
                             io::fmt(r.residual)});
    }
}

}  // namespace hill
