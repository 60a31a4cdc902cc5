#pragma once

// Zeros of entire functions built from monodromy data: argument-principle
// counting on rectangles, guarded Newton refinement, and recursive
// isolation.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hillspec/detail/quadrature.hpp"
#include "hillspec/errors.hpp"

namespace hill {

/// f and its first derivatives at one point; d[k] valid for k <= order.
struct Jet {
    std::array<cplx, 4> d{};
    int order = 0;
    cplx operator[](int k) const { return d[static_cast<std::size_t>(k)]; }
};

/// An entire function with derivatives available up to max_order.
struct AnalyticFn {
    std::function<Jet(cplx z, int order)> eval;
    int max_order = 1;
    std::string tag;
    std::function<Jet(cplx z, int order)> fine;  // tighter-tolerance variant, optional

    Jet operator()(cplx z, int order) const { return eval(z, order); }
    Jet precise(cplx z, int order) const { return fine ? fine(z, order) : eval(z, order); }
};

struct Rect {
    double re_lo = 0.0, re_hi = 0.0, im_lo = 0.0, im_hi = 0.0;

    static Rect around(cplx c, double half) { return {c.real() - half, c.real() + half, c.imag() - half, c.imag() + half}; }

    double width() const { return re_hi - re_lo; }
    double height() const { return im_hi - im_lo; }
    double diameter() const { return std::hypot(width(), height()); }
    cplx center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
    bool contains(cplx z) const
    {
        return z.real() >= re_lo && z.real() <= re_hi && z.imag() >= im_lo && z.imag() <= im_hi;
    }
    Rect dilated(double factor) const
    {
        const double hw = 0.5 * width() * factor, hh = 0.5 * height() * factor;
        const cplx c = center();
        return {c.real() - hw, c.real() + hw, c.imag() - hh, c.imag() + hh};
    }
    std::string describe() const
    {
        return "[" + std::to_string(re_lo) + "," + std::to_string(re_hi) + "]x[" +
               std::to_string(im_lo) + "," + std::to_string(im_hi) + "]i";
    }
};

struct Root {
    cplx location{};
    int multiplicity = 1;
    double residual = 0.0;
    std::string function_tag;
    int window = -1;
    bool near_degenerate = false;  // merged pair below the clustering threshold
    double separation = 0.0;       // estimated spread of a merged cluster
};

struct RootOptions {
    double cluster_tol = 1e-6;       // relative, times (1+|E|)
    double residual_tol = 1e-8;      // relative, times (1+|E|)
    int newton_max_iter = 50;
    int max_panels = 1024;           // per rectangle side
    double boundary_ratio = 1e-3;    // min|f| / median|f| on the contour
    int max_dilations = 5;
    int max_depth = 80;
};

struct WindingResult {
    int count = 0;
    double raw_real = 0.0;
    double raw_imag = 0.0;
    Rect rect;
    int panels = 0;
};

namespace detail {

/// (1/2 pi i) integral of f'/f along the segment a -> b with `panels`
/// composite 8-point Gauss-Legendre panels; |f| at the nodes is appended to
/// `magnitudes` when given.
inline cplx segment_log_derivative(const AnalyticFn& f, cplx a, cplx b, int panels,
                                   std::vector<double>* magnitudes)
{
    const auto& g = gauss_legendre(8);
    const cplx step = (b - a) / static_cast<double>(panels);
    cplx acc{};
    for (int k = 0; k < panels; ++k) {
        const cplx mid = a + (k + 0.5) * step;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const cplx z = mid + 0.5 * g.nodes[i] * step;
            const Jet j = f(z, 1);
            if (magnitudes)
                magnitudes->push_back(std::abs(j[0]));
            acc += g.weights[i] * j[1] / j[0];
        }
    }
    return acc * 0.5 * step / cplx(0.0, 2.0 * std::numbers::pi);
}

inline double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

struct BoundaryZero : WindingError {
    BoundaryZero() : WindingError("zero on or near the contour") {}
};

/// Winding count on one rectangle, no dilation.  Throws BoundaryZero when
/// |f| nearly vanishes on the contour, WindingError on non-convergence.
inline WindingResult winding_fixed(const AnalyticFn& f, const Rect& r, const RootOptions& o)
{
    const std::array<cplx, 5> corners{cplx(r.re_lo, r.im_lo), cplx(r.re_hi, r.im_lo),
                                      cplx(r.re_hi, r.im_hi), cplx(r.re_lo, r.im_hi),
                                      cplx(r.re_lo, r.im_lo)};
    std::array<cplx, 4> coarse{};
    std::vector<double> mags;
    for (int s = 0; s < 4; ++s)
        coarse[static_cast<std::size_t>(s)] =
            segment_log_derivative(f, corners[static_cast<std::size_t>(s)],
                                   corners[static_cast<std::size_t>(s + 1)], 4, &mags);
    double lo = 1e300;
    for (double v : mags)
        lo = std::isfinite(v) ? std::min(lo, v) : lo;
    if (!(lo >= o.boundary_ratio * median(mags)))
        throw BoundaryZero{};

    cplx total{};
    int max_used = 0;
    for (int s = 0; s < 4; ++s) {
        int panels = 4;
        cplx prev = coarse[static_cast<std::size_t>(s)];
        bool converged = false;
        while (panels < o.max_panels) {
            panels *= 2;
            const cplx next = segment_log_derivative(f, corners[static_cast<std::size_t>(s)],
                                                     corners[static_cast<std::size_t>(s + 1)],
                                                     panels, nullptr);
            const bool ok = std::abs(next - prev) < 1e-4;
            prev = next;
            if (ok) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw WindingError("winding quadrature did not converge on " + r.describe());
        total += prev;
        max_used = std::max(max_used, panels);
    }
    const double rounded = std::round(total.real());
    if (std::abs(total.real() - rounded) > 0.05 || std::abs(total.imag()) > 0.05)
        throw WindingError("non-integer winding " + to_string(total) + " on " + r.describe());
    return {static_cast<int>(rounded), total.real(), total.imag(), r, max_used};
}

}  // namespace detail

/// Number of zeros of f inside rect, counted with multiplicity.  A rectangle
/// whose contour passes too close to a zero is dilated by 1% (up to
/// max_dilations times); the rectangle actually used is reported.
inline WindingResult count_zeros(const AnalyticFn& f, const Rect& rect, const RootOptions& o = {})
{
    if (!(rect.width() > 0.0 && rect.height() > 0.0))
        throw InvalidInput("degenerate rectangle " + rect.describe());
    Rect r = rect;
    std::string last;
    for (int attempt = 0; attempt <= o.max_dilations; ++attempt) {
        try {
            return detail::winding_fixed(f, r, o);
        } catch (const WindingError& e) {
            // a zero on the contour shows up as a small |f| sample or as a
            // half-integer principal value
            last = e.what();
            r = r.dilated(1.01);
        }
    }
    throw WindingError("no integer winding on " + rect.describe() + " after " +
                       std::to_string(o.max_dilations) + " dilations: " + last);
}

namespace detail {

/// Counts without dilation; nullopt when the contour is too close to a zero.
inline std::optional<int> try_count(const AnalyticFn& f, const Rect& r, const RootOptions& o)
{
    try {
        return winding_fixed(f, r, o).count;
    } catch (const BoundaryZero&) {
        return std::nullopt;
    } catch (const WindingError&) {
        return std::nullopt;
    }
}

struct NewtonResult {
    cplx z{};
    double residual = 0.0;
    bool converged = false;
};

/// Damped Newton on the derivative of order `k` of f (k = 0 is f itself).
/// Convergence is judged on the step length, the caller judges residuals.
inline NewtonResult guarded_newton(const AnalyticFn& f, cplx seed, int k, const RootOptions& o,
                                   const Rect* fence = nullptr)
{
    cplx z = seed;
    Jet j = f(z, k + 1);
    double fz = std::abs(j[k]);
    for (int iter = 0; iter < o.newton_max_iter; ++iter) {
        if (fz == 0.0)
            return {z, 0.0, true};
        const cplx d = j[k + 1];
        if (d == cplx{} || !std::isfinite(std::abs(d)))
            break;
        const cplx step = j[k] / d;
        double lambda = 1.0;
        bool accepted = false;
        cplx zn;
        Jet jn;
        for (int h = 0; h < 12; ++h) {
            zn = z - lambda * step;
            jn = f(zn, k + 1);
            const double fn = std::abs(jn[k]);
            if (std::isfinite(fn) && fn < fz * (1.0 - 0.25 * lambda)) {
                accepted = true;
                break;
            }
            if (std::isfinite(fn) && std::abs(lambda * step) < 1e-13 * (1.0 + std::abs(z)))
                break;
            lambda *= 0.5;
        }
        const double stepsize = std::abs(lambda * step);
        if (!accepted) {
            // stagnation at rounding level counts as converged
            const bool tiny = std::abs(step) < 1e-10 * (1.0 + std::abs(z));
            return {z, std::abs(j[0]), tiny};
        }
        z = zn;
        j = jn;
        fz = std::abs(j[k]);
        if (fence && !fence->contains(z))
            return {z, std::abs(j[0]), false};
        if (stepsize < 1e-14 * (1.0 + std::abs(z)))
            return {z, std::abs(f(z, 0)[0]), true};
    }
    const bool small = std::abs(j[k]) < 1e-12 * (1.0 + std::abs(z));
    return {z, std::abs(f(z, 0)[0]), small};
}

/// Schroeder's iteration z -= f f' / (f'^2 - f f''), quadratically
/// convergent at zeros of any multiplicity.
inline NewtonResult schroeder(const AnalyticFn& f, cplx seed, const RootOptions& o)
{
    cplx z = seed;
    for (int iter = 0; iter < o.newton_max_iter; ++iter) {
        const Jet j = f(z, 2);
        const cplx den = j[1] * j[1] - j[0] * j[2];
        if (den == cplx{})
            break;
        const cplx step = j[0] * j[1] / den;
        z -= step;
        if (std::abs(step) < 1e-14 * (1.0 + std::abs(z)))
            break;
    }
    return {z, std::abs(f(z, 0)[0]), true};
}

inline double scaled(double tol, cplx z) { return tol * (1.0 + std::abs(z)); }

}  // namespace detail

struct ClusterOutcome {
    bool resolved = false;
    std::vector<Root> roots;
};

/// Resolves `count` zeros of f known to lie in a small box around `center`.
/// Pairs closer than the clustering tolerance come back as one double root.
inline ClusterOutcome resolve_cluster(const AnalyticFn& f, cplx center, int count, double box_half,
                                      const RootOptions& o)
{
    ClusterOutcome out;
    if (count == 1) {
        Rect fence = Rect::around(center, box_half);
        const auto n = detail::guarded_newton(f, center, 0, o, &fence);
        if (!n.converged || !fence.contains(n.z) || n.residual > detail::scaled(o.residual_tol, n.z))
            return out;
        out.roots.push_back({n.z, 1, n.residual, f.tag});
        out.resolved = true;
        return out;
    }
    if (count == 2 && f.max_order >= 2) {
        const auto c = detail::guarded_newton(f, center, 1, o);
        if (!c.converged || std::abs(c.z - center) > 2.0 * box_half)
            return out;
        cplx c0 = c.z;
        Jet j = f.precise(c0, 2);
        for (int polish = 0; polish < 2 && j[2] != cplx{}; ++polish) {
            c0 -= j[1] / j[2];
            j = f.precise(c0, 2);
        }
        const cplx a = 0.5 * j[2];
        const cplx disc = a == cplx{} ? cplx{} : std::sqrt(-j[0] / a);
        const double sep = 2.0 * std::abs(disc);
        if (sep < detail::scaled(o.cluster_tol, c0)) {
            // the fine evaluation is about a hundred times more accurate than
            // the coarse one, which bounds the noise in the separation
            const double noise = std::abs(j[0] - f(c0, 0)[0]) * 1e-2 + 1e-15;
            const double sep_noise = std::abs(a) > 0.0 ? 2.0 * std::sqrt(noise / std::abs(a)) : 0.0;
            Root r{c0, 2, std::abs(j[0]), f.tag};
            r.separation = sep;
            r.near_degenerate = sep > 2.0 * sep_noise;
            if (r.residual > detail::scaled(o.residual_tol, c0))
                return out;
            out.roots.push_back(r);
            out.resolved = true;
            return out;
        }
        std::vector<Root> found;
        for (cplx cand : {c0 + disc, c0 - disc}) {
            const auto n = detail::guarded_newton(f, cand, 0, o);
            if (!n.converged || n.residual > detail::scaled(o.residual_tol, n.z))
                return out;
            found.push_back({n.z, 1, n.residual, f.tag});
        }
        const double d = std::abs(found[0].location - found[1].location);
        if (d < 0.5 * sep || std::abs(found[0].location - center) > 2.0 * box_half ||
            std::abs(found[1].location - center) > 2.0 * box_half)
            return out;
        // close pairs: confirm that each member is isolated
        if (d < 1e-3 * (1.0 + std::abs(c0))) {
            for (const auto& r : found) {
                const auto k = detail::try_count(f, Rect::around(r.location, 0.25 * d), o);
                if (!k || *k != 1)
                    return out;
            }
        }
        out.roots = std::move(found);
        out.resolved = true;
        return out;
    }
    // higher clusters: one point of multiplicity `count`
    detail::NewtonResult n;
    if (f.max_order >= count)
        n = detail::guarded_newton(f, center, count - 1, o);
    else
        n = detail::schroeder(f, center, o);
    if (!n.converged || std::abs(n.z - center) > 2.0 * box_half ||
        n.residual > detail::scaled(o.residual_tol, n.z))
        return out;
    out.roots.push_back({n.z, count, n.residual, f.tag});
    out.resolved = true;
    return out;
}

/// Newton refinement from a seed; the multiplicity is the winding count of
/// a small square around the converged point, after which clusters are
/// resolved (Newton on f^(m-1) for multiple zeros).
inline Root refine_root(const AnalyticFn& f, cplx seed, const RootOptions& o = {})
{
    const auto n = detail::guarded_newton(f, seed, 0, o);
    if (!std::isfinite(std::abs(n.z)))
        throw RootError(seed, "iteration diverged");
    double half = 1e-3 * (1.0 + std::sqrt(std::abs(n.z)));
    for (int shrink = 0; shrink < 6; ++shrink, half *= 0.25) {
        const auto k = detail::try_count(f, Rect::around(n.z, half), o);
        if (!k)
            continue;
        if (*k == 0)
            break;
        const auto c = resolve_cluster(f, n.z, *k, half, o);
        if (!c.resolved)
            continue;
        // report the member nearest the Newton limit
        Root best = c.roots.front();
        for (const auto& r : c.roots)
            if (std::abs(r.location - n.z) < std::abs(best.location - n.z))
                best = r;
        if (c.roots.size() > 1) {
            const auto kk = detail::try_count(f, Rect::around(best.location, 0.25 * std::abs(c.roots[0].location - c.roots[1].location)), o);
            if (kk)
                best.multiplicity = *kk;
        }
        return best;
    }
    throw RootError(seed, "no isolated zero near the Newton limit " + to_string(n.z) +
                              " (residual " + std::to_string(n.residual) + ")");
}

namespace detail {

inline void search_rect(const AnalyticFn& f, const Rect& r, int count, int depth,
                        const RootOptions& o, std::vector<Root>& out)
{
    if (count <= 0)
        return;
    if (depth > o.max_depth)
        throw CountShortfall("root isolation exceeded depth limit in " + r.describe() + " (" +
                             std::to_string(count) + " zeros unresolved)");
    const cplx c = r.center();
    const double small = 0.25 * (1.0 + std::sqrt(std::abs(c)));
    const double diam = r.diameter();
    if (count <= 2 || diam <= small) {
        const auto res = resolve_cluster(f, c, count, 0.5 * diam, o);
        const bool all_inside =
            res.resolved && std::all_of(res.roots.begin(), res.roots.end(),
                                        [&](const Root& x) { return r.contains(x.location); });
        if (all_inside) {
            for (const auto& x : res.roots)
                out.push_back(x);
            return;
        }
        if (diam < 1e-12 * (1.0 + std::abs(c))) {
            // cannot subdivide further: report the cluster as one point
            const auto n = schroeder(f, c, o);
            out.push_back({n.z, count, n.residual, f.tag});
            return;
        }
    }
    // split the longer side, avoiding cut lines through zeros
    static constexpr double fractions[] = {0.5137, 0.4561, 0.5723, 0.4029, 0.6217, 0.3511, 0.6689};
    const bool vertical = r.width() >= 0.5 * r.height();
    for (double fr : fractions) {
        Rect a = r, b = r;
        if (vertical) {
            const double x = r.re_lo + fr * r.width();
            a.re_hi = x;
            b.re_lo = x;
        } else {
            const double y = r.im_lo + fr * r.height();
            a.im_hi = y;
            b.im_lo = y;
        }
        const auto ka = try_count(f, a, o);
        if (!ka || *ka < 0 || *ka > count)
            continue;
        const int kb = count - *ka;
        search_rect(f, a, *ka, depth + 1, o, out);
        search_rect(f, b, kb, depth + 1, o, out);
        return;
    }
    throw WindingError("could not find a clean split of " + r.describe());
}

}  // namespace detail

/// Merges roots closer than the clustering tolerance into multiple roots.
inline std::vector<Root> merge_clusters(std::vector<Root> roots, const RootOptions& o)
{
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        return a.location.real() != b.location.real() ? a.location.real() < b.location.real()
                                                      : a.location.imag() < b.location.imag();
    });
    std::vector<Root> out;
    for (auto& r : roots) {
        bool merged = false;
        for (auto& m : out) {
            const double d = std::abs(m.location - r.location);
            if (d < detail::scaled(o.cluster_tol, m.location)) {
                const double wm = m.multiplicity, wr = r.multiplicity;
                m.location = (wm * m.location + wr * r.location) / (wm + wr);
                m.multiplicity += r.multiplicity;
                m.separation = std::max({m.separation, r.separation, d});
                m.near_degenerate = true;
                m.residual = std::max(m.residual, r.residual);
                merged = true;
                break;
            }
        }
        if (!merged)
            out.push_back(r);
    }
    return out;
}

/// All zeros in rect, counted by the argument principle and isolated by
/// recursive subdivision.  `expected`, when known, skips the first count.
inline std::vector<Root> find_roots(const AnalyticFn& f, const Rect& rect, const RootOptions& o = {},
                                    std::optional<int> expected = std::nullopt)
{
    const int total = expected ? *expected : detail::winding_fixed(f, rect, o).count;
    std::vector<Root> out;
    detail::search_rect(f, rect, total, 0, o, out);
    out = merge_clusters(std::move(out), o);
    int found = 0;
    for (const auto& r : out)
        found += r.multiplicity;
    if (found != total)
        throw CountShortfall("found " + std::to_string(found) + " of " + std::to_string(total) +
                             " zeros in " + rect.describe());
    return out;
}

}  // namespace hill
