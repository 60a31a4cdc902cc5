#pragma once

// sigma(H) = { lambda : Delta_+(lambda) in [-1, 1] } as a system of arcs
// lambda(t), t in [0, pi], solving Delta_+(lambda(t)) = cos t.  Each arc is
// traced by predictor-corrector continuation from a periodic root (t = 0) to
// an antiperiodic root (t = pi).  Close to a critical point delta of Delta_+
// the local model
//
//     Delta_+(lambda) ~ w + a (lambda - delta)^2,   w = Delta_+(delta),
//
// takes over.  When w = cos t* for an interior t*, two arcs meet at delta and
// leave in the perpendicular direction; the continuation is ambiguous there
// and both outgoing branches are traced.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <vector>

#include "hillspec/io.hpp"
#include "hillspec/monodromy.hpp"
#include "hillspec/parallel.hpp"
#include "hillspec/spectra.hpp"

namespace hill {

struct ArcSample {
    double t = 0.0;
    cplx lambda{};
};

/// Where an arc ends: a catalog root (periodic at t = 0, antiperiodic at
/// t = pi) or a junction.
struct ArcEndpoint {
    enum class Kind { none, root, junction } kind = Kind::none;
    int index = -1;           // into catalog periodic/antiperiodic, or junctions
    double distance = 0.0;    // to the referenced point
};

struct SpectralArc {
    int band_index = -1;
    std::vector<ArcSample> samples;
    ArcEndpoint start, end;
    std::vector<std::size_t> singular_flags;

    bool is_singular(std::size_t i) const
    {
        return std::find(singular_flags.begin(), singular_flags.end(), i) != singular_flags.end();
    }
};

/// Critical point of Delta_+ lying on sigma(H).
struct Junction {
    cplx delta{};
    double t_star = 0.0;
    cplx w{};        // Delta_+(delta)
    cplx ddot{};     // Delta_+''(delta)
    bool interior = false;  // 0 < t* < pi
    double separation = 0.0;  // of the merged catalog pair, for closed gaps at resolution
};

struct Intersection {
    cplx lambda{};
    std::vector<int> arcs;
};

struct ArcDiagram {
    std::vector<SpectralArc> arcs;
    std::vector<Intersection> intersections;
    std::vector<Intersection> unresolved;   // near misses below the resolution of the scan
    std::vector<Junction> junctions;
    double truncation_bound = 0.0;
    Potential potential;
    double tol = default_tol;
};

/// The continuation cannot choose between the two branches leaving a
/// junction.  Carries the arc up to and including the junction.
class BranchAmbiguity : public NumericalError {
public:
    BranchAmbiguity(SpectralArc partial, Junction j, std::array<cplx, 2> candidates)
        : NumericalError("branch ambiguity at junction lambda=" + to_string(j.delta) +
                         ", t=" + std::to_string(j.t_star) + ": candidates " +
                         to_string(candidates[0]) + " and " + to_string(candidates[1])),
          partial_(std::move(partial)), junction_(j), candidates_(candidates)
    {
    }

    const SpectralArc& partial() const noexcept { return partial_; }
    const Junction& junction() const noexcept { return junction_; }
    const std::array<cplx, 2>& candidates() const noexcept { return candidates_; }

private:
    SpectralArc partial_;
    Junction junction_;
    std::array<cplx, 2> candidates_;
};

struct ArcOptions {
    int steps = 64;
    double tol = default_tol;
    double residual_tol = 1e-11;      // corrector target, relative to 1 + |lambda|
    double accept_tol = 1e-9;         // hard acceptance bound for a corrected point
    int workers = 1;
};

namespace detail {

inline double singular_threshold(cplx lambda)
{
    return 1e-5 / std::sqrt(1.0 + std::abs(lambda));
}

/// |Delta_+ -+ 1| below this at a critical point is a closed gap.
inline constexpr double edge_tol = 1e-10;

struct LocalModel {
    cplx delta{}, w{}, a{};    // Delta_+ ~ w + a (lambda - delta)^2
    cplx sq(double t) const
    {
        const double c = std::cos(t);
        if (std::abs(c - w) <= edge_tol)
            return 0.0;
        return std::sqrt((c - w) / a);
    }
    std::optional<double> t_star() const
    {
        if (std::abs(w.imag()) > 1e-9 * (1.0 + std::abs(w)))
            return std::nullopt;
        const double re = w.real();
        if (std::abs(re - 1.0) <= edge_tol)
            return 0.0;
        if (std::abs(re + 1.0) <= edge_tol)
            return std::numbers::pi;
        if (std::abs(re) > 1.0)
            return std::nullopt;
        return std::acos(re);
    }
};

class Tracer {
public:
    Tracer(const Potential& p, const ArcOptions& o) : p_(p), o_(o) {}

    DiscriminantSample eval(cplx z, int order = 3) const
    {
        return integrate_fundamental(p_, z, o_.tol, order);
    }

    /// Critical point near z by Newton on Delta_+'.
    std::optional<LocalModel> local_model(cplx z) const
    {
        cplx d = z;
        DiscriminantSample s = eval(d);
        for (int it = 0; it < 30; ++it) {
            const cplx dd = s.delta_plus_derivative(2);
            if (dd == cplx{})
                return std::nullopt;
            const cplx step = s.delta_plus_dot / dd;
            d -= step;
            s = eval(d);
            if (std::abs(step) < 1e-14 * (1.0 + std::abs(d)))
                break;
        }
        if (std::abs(s.delta_plus_dot) > 1e-9 * std::abs(s.delta_plus_derivative(2)) * (1.0 + std::abs(d)))
            return std::nullopt;
        return LocalModel{d, s.delta_plus, 0.5 * s.delta_plus_derivative(2)};
    }

    /// The model is trusted at (t, lambda) when lambda is one of its two
    /// roots to a small fraction of their distance from delta.
    static std::optional<int> model_sign(const LocalModel& m, double t, cplx lambda, double frac)
    {
        const cplx r = m.sq(t);
        const double scale = std::abs(r);
        for (int sgn : {1, -1}) {
            if (std::abs(lambda - (m.delta + static_cast<double>(sgn) * r)) <= frac * scale + 1e-12 * (1.0 + std::abs(lambda)))
                return sgn;
        }
        return std::nullopt;
    }

    /// Newton on Delta_+ - cos t from `pred`.
    std::optional<std::pair<cplx, DiscriminantSample>> correct(cplx pred, double t) const
    {
        const double c = std::cos(t);
        cplx z = pred;
        for (int it = 0; it < 12; ++it) {
            const auto s = eval(z, 1);
            const cplx g = s.delta_plus - c;
            const double scale = 1.0 + std::abs(z);
            if (std::abs(g) <= o_.residual_tol * scale)
                return std::make_pair(z, eval(z));
            if (s.delta_plus_dot == cplx{})
                return std::nullopt;
            const cplx step = g / s.delta_plus_dot;
            z -= step;
            if (!std::isfinite(std::abs(z)))
                return std::nullopt;
            if (std::abs(step) < 1e-14 * scale) {
                const auto s2 = eval(z);
                if (std::abs(s2.delta_plus - c) <= o_.accept_tol * scale)
                    return std::make_pair(z, s2);
                return std::nullopt;
            }
        }
        const auto s = eval(z);
        if (std::abs(s.delta_plus - c) <= o_.accept_tol * (1.0 + std::abs(z)))
            return std::make_pair(z, s);
        return std::nullopt;
    }

    /// Continues from (t0, lambda0) to t = pi, recording every grid point
    /// after t0.  `forced` fixes the model branch for the first step when
    /// starting at a double root or junction.
    SpectralArc run(SpectralArc arc, double t0, cplx lambda0, std::optional<LocalModel> model,
                    std::optional<int> forced) const
    {
        const double pi = std::numbers::pi;
        double t = t0;
        cplx lam = lambda0;
        DiscriminantSample s = eval(lam);
        cplx prev_dir{};  // last tangent, for continuity checks

        std::vector<double> grid;
        for (int i = 1; i <= o_.steps; ++i) {
            const double ti = pi * i / o_.steps;
            if (ti > t0 + 1e-12)
                grid.push_back(ti);
        }

        for (double target : grid) {
            double h = target - t;
            int halvings = 0;
            while (t < target - 1e-15) {
                h = std::min(h, target - t);
                // refresh the local model when a critical point is close
                if (!forced) {
                    const cplx dd = s.delta_plus_derivative(2);
                    if (dd != cplx{}) {
                        const cplx d0 = lam - s.delta_plus_dot / dd;
                        const cplx d3 = s.delta_plus_derivative(3);
                        const double reach = d3 == cplx{} ? 1.0 : 0.5 * std::abs(dd / d3);
                        if (std::abs(d0 - lam) < reach &&
                            (!model || std::abs(model->delta - d0) > 1e-6 * (1.0 + std::abs(d0)))) {
                            model = local_model(d0);
                        }
                    }
                }
                std::optional<int> sign = forced;
                if (!sign && model)
                    sign = model_sign(*model, t, lam, 0.1);

                // a junction inside this step: land on it
                if (model && sign) {
                    const auto ts = model->t_star();
                    if (ts && *ts > t + 1e-12 && *ts <= t + h + 1e-12) {
                        const Junction j{model->delta, *ts, model->w, 2.0 * model->a,
                                         *ts < pi - 1e-12};
                        arc.samples.push_back({*ts, model->delta});
                        arc.singular_flags.push_back(arc.samples.size() - 1);
                        if (!j.interior) {
                            arc.end.kind = ArcEndpoint::Kind::none;
                            return arc;
                        }
                        double tn = pi;
                        for (double g : grid)
                            if (g > *ts + 1e-12) {
                                tn = g;
                                break;
                            }
                        const cplx r = model->sq(tn);
                        throw BranchAmbiguity(arc, j, {model->delta + r, model->delta - r});
                    }
                }

                const double tn = t + h;
                std::vector<cplx> preds;
                std::optional<int> branch;  // model branch continuous with the current point
                if (!forced) {
                    // Taylor predictor, kept inside the distance to the nearest critical point
                    const cplx d1 = s.delta_plus_dot;
                    const cplx d2 = s.delta_plus_derivative(2);
                    const cplx l1 = -std::sin(t) / d1;
                    const cplx l2 = (-std::cos(t) - d2 * l1 * l1) / d1;
                    const cplx pt = lam + l1 * h + 0.5 * l2 * h * h;
                    if (d2 == cplx{} || std::abs(pt - lam) <= 0.5 * std::abs(d1 / d2))
                        preds.push_back(pt);
                }
                if (model && sign) {
                    // model predictor on the branch continuous with the current point
                    const cplx r_new = model->sq(tn);
                    int sg = *sign;
                    if (!forced) {
                        // follow the square root along [t, tn]
                        cplx r = static_cast<double>(*sign) * model->sq(t);
                        for (int k = 1; k <= 16; ++k) {
                            cplx rk = model->sq(t + h * k / 16.0);
                            if (std::abs(rk - r) > std::abs(rk + r))
                                rk = -rk;
                            r = rk;
                        }
                        sg = std::abs(r - r_new) <= std::abs(r + r_new) ? 1 : -1;
                    }
                    if (std::abs(r_new) > 0.0)
                        branch = sg;
                    const cplx pm = model->delta + static_cast<double>(sg) * r_new;
                    if (model_sign(*model, t, lam, 0.02))
                        preds.insert(preds.begin(), pm);
                    else
                        preds.push_back(pm);
                }
                std::optional<std::pair<cplx, DiscriminantSample>> accepted;
                for (const cplx pred : preds) {
                    if (!std::isfinite(std::abs(pred)))
                        continue;
                    auto corr = correct(pred, tn);
                    if (!corr)
                        continue;
                    const double moved = std::abs(corr->first - pred);
                    const double stride = std::abs(pred - lam);
                    if (moved > 0.3 * stride + 1e-9 * (1.0 + std::abs(lam)))
                        continue;
                    // no backtracking
                    const cplx dir = corr->first - lam;
                    if (prev_dir != cplx{} && (dir * std::conj(prev_dir)).real() <= 0.0)
                        continue;
                    // no jumping to the mirrored root across a narrow gap
                    if (branch) {
                        const auto got = model_sign(*model, tn, corr->first, 0.1);
                        if (got && *got != *branch)
                            continue;
                    }
                    accepted = std::move(corr);
                    break;
                }
                if (!accepted) {
                    h *= 0.5;
                    if (++halvings > 40)
                        throw ContinuationError(t, lam, "corrector failed to converge");
                    continue;
                }
                const auto& corr = accepted;
                prev_dir = corr->first - lam;
                lam = corr->first;
                s = corr->second;
                t = tn;
                h = std::min(2.0 * h, target - t);
                forced.reset();
                halvings = 0;
            }
            arc.samples.push_back({target, lam});
            if (std::abs(s.delta_plus_dot) < singular_threshold(lam))
                arc.singular_flags.push_back(arc.samples.size() - 1);
        }
        return arc;
    }

private:
    const Potential& p_;
    ArcOptions o_;
};

}  // namespace detail

/// Arcs leaving a periodic root: one for a simple root, two (both branches
/// of the local model) for a double root.
inline std::vector<SpectralArc> trace_arc(const Potential& p, const Root& start,
                                          const ArcOptions& o = {})
{
    if (o.steps < 16)
        throw InvalidInput("arc continuation needs at least 16 steps");
    detail::Tracer tr(p, o);
    const auto s0 = tr.eval(start.location);
    if (std::abs(s0.delta_plus - 1.0) > 1e-6 * (1.0 + std::abs(start.location)))
        throw InvalidInput("arc start " + to_string(start.location) + " is not a periodic root");

    std::vector<SpectralArc> out;
    if (start.multiplicity == 1) {
        SpectralArc arc;
        arc.samples.push_back({0.0, start.location});
        arc.start.kind = ArcEndpoint::Kind::root;
        out.push_back(tr.run(std::move(arc), 0.0, start.location, std::nullopt, std::nullopt));
        return out;
    }
    if (start.multiplicity != 2)
        throw ContinuationError(0.0, start.location,
                                "periodic root of multiplicity " + std::to_string(start.multiplicity));
    const auto model = tr.local_model(start.location);
    if (!model)
        throw ContinuationError(0.0, start.location, "no critical point at the double root");
    for (int sgn : {1, -1}) {
        SpectralArc arc;
        const cplx l0 = model->delta + static_cast<double>(sgn) * model->sq(0.0);
        arc.samples.push_back({0.0, l0});
        arc.singular_flags.push_back(0);
        arc.start.kind = ArcEndpoint::Kind::root;
        out.push_back(tr.run(std::move(arc), 0.0, l0, model, sgn));
    }
    return out;
}

namespace detail {

inline double seg_point_distance(cplx a, cplx b, cplx w, double* u_out = nullptr)
{
    const cplx d = b - a;
    const double len2 = std::norm(d);
    double u = len2 > 0.0 ? ((w - a) * std::conj(d)).real() / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    if (u_out)
        *u_out = u;
    return std::abs(a + u * d - w);
}

inline double seg_seg_distance(cplx a, cplx b, cplx c, cplx d)
{
    // proper crossing
    auto cross = [](cplx u, cplx v) { return u.real() * v.imag() - u.imag() * v.real(); };
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return 0.0;
    return std::min({seg_point_distance(a, b, c), seg_point_distance(a, b, d),
                     seg_point_distance(c, d, a), seg_point_distance(c, d, b)});
}

inline void link_endpoints(SpectralArc& arc, const SpectrumCatalog& cat,
                           const std::vector<Junction>& junctions)
{
    auto nearest = [](const std::vector<Root>& roots, cplx z, ArcEndpoint& e) {
        for (std::size_t i = 0; i < roots.size(); ++i) {
            const double d = std::abs(roots[i].location - z);
            const double tol = 1e-6 * (1.0 + std::abs(z)) + roots[i].separation;
            if (d <= tol && (e.kind != ArcEndpoint::Kind::root || d < e.distance)) {
                e.kind = ArcEndpoint::Kind::root;
                e.index = static_cast<int>(i);
                e.distance = d;
            }
        }
    };
    auto at_junction = [&](cplx z, ArcEndpoint& e) {
        for (std::size_t i = 0; i < junctions.size(); ++i) {
            if (junctions[i].interior &&
                std::abs(junctions[i].delta - z) <= 1e-9 * (1.0 + std::abs(z))) {
                e = {ArcEndpoint::Kind::junction, static_cast<int>(i), 0.0};
                return true;
            }
        }
        return false;
    };
    const auto& first = arc.samples.front();
    const auto& last = arc.samples.back();
    arc.start = {};
    arc.end = {};
    if (first.t == 0.0)
        nearest(cat.periodic, first.lambda, arc.start);
    else
        at_junction(first.lambda, arc.start);
    if (last.t >= std::numbers::pi - 1e-12)
        nearest(cat.antiperiodic, last.lambda, arc.end);
    else
        at_junction(last.lambda, arc.end);
}

}  // namespace detail

/// Traces every arc starting at a periodic root that can reach |lambda| <=
/// truncation_bound, resolving junctions by tracing both outgoing branches,
/// then scans for intersections.
inline ArcDiagram build_diagram(const Potential& p, const SpectrumCatalog& cat,
                                double truncation_bound, const ArcOptions& o = {})
{
    const double root_b = std::sqrt(std::max(truncation_bound, 0.0));
    const double need = (root_b + 1.0) * (root_b + 1.0);
    if (cat.periodic.empty() || cat.antiperiodic.empty())
        throw InvalidInput("catalog lacks periodic or antiperiodic roots");
    if (cat.covered_bound < need)
        throw InvalidInput("catalog covers real parts up to " + std::to_string(cat.covered_bound) +
                           ", need " + std::to_string(need) + " for truncation bound " +
                           std::to_string(truncation_bound));
    const double start_limit = (root_b + 2.0) * (root_b + 2.0);

    ArcDiagram dg;
    dg.truncation_bound = truncation_bound;
    dg.potential = p;
    dg.tol = o.tol;
    detail::Tracer tr(p, o);

    struct Task {
        std::optional<Root> root;               // start at a periodic root
        std::optional<Junction> junction;       // or leave a junction
        int sign = 1;
    };
    struct Outcome {
        std::vector<SpectralArc> arcs;
        std::vector<BranchAmbiguity> ambiguities;
    };

    std::vector<Task> tasks;
    for (const auto& r : cat.periodic)
        if (r.location.real() <= start_limit)
            tasks.push_back({r, std::nullopt, 1});

    for (int round = 0; !tasks.empty(); ++round) {
        if (round > 64)
            throw ContinuationError(0.0, {}, "junction cascade did not terminate");
        std::vector<Outcome> res(tasks.size());
        parallel_for(tasks.size(), o.workers, [&](std::size_t i) {
            const auto& task = tasks[i];
            auto run_one = [&](auto&& fn) {
                try {
                    fn();
                } catch (const BranchAmbiguity& b) {
                    res[i].ambiguities.push_back(b);
                }
            };
            if (task.root) {
                const Root& r = *task.root;
                if (r.multiplicity == 1) {
                    run_one([&] {
                        for (auto& a : trace_arc(p, r, o))
                            res[i].arcs.push_back(std::move(a));
                    });
                } else {
                    const auto model = tr.local_model(r.location);
                    if (!model)
                        throw ContinuationError(0.0, r.location, "no critical point at a double root");
                    for (int sgn : {1, -1}) {
                        run_one([&] {
                            SpectralArc arc;
                            const cplx l0 = model->delta + static_cast<double>(sgn) * model->sq(0.0);
                            arc.samples.push_back({0.0, l0});
                            arc.singular_flags.push_back(0);
                            res[i].arcs.push_back(tr.run(std::move(arc), 0.0, l0, model, sgn));
                        });
                    }
                }
            } else {
                const Junction& j = *task.junction;
                run_one([&] {
                    SpectralArc arc;
                    arc.samples.push_back({j.t_star, j.delta});
                    arc.singular_flags.push_back(0);
                    detail::LocalModel m{j.delta, j.w, 0.5 * j.ddot};
                    res[i].arcs.push_back(tr.run(std::move(arc), j.t_star, j.delta, m, task.sign));
                });
            }
        });
        std::vector<Task> next;
        for (auto& r : res) {
            for (auto& a : r.arcs)
                dg.arcs.push_back(std::move(a));
            for (auto& b : r.ambiguities) {
                dg.arcs.push_back(b.partial());
                const auto& j = b.junction();
                const bool seen = std::any_of(dg.junctions.begin(), dg.junctions.end(), [&](const Junction& x) {
                    return std::abs(x.delta - j.delta) <= 1e-6 * (1.0 + std::abs(j.delta));
                });
                if (!seen) {
                    dg.junctions.push_back(j);
                    next.push_back({std::nullopt, j, 1});
                    next.push_back({std::nullopt, j, -1});
                }
            }
        }
        tasks = std::move(next);
    }

    // critical points on the spectrum at arc ends (closed gaps) are junctions too
    for (const auto& a : dg.arcs) {
        for (std::size_t f : a.singular_flags) {
            const auto& smp = a.samples[f];
            const bool edge = smp.t == 0.0 || smp.t >= std::numbers::pi - 1e-12;
            if (!edge)
                continue;
            const auto s = tr.eval(smp.lambda);
            if (std::abs(s.delta_plus_dot) > 1e-6 * (1.0 + std::abs(smp.lambda)))
                continue;
            const bool seen = std::any_of(dg.junctions.begin(), dg.junctions.end(), [&](const Junction& x) {
                return std::abs(x.delta - smp.lambda) <= 1e-6 * (1.0 + std::abs(smp.lambda));
            });
            if (!seen) {
                Junction j{smp.lambda, smp.t, s.delta_plus, s.delta_plus_derivative(2), false, 0.0};
                for (const auto& r : smp.t == 0.0 ? cat.periodic : cat.antiperiodic)
                    if (r.multiplicity >= 2 &&
                        std::abs(r.location - smp.lambda) <= 1e-6 * (1.0 + std::abs(smp.lambda)) + r.separation)
                        j.separation = r.separation;
                dg.junctions.push_back(j);
            }
        }
    }

    std::sort(dg.arcs.begin(), dg.arcs.end(), [](const SpectralArc& a, const SpectralArc& b) {
        const auto& sa = a.samples.front();
        const auto& sb = b.samples.front();
        if (sa.t != sb.t)
            return sa.t < sb.t;
        if (sa.lambda.real() != sb.lambda.real())
            return sa.lambda.real() < sb.lambda.real();
        if (sa.lambda.imag() != sb.lambda.imag())
            return sa.lambda.imag() < sb.lambda.imag();
        return a.samples.back().lambda.real() < b.samples.back().lambda.real();
    });
    for (std::size_t i = 0; i < dg.arcs.size(); ++i) {
        dg.arcs[i].band_index = static_cast<int>(i);
        detail::link_endpoints(dg.arcs[i], cat, dg.junctions);
    }

    // interior junctions are intersections of the incident arcs
    for (std::size_t jn = 0; jn < dg.junctions.size(); ++jn) {
        const auto& j = dg.junctions[jn];
        if (!j.interior)
            continue;
        Intersection x{j.delta, {}};
        for (std::size_t i = 0; i < dg.arcs.size(); ++i) {
            const auto& a = dg.arcs[i];
            if ((a.start.kind == ArcEndpoint::Kind::junction && a.start.index == static_cast<int>(jn)) ||
                (a.end.kind == ArcEndpoint::Kind::junction && a.end.index == static_cast<int>(jn)))
                x.arcs.push_back(static_cast<int>(i));
        }
        dg.intersections.push_back(x);
    }

    // geometric scan away from shared endpoints
    for (std::size_t i = 0; i < dg.arcs.size(); ++i) {
        for (std::size_t k = i + 1; k < dg.arcs.size(); ++k) {
            const auto& A = dg.arcs[i].samples;
            const auto& B = dg.arcs[k].samples;
            std::vector<cplx> shared;
            for (cplx ea : {A.front().lambda, A.back().lambda})
                for (cplx eb : {B.front().lambda, B.back().lambda})
                    if (std::abs(ea - eb) <= 1e-5 * (1.0 + std::abs(ea)))
                        shared.push_back(ea);
            double best = 1e300;
            cplx where{};
            bool at_end = false;
            for (std::size_t u = 0; u + 1 < A.size(); ++u) {
                for (std::size_t v = 0; v + 1 < B.size(); ++v) {
                    const double d = detail::seg_seg_distance(A[u].lambda, A[u + 1].lambda,
                                                              B[v].lambda, B[v + 1].lambda);
                    if (d >= best)
                        continue;
                    const cplx mid = 0.5 * (A[u].lambda + A[u + 1].lambda);
                    // ignore contacts at shared endpoints
                    bool near_shared = false;
                    for (cplx sp : shared) {
                        if (std::min(std::abs(A[u].lambda - sp), std::abs(A[u + 1].lambda - sp)) <= 1e-5 * (1.0 + std::abs(sp)) &&
                            std::min(std::abs(B[v].lambda - sp), std::abs(B[v + 1].lambda - sp)) <= 1e-5 * (1.0 + std::abs(sp)))
                            near_shared = true;
                    }
                    if (near_shared)
                        continue;
                    best = d;
                    where = mid;
                    at_end = u == 0 || v == 0 || u + 2 == A.size() || v + 2 == B.size();
                }
            }
            if (best <= 1e-6 * (1.0 + std::abs(where))) {
                const bool known = std::any_of(dg.intersections.begin(), dg.intersections.end(), [&](const Intersection& x) {
                    return std::abs(x.lambda - where) <= 1e-3 * (1.0 + std::abs(where));
                });
                if (!known) {
                    // crossings sit at critical points
                    try {
                        const Root r = refine_root(critical_fn(p, o.tol), where);
                        if (std::abs(r.location - where) <= 1e-3 * (1.0 + std::abs(where)))
                            where = r.location;
                    } catch (const NumericalError&) {
                    }
                    dg.intersections.push_back({where, {static_cast<int>(i), static_cast<int>(k)}});
                }
            } else if (!at_end && best <= 1e-4 * (1.0 + std::abs(where))) {
                dg.unresolved.push_back({where, {static_cast<int>(i), static_cast<int>(k)}});
            }
        }
    }
    return dg;
}

/// Solves Delta_+(lambda) = cos t near `guess`.
inline std::optional<cplx> solve_on_arc(const Potential& p, double t, cplx guess, double tol = default_tol)
{
    const double c = std::cos(t);
    cplx z = guess;
    for (int it = 0; it < 30; ++it) {
        const auto s = integrate_fundamental(p, z, tol, 1);
        const cplx g = s.delta_plus - c;
        if (std::abs(g) <= 1e-12 * (1.0 + std::abs(z)))
            return z;
        if (s.delta_plus_dot == cplx{})
            break;
        cplx step = g / s.delta_plus_dot;
        // keep the iterate near the guess (double roots at arc ends)
        const double cap = 0.5 * (1.0 + std::abs(guess - z));
        if (std::abs(step) > cap)
            step *= cap / std::abs(step);
        z -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(z)))
            break;
    }
    const auto s = integrate_fundamental(p, z, tol, 1);
    if (std::abs(s.delta_plus - c) <= 1e-8 * (1.0 + std::abs(z)))
        return z;
    return std::nullopt;
}

/// Distance from w to the traced spectrum: nearest polyline point, refined
/// by a golden-section search in t on the nearest arc.
inline double distance_to_spectrum(const ArcDiagram& dg, cplx w)
{
    if (dg.arcs.empty())
        throw InvalidInput("empty arc diagram");
    if (std::abs(w) > dg.truncation_bound + 1e-12)
        throw InvalidInput("point " + to_string(w) + " lies beyond the truncation bound");
    double best = 1e300;
    std::size_t ba = 0, bs = 0;
    for (std::size_t a = 0; a < dg.arcs.size(); ++a) {
        const auto& S = dg.arcs[a].samples;
        for (std::size_t i = 0; i < S.size(); ++i) {
            const double d = i + 1 < S.size() ? detail::seg_point_distance(S[i].lambda, S[i + 1].lambda, w)
                                              : std::abs(S[i].lambda - w);
            if (d < best) {
                best = d;
                ba = a;
                bs = i;
            }
        }
    }
    const auto& S = dg.arcs[ba].samples;
    if (best == 0.0)
        return 0.0;
    // golden section on [t_{i-1}, t_{i+1}]
    const std::size_t lo = bs > 0 ? bs - 1 : 0;
    const std::size_t hi = std::min(bs + 1 + (bs + 1 < S.size() ? 1 : 0), S.size() - 1);
    auto lam_at = [&](double t) -> std::optional<cplx> {
        std::size_t k = lo;
        while (k + 1 < hi && S[k + 1].t < t)
            ++k;
        const double span = S[k + 1].t - S[k].t;
        const double u = span > 0 ? (t - S[k].t) / span : 0.0;
        const cplx guess = S[k].lambda + u * (S[k + 1].lambda - S[k].lambda);
        return solve_on_arc(dg.potential, t, guess, dg.tol);
    };
    if (hi == lo)
        return best;
    double a = S[lo].t, b = S[hi].t;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    auto dist = [&](double t) {
        const auto l = lam_at(t);
        return l ? std::abs(*l - w) : 1e300;
    };
    double fc = dist(c), fd = dist(d);
    for (int it = 0; it < 60 && b - a > 1e-12; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = dist(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = dist(d);
        }
    }
    const double endpoints = std::min(std::abs(S[lo].lambda - w), std::abs(S[hi].lambda - w));
    return std::min({best, fc, fd, endpoints});
}

/// Polyline export: band_index, t, re lambda, im lambda, singular_flag.
inline void write_arcs_csv(std::ostream& os, const ArcDiagram& dg)
{
    io::csv_row(os, {"band_index", "t", "re_lambda", "im_lambda", "singular_flag"});
    for (const auto& a : dg.arcs)
        for (std::size_t i = 0; i < a.samples.size(); ++i)
            io::csv_row(os, {std::to_string(a.band_index), io::fmt(a.samples[i].t),
                             io::fmt(a.samples[i].lambda.real()), io::fmt(a.samples[i].lambda.imag()),
                             a.is_singular(i) ? "1" : "0"});
}

}  // namespace hill
