#pragma once

// Desk-scale decisions on the three equivalent conditions for H to be a
// spectral operator of scalar type:
//
//   t1  the ratios |phi(l,pi)/D'|, |theta'(l,pi)/((|l|+1) D')|,
//       |D_-(l)/((sqrt|l|+1) D')| are bounded on sigma(H);
//   t2  (D_+^2 - 1 - D_-^2)/(phi(.,pi) D') is analytic near sigma(H) and the
//       first and third ratios are bounded;
//   t3  multiple periodic/antiperiodic points are Dirichlet points, every
//       root function of H(t) is diagonalizable with simple interior zeros,
//       and the gap/distance quotients over open gaps are bounded.
//
// D' is Delta_+ dot.  Boundedness on the infinite set sigma(H) is decided
// from the computed region |l| <= truncation_bound plus a tail certificate
// against the free-case limits.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hillspec/arcs.hpp"
#include "hillspec/monodromy.hpp"
#include "hillspec/roots.hpp"
#include "hillspec/spectra.hpp"

namespace hill {

enum class Verdict { pass, fail, inconclusive };

inline const char* verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct CriteriaThresholds {
    int samples_per_arc = 32;
    double removable_tol = 1e-7;     // numerator vanishing test at critical points
    double growth_factor = 4.0;      // per tripling of the sample density
    double tail_factor = 2.0;        // outer sup vs max(inner sup, free limit, ratio_floor)
    double ratio_floor = 1e-6;       // ratios below this are rounding noise
    double identity_tol = 1e-7;      // two evaluations of the t2 function
    int t_grid = 33;
    double dist_scale = 1e-6;        // Q membership: dist > dist_scale (1+|delta|)^(1/2)
    double unbounded_ratio = 1e6;    // t3 quotient treated as unbounded
};

/// Behaviour of the three ratios at a critical point lying on sigma(H).
struct SingularPoint {
    cplx delta{};
    double t_star = 0.0;
    int denominator_order = 1;
    std::array<bool, 3> removable{};
    std::array<double, 3> limit{};   // |ratio| limit when removable
};

struct T1Record {
    double sup_ratio_phi = 0.0, sup_ratio_theta = 0.0, sup_ratio_dminus = 0.0;
    std::array<cplx, 3> witnesses{};
    std::array<Verdict, 3> ratio_verdicts{Verdict::inconclusive, Verdict::inconclusive, Verdict::inconclusive};
    std::array<std::array<double, 3>, 3> level_sups{};   // [ratio][density level]
    std::array<double, 3> inner_sup{}, outer_sup{};
    std::array<bool, 3> tail_ok{};
    std::vector<SingularPoint> singular_points;
    std::size_t samples = 0;
    Verdict verdict = Verdict::inconclusive;
    std::string reason;

    double sup(int j) const { return j == 0 ? sup_ratio_phi : j == 1 ? sup_ratio_theta : sup_ratio_dminus; }
};

struct PoleCheck {
    cplx location{};
    int denominator_order = 0;
    int numerator_order = 0;
    bool pole() const { return numerator_order < denominator_order; }
};

struct T2Record {
    Verdict analyticity_verdict = Verdict::inconclusive;
    std::vector<PoleCheck> checked;      // every denominator zero inside the tube
    std::vector<cplx> pole_witnesses;
    double sup_ratio_phi = 0.0, sup_ratio_dminus = 0.0;
    Verdict estimates_verdict = Verdict::inconclusive;
    double identity_max_deviation = 0.0;
    double tube_scale = 0.0;
    Verdict verdict = Verdict::inconclusive;
    std::string reason;
};

struct MultipleOffender {
    cplx E{};
    double t = 0.0;
    int algebraic = 0, geometric = 0;
};

struct T3Record {
    Verdict cond_i = Verdict::inconclusive;
    std::vector<cplx> cond_i_offending;
    Verdict cond_ii = Verdict::inconclusive;
    std::vector<MultipleOffender> cond_ii_offending;
    std::size_t cond_ii_roots_checked = 0;
    Verdict cond_iii = Verdict::inconclusive;
    double sup_gap_ratio = 0.0, sup_edge_ratio = 0.0;
    std::vector<int> Q_indices;
    std::vector<double> gap_ratios, edge_ratios;   // per element of Q
    Verdict verdict = Verdict::inconclusive;
    std::string reason;
};

struct ConsequenceCheck {
    bool checked = false;
    bool ok = true;
    std::vector<std::string> violations;
};

struct CriteriaReport {
    T1Record t1;
    T2Record t2;
    T3Record t3;
    bool consistent = true;
    Verdict overall = Verdict::inconclusive;
    ConsequenceCheck consequence;
    double truncation_bound = 0.0;
    CriteriaThresholds thresholds;
};

namespace detail {

inline constexpr std::array<double, 3> free_ratio_limits{2.0 / std::numbers::pi, 2.0 / std::numbers::pi, 0.0};

inline std::array<double, 3> ratio_norms(cplx lambda)
{
    const double a = std::abs(lambda);
    return {1.0, 1.0 + a, 1.0 + std::sqrt(a)};
}

inline std::array<double, 3> ratios(const DiscriminantSample& s)
{
    const auto n = ratio_norms(s.z);
    const double d = std::abs(s.delta_plus_dot);
    return {std::abs(s.phi_pi) / (n[0] * d), std::abs(s.theta_prime_pi) / (n[1] * d),
            std::abs(s.delta_minus) / (n[2] * d)};
}

inline void check_potential(const Potential& p, const ArcDiagram& dg)
{
    if (dg.arcs.empty())
        throw InvalidInput("empty arc diagram");
    for (int i = 0; i < 7; ++i) {
        const double x = 0.37 + 0.41 * i;
        if (std::abs(p(x) - dg.potential(x)) > 1e-12 * (1.0 + std::abs(p(x))))
            throw InvalidInput("arc diagram was built for a different potential");
    }
}

/// n + 1 points of an arc, uniform in t over the arc's range.
inline std::vector<ArcSample> resample_arc(const Potential& p, const SpectralArc& arc, int n, double tol)
{
    const auto& S = arc.samples;
    const double t0 = S.front().t, t1 = S.back().t;
    std::vector<ArcSample> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    std::size_t k = 0;
    for (int i = 0; i <= n; ++i) {
        const double t = i == n ? t1 : t0 + (t1 - t0) * i / n;
        while (k + 2 < S.size() && S[k + 1].t < t)
            ++k;
        if (i == 0 || i == n) {
            out.push_back({t, i == 0 ? S.front().lambda : S.back().lambda});
            continue;
        }
        const double span = S[k + 1].t - S[k].t;
        const double u = span > 0 ? std::clamp((t - S[k].t) / span, 0.0, 1.0) : 0.0;
        const cplx guess = S[k].lambda + u * (S[k + 1].lambda - S[k].lambda);
        if (const auto z = solve_on_arc(p, t, guess, tol))
            out.push_back({t, *z});
    }
    return out;
}

/// Analytic function phi(., pi) theta'(., pi) = Delta_+^2 - 1 - Delta_-^2.
inline AnalyticFn numerator_fn(const Potential& p, double tol)
{
    AnalyticFn f;
    f.max_order = 1;
    f.tag = "phi_theta_prime";
    f.eval = [p, tol](cplx z, int order) {
        const auto s = integrate_fundamental(p, z, tol, std::max(order, 0));
        Jet j;
        j.order = order;
        j.d[0] = s.phi_pi * s.theta_prime_pi;
        if (order >= 1)
            j.d[1] = s.dz_phi_pi * s.theta_prime_pi + s.phi_pi * s.dz_theta_prime_pi;
        return j;
    };
    return f;
}

inline double dist_threshold(const CriteriaThresholds& th, cplx z)
{
    return th.dist_scale * std::sqrt(1.0 + std::abs(z));
}

}  // namespace detail

/// Bounds of the three ratios on the traced spectrum, with limits at
/// critical points on sigma(H) from leading Taylor coefficients.
inline T1Record check_theorem1(const Potential& p, const ArcDiagram& dg,
                               const CriteriaThresholds& th = {})
{
    if (th.samples_per_arc < 16)
        throw InvalidInput("samples_per_arc must be at least 16");
    detail::check_potential(p, dg);
    const double B = dg.truncation_bound;
    T1Record rec;

    std::array<double, 3> best{};
    auto take = [&](int j, double v, cplx where) {
        if (v > best[static_cast<std::size_t>(j)]) {
            best[static_cast<std::size_t>(j)] = v;
            rec.witnesses[static_cast<std::size_t>(j)] = where;
        }
    };

    // three density levels n, 3n, 9n
    std::array<cplx, 3> level_arg{};
    for (int level = 0; level < 3; ++level) {
        const int n = th.samples_per_arc * (level == 0 ? 1 : level == 1 ? 3 : 9);
        std::array<double, 3> sup{};
        for (const auto& arc : dg.arcs) {
            for (const auto& smp : detail::resample_arc(p, arc, n, dg.tol)) {
                if (std::abs(smp.lambda) > B)
                    continue;
                const auto s = integrate_fundamental(p, smp.lambda, dg.tol, 1);
                if (std::abs(s.delta_plus_dot) < detail::singular_threshold(smp.lambda))
                    continue;
                const auto r = detail::ratios(s);
                ++rec.samples;
                const bool outer = std::abs(smp.lambda) >= 0.5 * B;
                for (int j = 0; j < 3; ++j) {
                    const auto ju = static_cast<std::size_t>(j);
                    if (r[ju] > sup[ju]) {
                        sup[ju] = r[ju];
                        if (level == 2)
                            level_arg[ju] = smp.lambda;
                    }
                    take(j, r[ju], smp.lambda);
                    auto& side = outer ? rec.outer_sup[ju] : rec.inner_sup[ju];
                    side = std::max(side, r[ju]);
                }
            }
        }
        for (std::size_t j = 0; j < 3; ++j)
            rec.level_sups[j][static_cast<std::size_t>(level)] = sup[j];
    }

    // critical points on the spectrum
    std::array<bool, 3> singular_fail{};
    bool order_unresolved = false;
    for (const auto& jn : dg.junctions) {
        if (std::abs(jn.delta) > B)
            continue;
        const auto s = integrate_fundamental(p, jn.delta, std::min(dg.tol, fine_tol), 3);
        SingularPoint sp{jn.delta, jn.t_star, 1, {}, {}};
        const double den_floor = 1e-6 / (1.0 + std::abs(jn.delta));
        int m = 1;
        if (std::abs(s.delta_plus_derivative(2)) <= den_floor) {
            m = 2;
            if (std::abs(s.delta_plus_derivative(3)) <= den_floor)
                order_unresolved = true;
        }
        sp.denominator_order = m;
        const cplx den_lead = s.delta_plus_derivative(m + 1);
        const auto norms = detail::ratio_norms(jn.delta);
        for (int j = 0; j < 3; ++j) {
            auto g = [&](int k) {
                const auto& e = s.taylor[static_cast<std::size_t>(k)];
                return j == 0 ? e.phi : j == 1 ? e.theta_prime : s.delta_minus_derivative(k);
            };
            bool removable = true;
            for (int k = 0; k < m; ++k) {
                const double lead = std::abs(g(k + 1));
                const double tolk = th.removable_tol * (1.0 + lead * (1.0 + std::abs(jn.delta))) +
                                    2.0 * lead * jn.separation;
                if (std::abs(g(k)) > tolk)
                    removable = false;
            }
            const auto ju = static_cast<std::size_t>(j);
            sp.removable[ju] = removable;
            if (removable) {
                sp.limit[ju] = std::abs(g(m) / den_lead) / norms[ju];
                take(j, sp.limit[ju], jn.delta);
            } else {
                singular_fail[ju] = true;
                sp.limit[ju] = std::numeric_limits<double>::infinity();
                best[ju] = std::numeric_limits<double>::infinity();
                rec.witnesses[ju] = jn.delta;
            }
        }
        rec.singular_points.push_back(sp);
    }

    for (std::size_t j = 0; j < 3; ++j) {
        const auto& L = rec.level_sups[j];
        const bool growth = L[0] > 0.0 && L[1] > th.growth_factor * L[0] && L[2] > th.growth_factor * L[1];
        if (growth && !singular_fail[j])
            rec.witnesses[j] = level_arg[j];
        rec.tail_ok[j] = rec.outer_sup[j] > 0.0 &&
                         rec.outer_sup[j] <= th.tail_factor * std::max({rec.inner_sup[j], detail::free_ratio_limits[j], th.ratio_floor});
        if (singular_fail[j] || growth)
            rec.ratio_verdicts[j] = Verdict::fail;
        else if (!order_unresolved && std::isfinite(best[j]) && rec.tail_ok[j])
            rec.ratio_verdicts[j] = Verdict::pass;
        else
            rec.ratio_verdicts[j] = Verdict::inconclusive;
    }
    rec.sup_ratio_phi = best[0];
    rec.sup_ratio_theta = best[1];
    rec.sup_ratio_dminus = best[2];

    const auto& rv = rec.ratio_verdicts;
    if (std::find(rv.begin(), rv.end(), Verdict::fail) != rv.end()) {
        rec.verdict = Verdict::fail;
        rec.reason = "a ratio is unbounded near a spectrum point";
    } else if (std::all_of(rv.begin(), rv.end(), [](Verdict v) { return v == Verdict::pass; })) {
        rec.verdict = Verdict::pass;
        rec.reason = "all suprema finite and the tail matches the free limits";
    } else {
        rec.verdict = Verdict::inconclusive;
        rec.reason = order_unresolved ? "critical point of order above two" : "tail certificate failed";
    }
    return rec;
}

/// Removable-singularity test of (D_+^2 - 1 - D_-^2)/(phi D') on a tube
/// around the arcs, plus the first and third ratios.
inline T2Record check_theorem2(const Potential& p, const ArcDiagram& dg, const SpectrumCatalog& cat,
                               const CriteriaThresholds& th = {}, const T1Record* t1 = nullptr)
{
    detail::check_potential(p, dg);
    const double B = dg.truncation_bound;
    if (cat.dirichlet.empty() || cat.critical.empty() || cat.covered_bound < B)
        throw InvalidInput("catalog does not cover the tube up to " + std::to_string(B) +
                           " (covered " + std::to_string(cat.covered_bound) + "); use a larger count_target");
    T2Record rec;
    rec.tube_scale = th.dist_scale;

    // identity: both evaluations of the function agree
    for (const auto& arc : dg.arcs)
        for (const auto& smp : detail::resample_arc(p, arc, th.samples_per_arc, dg.tol)) {
            if (std::abs(smp.lambda) > B)
                continue;
            const auto s = integrate_fundamental(p, smp.lambda, dg.tol, 1);
            const cplx lhs = s.delta_plus * s.delta_plus - 1.0 - s.delta_minus * s.delta_minus;
            const cplx rhs = s.phi_pi * s.theta_prime_pi;
            const double dev = std::abs(lhs - rhs) / std::max(1.0, s.product_scale());
            rec.identity_max_deviation = std::max(rec.identity_max_deviation, dev);
        }

    // denominator zeros inside the tube
    std::vector<Root> denominators;
    for (const auto* set : {&cat.dirichlet, &cat.critical})
        for (const auto& r : *set)
            if (std::abs(r.location) <= B && distance_to_spectrum(dg, r.location) <= detail::dist_threshold(th, r.location))
                denominators.push_back(r);
    const auto N = detail::numerator_fn(p, dg.tol);
    std::vector<cplx> done;
    bool unresolved = false;
    for (const auto& r : denominators) {
        const cplx c = r.location;
        if (std::any_of(done.begin(), done.end(), [&](cplx d) { return std::abs(d - c) <= 1e-6 * (1.0 + std::abs(c)); }))
            continue;
        done.push_back(c);
        const double rho = 1e-5 * std::sqrt(1.0 + std::abs(c));
        const Rect box = Rect::around(c, rho);
        PoleCheck pc;
        pc.location = c;
        for (const auto& q : denominators)
            if (box.contains(q.location))
                pc.denominator_order += q.multiplicity;
        try {
            pc.numerator_order = count_zeros(N, box).count;
        } catch (const WindingError&) {
            unresolved = true;
            continue;
        }
        if (pc.pole())
            rec.pole_witnesses.push_back(c);
        rec.checked.push_back(pc);
    }
    rec.analyticity_verdict = !rec.pole_witnesses.empty() ? Verdict::fail
                              : unresolved                ? Verdict::inconclusive
                                                          : Verdict::pass;

    const T1Record own = t1 ? T1Record{} : check_theorem1(p, dg, th);
    const T1Record& r1 = t1 ? *t1 : own;
    rec.sup_ratio_phi = r1.sup_ratio_phi;
    rec.sup_ratio_dminus = r1.sup_ratio_dminus;
    const Verdict a = r1.ratio_verdicts[0], b = r1.ratio_verdicts[2];
    rec.estimates_verdict = (a == Verdict::fail || b == Verdict::fail)   ? Verdict::fail
                            : (a == Verdict::pass && b == Verdict::pass) ? Verdict::pass
                                                                         : Verdict::inconclusive;

    const bool identity_ok = rec.identity_max_deviation <= th.identity_tol;
    if (rec.analyticity_verdict == Verdict::fail || rec.estimates_verdict == Verdict::fail) {
        rec.verdict = Verdict::fail;
        rec.reason = rec.analyticity_verdict == Verdict::fail ? "pole of the function near the spectrum"
                                                              : "estimate unbounded";
    } else if (rec.analyticity_verdict == Verdict::pass && rec.estimates_verdict == Verdict::pass && identity_ok) {
        rec.verdict = Verdict::pass;
        rec.reason = "analytic near the spectrum and both estimates hold";
    } else {
        rec.verdict = Verdict::inconclusive;
        rec.reason = !identity_ok ? "Wronskian identity check failed" : "undecided tube or estimate";
    }
    return rec;
}

/// Dirichlet coincidence, root-function diagonalizability, and the open-gap
/// quotients.
inline T3Record check_theorem3(const Potential& p, const ArcDiagram& dg, const SpectrumCatalog& cat,
                               const CriteriaThresholds& th = {})
{
    detail::check_potential(p, dg);
    const double B = dg.truncation_bound;
    const double pi = std::numbers::pi;
    if (cat.covered_bound < B)
        throw InvalidInput("catalog covers real parts up to " + std::to_string(cat.covered_bound) +
                           ", below the truncation bound " + std::to_string(B));
    if (th.t_grid < 2)
        throw InvalidInput("t_grid needs at least two values");
    T3Record rec;

    // (i) multiple periodic/antiperiodic points are Dirichlet points
    for (const auto* set : {&cat.periodic, &cat.antiperiodic})
        for (const auto& r : *set) {
            if (r.multiplicity < 2 || std::abs(r.location) > B)
                continue;
            const bool hit = std::any_of(cat.dirichlet.begin(), cat.dirichlet.end(), [&](const Root& d) {
                return std::abs(d.location - r.location) <= 1e-6 * (1.0 + std::abs(r.location)) + r.separation;
            });
            if (!hit)
                rec.cond_i_offending.push_back(r.location);
        }
    rec.cond_i = rec.cond_i_offending.empty() ? Verdict::pass : Verdict::fail;

    // (ii) root functions of H(t) on a t-grid, plus junctions at interior t
    for (int i = 0; i < th.t_grid; ++i) {
        const double t = pi * i / (th.t_grid - 1);
        std::vector<Root> roots;
        if (i == 0 || i == th.t_grid - 1) {
            for (const auto& r : i == 0 ? cat.periodic : cat.antiperiodic)
                if (std::abs(r.location) <= B)
                    roots.push_back(r);
        } else {
            for (const auto& arc : dg.arcs) {
                if (!(arc.samples.front().t < t && t < arc.samples.back().t))
                    continue;
                auto it = std::lower_bound(arc.samples.begin(), arc.samples.end(), t,
                                           [](const ArcSample& s, double v) { return s.t < v; });
                const auto& b = *it;
                const auto& a = *(it - 1);
                const double u = (t - a.t) / (b.t - a.t);
                const auto z = solve_on_arc(p, t, a.lambda + u * (b.lambda - a.lambda), dg.tol);
                if (!z || std::abs(*z) > B)
                    continue;
                Root r{*z, 1};
                const auto s = integrate_fundamental(p, *z, dg.tol, 1);
                if (std::abs(s.delta_plus_dot) < detail::singular_threshold(*z)) {
                    try {
                        r.multiplicity = count_zeros(discriminant_fn(p, std::cos(t), dg.tol),
                                                     Rect::around(*z, 1e-3 * std::sqrt(1.0 + std::abs(*z))))
                                             .count;
                    } catch (const WindingError&) {
                        r.multiplicity = 2;
                    }
                }
                roots.push_back(r);
            }
        }
        for (const auto& r : roots) {
            const auto md = ht_multiplicity_data(p, r, t, dg.tol);
            ++rec.cond_ii_roots_checked;
            const bool interior = i > 0 && i < th.t_grid - 1;
            if (!md.diagonalizable || (interior && md.algebraic >= 2) || md.algebraic > 2)
                rec.cond_ii_offending.push_back({r.location, t, md.algebraic, md.geometric});
        }
    }
    for (const auto& j : dg.junctions)
        if (j.interior && std::abs(j.delta) <= B)
            rec.cond_ii_offending.push_back({j.delta, j.t_star, 2, 1});
    rec.cond_ii = rec.cond_ii_offending.empty() ? Verdict::pass : Verdict::fail;

    // (iii) quotients over Q
    bool pairing_failed = false;
    for (const auto& d : cat.critical) {
        if (std::abs(d.location) > B)
            continue;
        const double dist = distance_to_spectrum(dg, d.location);
        if (dist <= detail::dist_threshold(th, d.location))
            continue;
        const int k = d.window;
        const auto& set = k % 2 == 0 ? cat.periodic : cat.antiperiodic;
        const int label = k % 2 == 0 ? k / 2 : (k - 1) / 2;
        std::vector<cplx> ends;
        for (const auto& r : set)
            if (r.window == label)
                for (int m = 0; m < r.multiplicity; ++m)
                    ends.push_back(r.location);
        if (ends.size() != 2) {
            pairing_failed = true;
            continue;
        }
        rec.Q_indices.push_back(k);
        rec.gap_ratios.push_back(std::abs(ends[0] - ends[1]) / dist);
        rec.edge_ratios.push_back(std::max(std::abs(d.location - ends[0]), std::abs(d.location - ends[1])) / dist);
    }
    for (double v : rec.gap_ratios)
        rec.sup_gap_ratio = std::max(rec.sup_gap_ratio, v);
    for (double v : rec.edge_ratios)
        rec.sup_edge_ratio = std::max(rec.sup_edge_ratio, v);
    auto stabilizing = [&](const std::vector<double>& v, double limit) {
        if (v.size() < 2)
            return true;
        const double prev = *std::max_element(v.begin(), v.end() - 1);
        return v.back() <= th.tail_factor * std::max(prev, limit);
    };
    if (rec.sup_gap_ratio > th.unbounded_ratio || rec.sup_edge_ratio > th.unbounded_ratio)
        rec.cond_iii = Verdict::fail;
    else if (!pairing_failed && stabilizing(rec.gap_ratios, 2.0) && stabilizing(rec.edge_ratios, 1.0))
        rec.cond_iii = Verdict::pass;
    else
        rec.cond_iii = Verdict::inconclusive;

    const std::array<Verdict, 3> parts{rec.cond_i, rec.cond_ii, rec.cond_iii};
    if (std::find(parts.begin(), parts.end(), Verdict::fail) != parts.end()) {
        rec.verdict = Verdict::fail;
        rec.reason = rec.cond_i == Verdict::fail    ? "multiple point outside the Dirichlet spectrum"
                     : rec.cond_ii == Verdict::fail ? "non-diagonalizable or interior multiple root"
                                                    : "gap quotient unbounded";
    } else if (std::all_of(parts.begin(), parts.end(), [](Verdict v) { return v == Verdict::pass; })) {
        rec.verdict = Verdict::pass;
        rec.reason = "all three conditions hold";
    } else {
        rec.verdict = Verdict::inconclusive;
        rec.reason = pairing_failed ? "gap endpoints could not be paired" : "gap quotients not stabilizing";
    }
    return rec;
}

struct ReportConfig {
    int count_target = 6;
    double truncation_bound = 30.0;
    int arc_steps = 64;
    double tol = default_tol;
    int workers = 1;
    CriteriaThresholds thresholds;
};

/// Catalog options covering everything the diagram and checks need.
inline CatalogOptions catalog_options_for(const ReportConfig& cfg)
{
    CatalogOptions co;
    co.tol = cfg.tol;
    co.workers = cfg.workers;
    const double rb = std::sqrt(std::max(cfg.truncation_bound, 0.0));
    co.bound = (rb + 1.0) * (rb + 1.0) + 1.0;
    return co;
}

inline Verdict reconcile(const std::array<Verdict, 3>& v, bool& consistent)
{
    const bool any_pass = std::find(v.begin(), v.end(), Verdict::pass) != v.end();
    const bool any_fail = std::find(v.begin(), v.end(), Verdict::fail) != v.end();
    consistent = !(any_pass && any_fail);
    if (!consistent)
        return Verdict::inconclusive;
    return any_pass ? Verdict::pass : any_fail ? Verdict::fail : Verdict::inconclusive;
}

/// Runs the three checks on prebuilt catalog and diagram.
inline CriteriaReport criteria_report(const Potential& p, const SpectrumCatalog& cat, const ArcDiagram& dg,
                                      const CriteriaThresholds& th = {})
{
    CriteriaReport rep;
    rep.thresholds = th;
    rep.truncation_bound = dg.truncation_bound;
    rep.t1 = check_theorem1(p, dg, th);
    rep.t2 = check_theorem2(p, dg, cat, th, &rep.t1);
    rep.t3 = check_theorem3(p, dg, cat, th);
    rep.overall = reconcile({rep.t1.verdict, rep.t2.verdict, rep.t3.verdict}, rep.consistent);

    if (rep.overall == Verdict::pass) {
        rep.consequence.checked = true;
        for (const auto& j : dg.junctions) {
            if (std::abs(j.delta) > dg.truncation_bound)
                continue;
            const auto s = integrate_fundamental(p, j.delta, std::min(dg.tol, fine_tol), 2);
            const double slack = 2.0 * j.separation;
            const double a = std::abs(s.delta_plus * s.delta_plus - 1.0);
            const double b = std::abs(s.delta_minus);
            const double c = std::abs(s.delta_plus_dot);
            const double dd = std::abs(s.delta_plus_derivative(2));
            if (a >= 1e-6 + slack * std::abs(2.0 * s.delta_plus * s.delta_plus_dot) ||
                b >= 1e-6 + slack * std::abs(s.delta_minus_derivative(1)) ||
                c >= 1e-6 + slack * dd || dd == 0.0)
                rep.consequence.violations.push_back("critical point " + to_string(j.delta));
        }
        if (!dg.intersections.empty())
            rep.consequence.violations.push_back("arc diagram has intersections");
        rep.consequence.ok = rep.consequence.violations.empty();
    }
    return rep;
}

/// Catalog, diagram and all three checks.
inline CriteriaReport full_report(const Potential& p, const ReportConfig& cfg = {})
{
    const auto cat = build_catalog(p, cfg.count_target, catalog_options_for(cfg));
    ArcOptions ao;
    ao.steps = cfg.arc_steps;
    ao.tol = cfg.tol;
    ao.workers = cfg.workers;
    const auto dg = build_diagram(p, cat, cfg.truncation_bound, ao);
    return criteria_report(p, cat, dg, cfg.thresholds);
}

}  // namespace hill
