#pragma once

// JSON documents for criteria reports, arc diagrams and expansions.

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hillspec/arcs.hpp"
#include "hillspec/criteria.hpp"
#include "hillspec/io.hpp"
#include "hillspec/titchmarsh.hpp"

namespace hill {

using json = nlohmann::ordered_json;

namespace detail {

inline json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

inline json cjson(const std::vector<cplx>& v)
{
    json a = json::array();
    for (cplx z : v)
        a.push_back(cjson(z));
    return a;
}

template <std::size_t N>
inline json vjson(const std::array<Verdict, N>& v)
{
    json a = json::array();
    for (Verdict x : v)
        a.push_back(verdict_name(x));
    return a;
}

inline void dump_value(std::ostream& os, const json& j, int indent, int depth)
{
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first)
                os << ",\n";
            first = false;
            os << pad << json(it.key()).dump() << ": ";
            dump_value(os, it.value(), indent, depth + 1);
        }
        os << '\n' << close << '}';
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        bool flat = true;
        for (const auto& e : j)
            flat = flat && !e.is_structured();
        if (flat) {
            os << '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i)
                    os << ", ";
                dump_value(os, j[i], indent, depth + 1);
            }
            os << ']';
            return;
        }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i)
                os << ",\n";
            os << pad;
            dump_value(os, j[i], indent, depth + 1);
        }
        os << '\n' << close << ']';
        return;
    }
    case json::value_t::number_float: {
        const double v = j.get<double>();
        os << (std::isfinite(v) ? io::fmt(v) : "null");
        return;
    }
    default:
        os << j.dump();
    }
}

}  // namespace detail

/// Deterministic rendering: insertion-ordered keys, doubles with 17
/// significant digits, non-finite values as null, LF line endings.
inline std::string dump_json(const json& j, int indent = 2)
{
    std::ostringstream os;
    detail::dump_value(os, j, indent, 0);
    os << '\n';
    return os.str();
}

inline json to_json(const CriteriaThresholds& t)
{
    return {{"samples_per_arc", t.samples_per_arc}, {"removable_tol", t.removable_tol},
            {"growth_factor", t.growth_factor},     {"tail_factor", t.tail_factor},
            {"ratio_floor", t.ratio_floor},         {"identity_tol", t.identity_tol},
            {"t_grid", t.t_grid},                   {"dist_scale", t.dist_scale},
            {"unbounded_ratio", t.unbounded_ratio}};
}

inline json to_json(const T1Record& r)
{
    json sp = json::array();
    for (const auto& s : r.singular_points) {
        json rem = json::array(), lim = json::array();
        for (int j = 0; j < 3; ++j) {
            rem.push_back(static_cast<bool>(s.removable[static_cast<std::size_t>(j)]));
            lim.push_back(s.limit[static_cast<std::size_t>(j)]);
        }
        sp.push_back({{"delta", detail::cjson(s.delta)}, {"t_star", s.t_star},
                      {"denominator_order", s.denominator_order}, {"removable", rem}, {"limit", lim}});
    }
    json levels = json::array(), tail = json::array();
    for (std::size_t j = 0; j < 3; ++j) {
        levels.push_back(json::array({r.level_sups[j][0], r.level_sups[j][1], r.level_sups[j][2]}));
        tail.push_back(static_cast<bool>(r.tail_ok[j]));
    }
    return {{"verdict", verdict_name(r.verdict)},
            {"reason", r.reason},
            {"sup_ratio_phi", r.sup_ratio_phi},
            {"sup_ratio_theta", r.sup_ratio_theta},
            {"sup_ratio_dminus", r.sup_ratio_dminus},
            {"witnesses", detail::cjson(std::vector<cplx>(r.witnesses.begin(), r.witnesses.end()))},
            {"ratio_verdicts", detail::vjson(r.ratio_verdicts)},
            {"level_sups", levels},
            {"inner_sup", json::array({r.inner_sup[0], r.inner_sup[1], r.inner_sup[2]})},
            {"outer_sup", json::array({r.outer_sup[0], r.outer_sup[1], r.outer_sup[2]})},
            {"tail_ok", tail},
            {"samples", r.samples},
            {"singular_points", sp}};
}

inline json to_json(const T2Record& r)
{
    json checked = json::array();
    for (const auto& c : r.checked)
        checked.push_back({{"location", detail::cjson(c.location)},
                           {"denominator_order", c.denominator_order},
                           {"numerator_order", c.numerator_order},
                           {"pole", c.pole()}});
    return {{"verdict", verdict_name(r.verdict)},
            {"reason", r.reason},
            {"analyticity_verdict", verdict_name(r.analyticity_verdict)},
            {"pole_witnesses", detail::cjson(r.pole_witnesses)},
            {"checked", checked},
            {"estimates_verdict", verdict_name(r.estimates_verdict)},
            {"sup_ratio_phi", r.sup_ratio_phi},
            {"sup_ratio_dminus", r.sup_ratio_dminus},
            {"identity_max_deviation", r.identity_max_deviation},
            {"tube_scale", r.tube_scale}};
}

inline json to_json(const T3Record& r)
{
    json off = json::array();
    for (const auto& o : r.cond_ii_offending)
        off.push_back({{"E", detail::cjson(o.E)}, {"t", o.t}, {"algebraic", o.algebraic}, {"geometric", o.geometric}});
    return {{"verdict", verdict_name(r.verdict)},
            {"reason", r.reason},
            {"cond_i", verdict_name(r.cond_i)},
            {"cond_i_offending", detail::cjson(r.cond_i_offending)},
            {"cond_ii", verdict_name(r.cond_ii)},
            {"cond_ii_offending", off},
            {"cond_ii_roots_checked", r.cond_ii_roots_checked},
            {"cond_iii", verdict_name(r.cond_iii)},
            {"sup_gap_ratio", r.sup_gap_ratio},
            {"sup_edge_ratio", r.sup_edge_ratio},
            {"Q_indices", r.Q_indices},
            {"gap_ratios", r.gap_ratios},
            {"edge_ratios", r.edge_ratios}};
}

inline json to_json(const CriteriaReport& r)
{
    return {{"truncation_bound", r.truncation_bound},
            {"overall", verdict_name(r.overall)},
            {"consistent", r.consistent},
            {"t1", to_json(r.t1)},
            {"t2", to_json(r.t2)},
            {"t3", to_json(r.t3)},
            {"consequence", {{"checked", r.consequence.checked}, {"ok", r.consequence.ok}, {"violations", r.consequence.violations}}},
            {"thresholds", to_json(r.thresholds)}};
}

/// Arc counts, endpoints, junctions and intersections; polylines go to CSV.
inline json to_json(const ArcDiagram& dg)
{
    auto endpoint = [](const ArcEndpoint& e) {
        const char* kind = e.kind == ArcEndpoint::Kind::root ? "root" : e.kind == ArcEndpoint::Kind::junction ? "junction" : "none";
        return json{{"kind", kind}, {"index", e.index}, {"distance", e.distance}};
    };
    json arcs = json::array();
    for (const auto& a : dg.arcs)
        arcs.push_back({{"band_index", a.band_index},
                        {"samples", a.samples.size()},
                        {"lambda_start", detail::cjson(a.samples.front().lambda)},
                        {"lambda_end", detail::cjson(a.samples.back().lambda)},
                        {"t_start", a.samples.front().t},
                        {"t_end", a.samples.back().t},
                        {"start", endpoint(a.start)},
                        {"end", endpoint(a.end)}});
    json junctions = json::array();
    for (const auto& j : dg.junctions)
        junctions.push_back({{"delta", detail::cjson(j.delta)}, {"t_star", j.t_star}, {"w", detail::cjson(j.w)},
                             {"interior", j.interior}, {"separation", j.separation}});
    auto points = [](const std::vector<Intersection>& v) {
        json a = json::array();
        for (const auto& i : v)
            a.push_back({{"lambda", detail::cjson(i.lambda)}, {"arcs", i.arcs}});
        return a;
    };
    return {{"truncation_bound", dg.truncation_bound},
            {"arcs", arcs},
            {"junctions", junctions},
            {"intersections", points(dg.intersections)},
            {"unresolved", points(dg.unresolved)}};
}

inline json to_json(const ExpansionResult& r, double input_norm, double error_norm)
{
    json bands = json::array();
    for (std::size_t k = 0; k < r.bands.bands.size(); ++k) {
        const auto& b = r.bands.bands[k];
        bands.push_back({{"index", b.index}, {"lo", b.lo}, {"hi", b.hi},
                         {"contribution_norm", k < r.band_norms.size() ? r.band_norms[k] : 0.0}});
    }
    json merged = json::array();
    for (const auto& iv : r.bands.intervals)
        merged.push_back({{"first_band", iv.first_band}, {"count", iv.count}, {"lo", iv.lo}, {"hi", iv.hi}});
    return {{"bands", bands},
            {"intervals", merged},
            {"nodes_per_band", r.nodes_per_band},
            {"input_norm", input_norm},
            {"reconstruction_error_norm", error_norm},
            {"relative_error", input_norm > 0.0 ? error_norm / input_norm : 0.0}};
}

}  // namespace hill
