#pragma once

// Configuration-driven runs: strict JSON config, artifacts, manifest.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hillspec/arcs.hpp"
#include "hillspec/criteria.hpp"
#include "hillspec/report.hpp"
#include "hillspec/spectra.hpp"
#include "hillspec/titchmarsh.hpp"

namespace hill {

inline constexpr const char* version_string = "0.1.0";

enum class Command { discriminant, spectra, arcs, criteria, expand, report };

inline const char* command_name(Command c)
{
    switch (c) {
    case Command::discriminant: return "discriminant";
    case Command::spectra: return "spectra";
    case Command::arcs: return "arcs";
    case Command::criteria: return "criteria";
    case Command::expand: return "expand";
    case Command::report: return "report";
    }
    return "?";
}

/// Exit statuses of a run.
enum ExitCode : int { exit_pass = 0, exit_fail = 1, exit_inconclusive = 2, exit_usage = 3, exit_numerical = 4 };

struct Axis {
    double lo = 0.0, hi = 0.0;
    int n = 1;
    double at(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
};

struct GaussianSpec {
    double center = 0.0, width = 1.0, x0 = 0.0, x1 = 1.0;
    int nodes = 201;
};

struct FunctionSpec {
    std::optional<std::string> csv;   // resolved path
    std::optional<GaussianSpec> gaussian;
};

struct RunConfig {
    Command command = Command::report;
    Potential potential = Potential::zero();
    double tol = default_tol;
    int count_target = 6;
    double truncation_bound = 30.0;
    int samples_per_arc = 32;
    int arc_steps = 64;
    int t_grid = 33;
    int bands = 40;
    int nodes_per_band = 32;
    Axis grid_re{0.0, 10.0, 101}, grid_im{0.0, 0.0, 1};
    std::optional<FunctionSpec> function;
    std::vector<std::pair<double, double>> sigma;
    std::string output = "out";
    std::uint64_t seed = 0;
    std::optional<int> workers;
    json echo;   // the parsed document
};

namespace detail {

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!j.is_object())
        throw InvalidInput(where + " must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw InvalidInput("unknown key '" + it.key() + "' in " + where);
}

inline double num(const json& j, const std::string& what)
{
    if (!j.is_number())
        throw InvalidInput(what + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        throw InvalidInput(what + " must be finite");
    return v;
}

inline int integer(const json& j, const std::string& what, int lo, int hi)
{
    if (!j.is_number_integer())
        throw InvalidInput(what + " must be an integer");
    const auto v = j.get<std::int64_t>();
    if (v < lo || v > hi)
        throw InvalidInput(what + " must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " +
                           std::to_string(v));
    return static_cast<int>(v);
}

inline double ranged(const json& j, const std::string& what, double lo, double hi)
{
    const double v = num(j, what);
    if (v < lo || v > hi)
        throw InvalidInput(what + " must be in [" + io::fmt(lo) + ", " + io::fmt(hi) + "], got " + io::fmt(v));
    return v;
}

inline Potential parse_potential(const json& j)
{
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw InvalidInput("potential needs a string 'kind'");
    const auto kind = j["kind"].get<std::string>();
    if (kind == "builtin") {
        only_keys(j, "potential", {"kind", "name", "q"});
        if (!j.contains("name") || !j["name"].is_string())
            throw InvalidInput("builtin potential needs a 'name'");
        const auto name = j["name"].get<std::string>();
        const bool has_q = j.contains("q");
        const double q = has_q ? num(j["q"], "potential.q") : 0.0;
        if (name == "zero" || name == "gasymov") {
            if (has_q)
                throw InvalidInput("builtin '" + name + "' takes no parameter q");
            return name == "zero" ? Potential::zero() : Potential::gasymov();
        }
        if (name == "mathieu" || name == "complex_mathieu") {
            if (!has_q)
                throw InvalidInput("builtin '" + name + "' needs q");
            return name == "mathieu" ? Potential::mathieu(q) : Potential::complex_mathieu(q);
        }
        throw InvalidInput("unknown builtin '" + name + "'");
    }
    if (kind == "fourier") {
        only_keys(j, "potential", {"kind", "coefficients"});
        if (!j.contains("coefficients") || !j["coefficients"].is_array())
            throw InvalidInput("fourier potential needs 'coefficients' as [n, re, im] triples");
        std::vector<FourierTerm> terms;
        for (const auto& e : j["coefficients"]) {
            if (!e.is_array() || e.size() != 3)
                throw InvalidInput("fourier coefficient must be [n, re, im]");
            terms.push_back({integer(e[0], "fourier index", -10000, 10000),
                             cplx(num(e[1], "fourier re"), num(e[2], "fourier im"))});
        }
        return Potential::from_fourier(std::move(terms));
    }
    if (kind == "samples") {
        only_keys(j, "potential", {"kind", "values"});
        if (!j.contains("values") || !j["values"].is_array())
            throw InvalidInput("samples potential needs 'values'");
        std::vector<cplx> v;
        for (const auto& e : j["values"]) {
            if (e.is_array()) {
                if (e.size() != 2)
                    throw InvalidInput("sample must be a number or [re, im]");
                v.emplace_back(num(e[0], "sample re"), num(e[1], "sample im"));
            } else {
                v.emplace_back(num(e, "sample"), 0.0);
            }
        }
        return Potential::from_samples(std::move(v));
    }
    throw InvalidInput("unknown potential kind '" + kind + "'");
}

inline Axis parse_axis(const json& j, const std::string& what)
{
    if (!j.is_array() || j.size() != 3)
        throw InvalidInput(what + " must be [lo, hi, n]");
    Axis a{num(j[0], what + " lo"), num(j[1], what + " hi"), integer(j[2], what + " n", 1, 100000)};
    if (a.hi < a.lo || (a.n == 1 && a.hi != a.lo))
        throw InvalidInput(what + " needs lo <= hi, and lo = hi when n = 1");
    return a;
}

}  // namespace detail

/// Strict parse: unknown keys anywhere are rejected; relative paths are
/// resolved against `base`.
inline RunConfig parse_config(const json& j, const std::filesystem::path& base = {})
{
    using namespace detail;
    only_keys(j, "config", {"command", "potential", "parameters", "grid", "function", "sigma", "output", "seed", "workers"});
    RunConfig c;
    c.echo = j;
    if (!j.contains("command") || !j["command"].is_string())
        throw InvalidInput("config needs a string 'command'");
    const auto cmd = j["command"].get<std::string>();
    bool found = false;
    for (auto k : {Command::discriminant, Command::spectra, Command::arcs, Command::criteria, Command::expand, Command::report})
        if (cmd == command_name(k))
            c.command = k, found = true;
    if (!found)
        throw InvalidInput("unknown command '" + cmd + "'");
    if (!j.contains("potential"))
        throw InvalidInput("config needs a 'potential' block");
    c.potential = parse_potential(j["potential"]);

    if (j.contains("parameters")) {
        const auto& p = j["parameters"];
        only_keys(p, "parameters", {"tol", "count_target", "truncation_bound", "samples_per_arc", "arc_steps", "t_grid", "bands", "nodes_per_band"});
        if (p.contains("tol")) c.tol = ranged(p["tol"], "tol", 1e-13, 1e-4);
        if (p.contains("count_target")) c.count_target = integer(p["count_target"], "count_target", 4, 200);
        if (p.contains("truncation_bound")) c.truncation_bound = ranged(p["truncation_bound"], "truncation_bound", 1.0, 1e4);
        if (p.contains("samples_per_arc")) c.samples_per_arc = integer(p["samples_per_arc"], "samples_per_arc", 4, 4096);
        if (p.contains("arc_steps")) c.arc_steps = integer(p["arc_steps"], "arc_steps", 16, 4096);
        if (p.contains("t_grid")) c.t_grid = integer(p["t_grid"], "t_grid", 2, 1025);
        if (p.contains("bands")) c.bands = integer(p["bands"], "bands", 1, 200);
        if (p.contains("nodes_per_band")) c.nodes_per_band = integer(p["nodes_per_band"], "nodes_per_band", 2, 512);
    }
    if (j.contains("grid")) {
        only_keys(j["grid"], "grid", {"re", "im"});
        if (j["grid"].contains("re")) c.grid_re = parse_axis(j["grid"]["re"], "grid.re");
        if (j["grid"].contains("im")) c.grid_im = parse_axis(j["grid"]["im"], "grid.im");
    }
    if (j.contains("function")) {
        const auto& f = j["function"];
        only_keys(f, "function", {"csv", "gaussian"});
        FunctionSpec fs;
        if (f.contains("csv")) {
            if (!f["csv"].is_string())
                throw InvalidInput("function.csv must be a path");
            std::filesystem::path path = f["csv"].get<std::string>();
            fs.csv = (path.is_relative() && !base.empty() ? base / path : path).string();
        }
        if (f.contains("gaussian")) {
            const auto& g = f["gaussian"];
            only_keys(g, "function.gaussian", {"center", "width", "support", "nodes"});
            GaussianSpec gs;
            if (!g.contains("center") || !g.contains("width") || !g.contains("support"))
                throw InvalidInput("function.gaussian needs center, width and support");
            gs.center = num(g["center"], "gaussian center");
            gs.width = ranged(g["width"], "gaussian width", 1e-6, 1e6);
            if (!g["support"].is_array() || g["support"].size() != 2)
                throw InvalidInput("gaussian support must be [x0, x1]");
            gs.x0 = num(g["support"][0], "support x0");
            gs.x1 = num(g["support"][1], "support x1");
            if (!(gs.x1 > gs.x0))
                throw InvalidInput("gaussian support needs x0 < x1");
            if (g.contains("nodes")) gs.nodes = integer(g["nodes"], "gaussian nodes", 3, 1000000);
            fs.gaussian = gs;
        }
        if (fs.csv.has_value() == fs.gaussian.has_value())
            throw InvalidInput("function needs exactly one of 'csv' or 'gaussian'");
        c.function = fs;
    }
    if (j.contains("sigma")) {
        if (!j["sigma"].is_array())
            throw InvalidInput("sigma must be a list of [a, b] intervals");
        for (const auto& e : j["sigma"]) {
            if (!e.is_array() || e.size() != 2)
                throw InvalidInput("sigma interval must be [a, b]");
            c.sigma.push_back({num(e[0], "sigma a"), num(e[1], "sigma b")});
        }
    }
    if (j.contains("output")) {
        if (!j["output"].is_string())
            throw InvalidInput("output must be a directory path");
        std::filesystem::path path = j["output"].get<std::string>();
        c.output = (path.is_relative() && !base.empty() ? base / path : path).string();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned())
            throw InvalidInput("seed must be a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("workers")) c.workers = integer(j["workers"], "workers", 1, 1024);
    if (c.command == Command::expand && !c.function)
        throw InvalidInput("expand needs a 'function' block");
    return c;
}

/// Reads and parses a config file; JSON syntax errors become InvalidInput.
inline RunConfig load_config(const std::filesystem::path& path, std::string* text = nullptr)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidInput("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    if (text)
        *text = ss.str();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j, path.parent_path());
}

struct RunOptions {
    std::optional<std::string> out;   // overrides the config
    std::optional<int> workers;       // overrides the config
    bool verbose = false;
    std::string config_text;
    std::map<std::string, std::string> versions;   // extra entries for the manifest
};

struct RunResult {
    int exit_code = exit_pass;
    std::vector<std::string> outputs;
    std::string error_type, error_message;
    double wall_seconds = 0.0;
};

namespace detail {

inline int verdict_exit(const CriteriaReport& r)
{
    return r.overall == Verdict::pass ? exit_pass : r.overall == Verdict::fail ? exit_fail : exit_inconclusive;
}

inline FunctionOnGrid load_function(const FunctionSpec& fs)
{
    if (fs.csv) {
        std::ifstream in(*fs.csv, std::ios::binary);
        if (!in)
            throw InvalidInput("cannot read function csv " + *fs.csv);
        return read_function_csv(in);
    }
    const auto g = *fs.gaussian;
    return FunctionOnGrid::sample(g.x0, g.x1, static_cast<std::size_t>(g.nodes), [g](double x) {
        const double u = (x - g.center) / g.width;
        return cplx(std::exp(-0.5 * u * u), 0.0);
    });
}

class Writer {
public:
    explicit Writer(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

    void text(const std::string& name, const std::string& body)
    {
        std::ofstream os(dir_ / name, std::ios::binary);
        if (!os)
            throw InvalidInput("cannot write " + (dir_ / name).string());
        os << body;
        files_.push_back(name);
    }
    template <class Fn>
    void stream(const std::string& name, Fn&& fn)
    {
        std::ostringstream os;
        fn(os);
        text(name, os.str());
    }
    const std::vector<std::string>& files() const { return files_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::string> files_;
};

inline void write_discriminant_csv(std::ostream& os, const std::vector<cplx>& zs, const std::vector<GridEntry>& g)
{
    io::csv_row(os, {"re_z", "im_z", "re_delta_plus", "im_delta_plus", "re_delta_minus", "im_delta_minus",
                     "re_delta_plus_dot", "im_delta_plus_dot", "re_phi_pi", "im_phi_pi", "re_theta_prime_pi",
                     "im_theta_prime_pi", "est_error"});
    for (std::size_t i = 0; i < zs.size(); ++i) {
        if (!g[i].ok()) {
            std::vector<std::string> row{io::fmt(zs[i].real()), io::fmt(zs[i].imag())};
            row.resize(13, "nan");
            io::csv_row(os, row);
            continue;
        }
        const auto& s = *g[i].sample;
        io::csv_row(os, {io::fmt(zs[i].real()), io::fmt(zs[i].imag()), io::fmt(s.delta_plus.real()),
                         io::fmt(s.delta_plus.imag()), io::fmt(s.delta_minus.real()), io::fmt(s.delta_minus.imag()),
                         io::fmt(s.delta_plus_dot.real()), io::fmt(s.delta_plus_dot.imag()), io::fmt(s.phi_pi.real()),
                         io::fmt(s.phi_pi.imag()), io::fmt(s.theta_prime_pi.real()), io::fmt(s.theta_prime_pi.imag()),
                         io::fmt(s.est_error)});
    }
}

inline ReportConfig report_config(const RunConfig& c, int workers)
{
    ReportConfig rc;
    rc.count_target = c.count_target;
    rc.truncation_bound = c.truncation_bound;
    rc.arc_steps = c.arc_steps;
    rc.tol = c.tol;
    rc.workers = workers;
    rc.thresholds.samples_per_arc = c.samples_per_arc;
    rc.thresholds.t_grid = c.t_grid;
    return rc;
}

inline int execute(const RunConfig& c, int workers, bool verbose, Writer& w)
{
    auto log = [&](const std::string& m) {
        if (verbose)
            std::clog << "[hillspec] " << m << '\n';
    };
    const auto& p = c.potential;
    log(std::string("command ") + command_name(c.command) + ", potential " + p.describe());
    switch (c.command) {
    case Command::discriminant: {
        std::vector<cplx> zs;
        for (int i = 0; i < c.grid_re.n; ++i)
            for (int k = 0; k < c.grid_im.n; ++k)
                zs.emplace_back(c.grid_re.at(i), c.grid_im.at(k));
        log(std::to_string(zs.size()) + " grid points");
        const auto g = eval_grid(p, zs, c.tol, workers);
        w.stream("discriminant.csv", [&](std::ostream& os) { write_discriminant_csv(os, zs, g); });
        for (const auto& e : g)
            if (!e.ok())
                throw IntegrationError(cplx{}, 0.0, "grid point failed: " + e.error);
        return exit_pass;
    }
    case Command::spectra: {
        CatalogOptions co;
        co.tol = c.tol;
        co.workers = workers;
        const auto cat = build_catalog(p, c.count_target, co);
        w.stream("spectra.csv", [&](std::ostream& os) { write_catalog_csv(os, cat); });
        return exit_pass;
    }
    case Command::arcs:
    case Command::criteria:
    case Command::report: {
        const auto rc = report_config(c, workers);
        log("building catalog");
        const auto cat = build_catalog(p, rc.count_target, catalog_options_for(rc));
        ArcOptions ao;
        ao.steps = rc.arc_steps;
        ao.tol = rc.tol;
        ao.workers = workers;
        log("tracing arcs");
        const auto dg = build_diagram(p, cat, rc.truncation_bound, ao);
        if (c.command != Command::criteria) {
            w.stream("arcs.csv", [&](std::ostream& os) { write_arcs_csv(os, dg); });
            w.text("arcs.json", dump_json(to_json(dg)));
        }
        if (c.command == Command::report)
            w.stream("spectra.csv", [&](std::ostream& os) { write_catalog_csv(os, cat); });
        if (c.command == Command::arcs)
            return exit_pass;
        log("checking criteria");
        const auto rep = criteria_report(p, cat, dg, rc.thresholds);
        json doc = to_json(rep);
        doc["potential"] = p.describe();
        w.text("report.json", dump_json(doc));
        log(std::string("overall ") + verdict_name(rep.overall));
        return verdict_exit(rep);
    }
    case Command::expand: {
        const auto f = load_function(*c.function);
        SpectralOptions so;
        so.nodes_per_band = c.nodes_per_band;
        so.tol = c.tol;
        so.workers = workers;
        auto co = band_catalog_options(p, c.bands, c.tol);
        co.workers = workers;
        detail::require_real(p);
        log("building band catalog");
        const auto cat = build_catalog(p, 4, co);
        ExpansionResult r;
        if (c.sigma.empty()) {
            r = expand(p, f, cat, c.bands, so);
        } else {
            r.bands = band_system(cat, c.bands);
            r.nodes_per_band = so.nodes_per_band;
            std::vector<FunctionOnGrid> parts;
            r.reconstruction = SpectralProjector(p, r.bands, SpectralSet{c.sigma}, f, so).apply(f, &parts);
            for (const auto& g : parts)
                r.band_norms.push_back(l2_norm(g));
        }
        w.stream("expand.csv", [&](std::ostream& os) { write_function_csv(os, r.reconstruction); });
        json doc = to_json(r, l2_norm(f), l2_distance(r.reconstruction, f));
        doc["projection"] = !c.sigma.empty();
        w.text("expand.json", dump_json(doc));
        return exit_pass;
    }
    }
    return exit_pass;
}

}  // namespace detail

/// Runs the configured pipeline; every outcome, including failures, ends
/// with manifest.json in the output directory.
inline RunResult run(const RunConfig& c, const RunOptions& o = {})
{
    const auto t0 = std::chrono::steady_clock::now();
    const int workers = o.workers.value_or(c.workers.value_or(default_workers()));
    RunResult res;
    const std::filesystem::path dir = o.out.value_or(c.output);
    std::optional<detail::Writer> w;
    try {
        w.emplace(dir);
        res.exit_code = detail::execute(c, workers, o.verbose, *w);
    } catch (const InvalidInput& e) {
        res.exit_code = exit_usage;
        res.error_type = "InvalidInput";
        res.error_message = e.what();
    } catch (const NumericalError& e) {
        res.exit_code = exit_numerical;
        res.error_type = "NumericalError";
        res.error_message = e.what();
    } catch (const std::filesystem::filesystem_error& e) {
        res.exit_code = exit_usage;
        res.error_type = "FilesystemError";
        res.error_message = e.what();
    } catch (const std::exception& e) {
        res.exit_code = exit_numerical;
        res.error_type = "InternalError";
        res.error_message = e.what();
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (w)
        res.outputs = w->files();

    json versions = {{"hillspec", version_string},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
#if defined(__clang__)
                     {"compiler", std::string("clang ") + __clang_version__},
#elif defined(__GNUC__)
                     {"compiler", std::string("gcc ") + __VERSION__},
#endif
                     {"cxx_standard", static_cast<std::int64_t>(__cplusplus)}};
    for (const auto& [k, v] : o.versions)
        versions[k] = v;
    json m = {{"command", command_name(c.command)},
              {"potential", c.potential.describe()},
              {"config", c.echo},
              {"config_text", o.config_text},
              {"seed", c.seed},
              {"workers", workers},
              {"versions", versions},
              {"outputs", res.outputs},
              {"exit_code", res.exit_code},
              {"status", res.error_type.empty() ? "ok" : "error"},
              {"wall_time_seconds", res.wall_seconds}};
    if (!res.error_type.empty())
        m["error"] = {{"type", res.error_type}, {"message", res.error_message}};
    if (w) {
        try {
            w->text("manifest.json", dump_json(m));
            res.outputs.push_back("manifest.json");
        } catch (const std::exception&) {
        }
    }
    return res;
}

/// Manifest for a run that never started (unreadable or invalid config).
inline void write_error_manifest(const std::filesystem::path& dir, const std::string& type,
                                 const std::string& message, const std::string& config_text = {})
{
    detail::Writer w(dir);
    json m = {{"config_text", config_text},
              {"versions", {{"hillspec", version_string}}},
              {"outputs", json::array()},
              {"exit_code", static_cast<int>(exit_usage)},
              {"status", "error"},
              {"error", {{"type", type}, {"message", message}}}};
    w.text("manifest.json", dump_json(m));
}

}  // namespace hill
