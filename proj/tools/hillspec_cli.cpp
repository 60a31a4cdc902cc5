#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hillspec/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Floquet discriminants, spectra, spectral arcs and criteria for complex periodic Hill operators"};
    std::string config_path, out;
    int workers = 0;
    bool verbose = false;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out, "output directory (overrides the config)");
    app.add_option("--workers", workers, "worker threads (default: available parallelism)")
        ->check(CLI::Range(1, 1024));
    app.add_flag("--verbose,-v", verbose, "progress messages on stderr");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : hill::exit_usage;
    }

    hill::RunOptions o;
    o.verbose = verbose;
    if (!out.empty())
        o.out = out;
    if (workers > 0)
        o.workers = workers;
    o.versions["cli11"] = CLI11_VERSION;

    hill::RunConfig cfg;
    try {
        cfg = hill::load_config(config_path, &o.config_text);
    } catch (const hill::InvalidInput& e) {
        std::cerr << "hillspec: " << e.what() << '\n';
        if (!out.empty()) {
            try {
                hill::write_error_manifest(out, "InvalidInput", e.what(), o.config_text);
            } catch (const std::exception&) {
            }
        }
        return hill::exit_usage;
    }
    const auto res = hill::run(cfg, o);
    if (!res.error_type.empty())
        std::cerr << "hillspec: " << res.error_type << ": " << res.error_message << '\n';
    else if (verbose)
        std::clog << "[hillspec] wrote " << res.outputs.size() << " files in " << res.wall_seconds << " s\n";
    return res.exit_code;
}
