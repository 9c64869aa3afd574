// laboratory driver: one subcommand per experiment, parameters from an
// optional flat key=value config file with command-line flags taking
// precedence; every run writes a self-describing output directory
#include <CLI11.hpp>

#include <cstdio>
#include <cstdint>
#include <exception>
#include <string>
#include <vector>

#include "lpw/cli.hpp"
#include "lpw/io.hpp"

namespace {

struct RawArgs {
    std::string config_file;
    std::string model = "p";
    double sigma = 1.0;
    std::string potential_file;
    double grid_h = 0.25;
    double grid_extent = 0.0;
    long n_max = 0;
    std::vector<double> eps;
    std::vector<int> N;
    long samples = 0;
    double beta = 0.5;
    long seeds = 64;
    std::uint64_t seed = 1;
    long threads = 1;
    bool bridge = false;
    std::string out_dir;
};

void add_common_options(CLI::App* s, RawArgs& rw) {
    s->add_option("--config", rw.config_file,
                  "flat key=value parameter file; flags override its entries");
    s->add_option("--model", rw.model, "p = pinning (full line), w = wetting (half line)")
        ->check(CLI::IsMember({"p", "w"}));
    s->add_option("--sigma", rw.sigma, "Gaussian increment scale");
    s->add_option("--potential-file", rw.potential_file,
                  "tabulated potential (x, V) file; overrides --sigma");
    s->add_option("--grid-h", rw.grid_h, "node spacing of the excursion grids");
    s->add_option("--grid-extent", rw.grid_extent, "grid half-width (0 = model default)");
    s->add_option("--nmax", rw.n_max, "kernel horizon (0 = model default)");
    s->add_option("--eps", rw.eps, "epsilon ladder (comma separated)")->delimiter(',');
    s->add_option("--N", rw.N, "length ladder (comma separated)")->delimiter(',');
    s->add_option("--samples", rw.samples, "Monte Carlo path count (0 = default)");
    s->add_option("--beta", rw.beta, "disorder strength (quenched)");
    s->add_option("--seeds", rw.seeds, "disorder draws (quenched)");
    s->add_option("--seed", rw.seed, "master RNG seed");
    s->add_option("--threads", rw.threads, "worker threads for kernel builds");
    s->add_flag("--bridge", rw.bridge, "repulsion: condition on returning to zero");
    s->add_option("--out", rw.out_dir, "output directory (default out/<subcommand>)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for pinning and wetting of an integrated walk"};
    app.require_subcommand(1);

    RawArgs rw;
    const struct {
        const char* name;
        const char* desc;
    } cmds[] = {
        {"spectral", "tilted-operator spectral radius ladder and critical epsilon"},
        {"free-energy", "free energy and contact fraction along an epsilon ladder"},
        {"phase-diagram", "pinning vs wetting critical points with grid refinement"},
        {"partition-check", "renewal representation against the transfer oracle"},
        {"renewal", "first-return law, row masses, and tail fits"},
        {"sample", "exact field samples and contact-set statistics"},
        {"repulsion", "positivity survival probability and its decay exponent"},
        {"llt-check", "local limit of the scaled pair (slope, area)"},
        {"quenched", "disordered pinning reward between its annealed bounds"},
    };
    for (const auto& c : cmds) {
        CLI::App* s = app.add_subcommand(c.name, c.desc);
        add_common_options(s, rw);
    }

    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();

    try {
        lpw::Config base;
        if (!rw.config_file.empty()) base = lpw::Config::from_file(rw.config_file);
        lpw::ExperimentConfig cfg = lpw::ExperimentConfig::from_config(base);
        cfg.command = sub->get_name();
        if (sub->count("--model")) cfg.model = rw.model[0];
        if (sub->count("--sigma")) cfg.sigma = rw.sigma;
        if (sub->count("--potential-file")) cfg.potential_file = rw.potential_file;
        if (sub->count("--grid-h")) cfg.grid_h = rw.grid_h;
        if (sub->count("--grid-extent")) cfg.grid_extent = rw.grid_extent;
        if (sub->count("--nmax")) cfg.n_max = static_cast<int>(rw.n_max);
        if (sub->count("--eps")) cfg.eps = rw.eps;
        if (sub->count("--N")) cfg.N = rw.N;
        if (sub->count("--samples")) cfg.samples = rw.samples;
        if (sub->count("--beta")) cfg.beta = rw.beta;
        if (sub->count("--seeds")) cfg.seeds = static_cast<int>(rw.seeds);
        if (sub->count("--seed")) cfg.seed = rw.seed;
        if (sub->count("--threads")) cfg.threads = static_cast<int>(rw.threads);
        if (sub->count("--bridge")) cfg.bridge = rw.bridge;
        if (sub->count("--out")) cfg.out_dir = rw.out_dir;
        if (cfg.out_dir.empty() || (!sub->count("--out") && cfg.out_dir == "out"))
            cfg.out_dir = "out/" + cfg.command;
        return lpw::run_experiment(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
