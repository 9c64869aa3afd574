#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "lpw/io.hpp"

namespace lpw {

// one experiment = one subcommand + a fully serializable parameter set; a
// run is reproducible from the echoed configuration and the seed alone
struct ExperimentConfig {
    std::string command;        // spectral | free-energy | phase-diagram |
                                // partition-check | renewal | sample |
                                // repulsion | llt-check | quenched
    char model = 'p';           // 'p' pinning | 'w' wetting
    double sigma = 1.0;         // Gaussian increment scale (ignored with a table)
    std::string potential_file; // empty: Gaussian potential with scale sigma
    double grid_h = 0.25;       // node spacing of the excursion grids
    double grid_extent = 0.0;   // 0: model default (24 pinning, 12 wetting)
    int n_max = 0;              // 0: model default (128 pinning, 64 wetting)
    std::vector<double> eps;    // epsilon ladder; empty: command default
    std::vector<int> N;         // length ladder; empty: command default
    long samples = 0;           // Monte Carlo paths; 0: command default
    double beta = 0.5;          // disorder strength (quenched)
    int seeds = 64;             // disorder draws (quenched)
    std::uint64_t seed = 1;     // master RNG seed
    int threads = 1;
    bool bridge = false;        // repulsion: condition on the double return
    std::string out_dir = "out";
    double tol_row_mass = 1e-6;     // renewal row-mass identity
    double tol_partition = 0.02;    // renewal-vs-transfer relative gap
    double tol_tail_spread = 0.10;  // flatness of n^2 e^{Fn} q(n) fits

    static ExperimentConfig from_config(const Config& c);
    Config to_config() const;  // every key, defaults resolved where fixed
};

// pass/fail bookkeeping shared by all subcommands; every add() prints one
// "[PASS] ..." or "[FAIL] ..." line so logs are greppable
struct CheckList {
    struct Item {
        std::string name;
        bool pass = false;
        std::string detail;
    };
    std::vector<Item> items;

    bool add(const std::string& name, bool pass, const std::string& detail);
    bool all() const;
};

// runs one experiment, writes the output directory (config echo, versioned
// format tag, CSV/JSON/SVG artifacts, machine-checkable summary.json), and
// returns 0 when every check passed, 1 otherwise; invalid inputs and module
// invariant violations surface as exceptions for the caller to report
int run_experiment(const ExperimentConfig& cfg);

extern const char* const kOutputFormatTag;  // stamped into every summary

}  // namespace lpw
