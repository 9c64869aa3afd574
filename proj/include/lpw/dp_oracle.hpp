#pragma once
#include <cstdint>
#include <vector>

#include "lpw/potential.hpp"

namespace lpw {

// Transfer-matrix oracle over the order-2 Markov state (phi_{n-1}, phi_n).
// The chain starts and ends clamped to zero at two consecutive sites; the
// interior sites carry the mixed measure (eps at zero plus the continuum),
// restricted to phi >= 0 in the wetting model. Each step costs one fast
// convolution per occupied column, so a sweep is O(G^2 log G) on a G-point
// field grid.
struct DpParams {
    double h = 0.25;       // field grid step
    double extent = 0.0;   // field range; 0 = start at 16 and grow until
                           // log Z stops moving between doublings
    int max_doublings = 5; // growth attempts in auto mode
    bool verify = true;    // confirm an explicit extent against its half
};

struct DpResult {
    double log_z = 0.0;
    double extent = 0.0;       // extent actually used
    double leak = 0.0;         // |log Z| gap against the next smaller extent,
                               // a bound on the relative truncation error
    std::size_t grid_points = 0;
};

// log partition function; fails when the truncation gap exceeds 1e-6 at the
// requested extent (auto mode doubles the extent and retries instead)
DpResult dp_partition(const Potential& pot, char model, double epsilon, int N,
                      const DpParams& prm = {});

// contact fraction D_N = (1/N) d log Z / d log eps by central differences
double dp_contact_fraction(const Potential& pot, char model, double epsilon,
                           int N, const DpParams& prm = {}, double t = 1e-3);

// free-energy profile over a log-epsilon ladder with difference diagnostics
struct ConvexityTable {
    std::vector<double> t;   // log eps ladder
    std::vector<double> f;   // (1/N) log Z at each ladder point
    double min_first_difference = 0.0;
    double min_second_difference = 0.0;
};

ConvexityTable dp_convexity_check(const Potential& pot, char model,
                                  double t_lo, double t_hi, int npts, int N,
                                  const DpParams& prm = {});

// quenched disorder: site i rewards contact with eps * e^{beta omega_i},
// omega i.i.d. standard normal per seed; returns per-seed (1/N) log Z
struct QuenchedSample {
    std::vector<double> f;
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;
};

QuenchedSample dp_quenched(const Potential& pot, char model, double epsilon,
                           double beta, int N, const DpParams& prm = {},
                           int seeds = 64, std::uint64_t base_seed = 1);

}  // namespace lpw
