#pragma once
#include <cstdint>
#include <vector>

#include "lpw/potential.hpp"
#include "lpw/renewal.hpp"
#include "lpw/rng.hpp"

namespace lpw {

// contact skeleton of one field draw: renewal epochs tau (field zeros) and
// the height one site before each epoch. tau[0] = 0 and tau.back() = N + 1,
// where both closing sites carry a double zero (J = 0)
struct ContactSkeleton {
    std::vector<long> tau;
    std::vector<double> J;
    long attempts = 1;  // chain starts consumed, the accepted one included
};

struct SkeletonParams {
    double accept_floor = 1e-4;  // smallest tolerated acceptance u(N+1)
    long max_attempts = 0;       // 0: sized from the acceptance probability
};

// Inverse-CDF tables over the renewal kernel for repeated skeleton draws.
// Jump targets are drawn on the continuum: the tables hold per-cell masses
// of the piecewise-linear row density, the landing cell is inverted to a
// real height, and the next row is the matching linear blend of the two
// bracketing node rows. A draw is accepted when the chain hits the atom at
// exactly N + 1; overshoots, continuum landings at N + 1 and defective
// kills restart the attempt, which is what conditioning on the closing
// double zero means.
class SkeletonSampler {
public:
    SkeletonSampler(const MarkovRenewalKernel& k, int N,
                    const SkeletonParams& prm = {},
                    const RenewalLaw* law = nullptr);

    ContactSkeleton draw(Rng& rng) const;

    // one unconditioned first return to the atom; -1 when the chain is
    // killed (defective kernel), cap when censored
    long first_return(Rng& rng, long cap = 1L << 20) const;

    const RenewalLaw& law() const { return law_; }
    double acceptance() const { return accept_; }
    int N() const { return N_; }
    char model() const { return model_; }

private:
    struct Landing {
        long n = 0;        // jump length
        double y = 0.0;    // landing height (0 for the atom)
        int cell = -1;     // continuum cell index, -1 for the atom
        double frac = 0.0; // position inside the cell
        bool dead = false; // defective kill
    };
    Landing hop(Rng& rng, int cell, double frac, long remaining_cap) const;
    double node_density(int row, int slice, std::size_t state) const;

    const MarkovRenewalKernel* k_ = nullptr;
    RenewalLaw law_;
    int N_ = 0;
    char model_ = 'p';
    double accept_ = 0.0;
    long max_attempts_ = 0;
    std::size_t ncells_ = 0;    // continuum cells per row
    std::size_t stride_ = 0;    // cumulative-table entries per row
    std::vector<double> cum_;   // per-row cumulative masses, flattened
    std::vector<double> total_; // per-row outgoing mass
};

// convenience wrapper building the tables for a single draw
ContactSkeleton sample_contact_skeleton(const MarkovRenewalKernel& k, int N,
                                        std::uint64_t seed,
                                        const SkeletonParams& prm = {});

// Interior of one excursion between contacts: entry pair (x, 0), exit pair
// (y, 0) after n steps; returns the n - 1 interior values, the last equal
// to y. The Gaussian case draws the conditioned integrated walk exactly
// (wetting by rejection on positivity); tabulated potentials propagate the
// pair density forward on a grid and sample backward through the stored
// slices, so long excursions are bounded by the table budget.
struct FillParams {
    double h = 0.25;                     // table grid step
    std::size_t max_bytes = 1u << 28;    // forward-slice budget
    long max_tries = 1000000;            // positivity rejection budget
};

std::vector<double> fill_excursion(const Potential& pot, char model, double x,
                                   double y, int n, Rng& rng,
                                   const FillParams& prm = {});
std::vector<double> fill_excursion(const Potential& pot, char model, double x,
                                   double y, int n, std::uint64_t seed,
                                   const FillParams& prm = {});

// complete field draw and its contact statistics
struct FieldSample {
    std::vector<double> phi;  // phi_0..phi_N (phi_{N+1} = 0 implicit)
    std::vector<long> tau;    // contact sites in [0, N]
    std::vector<long> chi;    // double-contact sites in [0, N]
    long ell = 0;             // contacts in [1, N]
    long iota = 0;            // double contacts in [0, N]
    long gap = 0;             // largest spacing between consecutive contacts
    double sup_abs = 0.0;     // sup |phi| over [0, N]
};

// recompute tau, chi and the summary statistics from phi alone (phi_{-1} is
// the boundary zero, so index 0 is a double contact whenever phi_0 = 0)
void compute_field_stats(FieldSample& fs);

FieldSample sample_field(const SkeletonSampler& sk, const Potential& pot,
                         Rng& rng, const FillParams& fp = {});
FieldSample sample_field(const MarkovRenewalKernel& k, const Potential& pot,
                         int N, std::uint64_t seed, const FillParams& fp = {});

// empirical law of the contact statistics over n_samples field draws
struct PathStatsTable {
    int N = 0;
    std::vector<double> ell_frac;   // per-sample ell / N
    std::vector<double> iota_frac;  // per-sample iota / N
    std::vector<double> gap_frac;   // per-sample gap / N
    std::vector<double> sup_abs;    // per-sample sup |phi|
    double mean_ell = 0.0, se_ell = 0.0;
    double mean_iota = 0.0, se_iota = 0.0;
    double mean_gap = 0.0, mean_sup = 0.0;
    double rejection_rate = 0.0;  // rejected chain starts / total starts
};

PathStatsTable path_statistics_experiment(const MarkovRenewalKernel& k,
                                          const Potential& pot, int N,
                                          int n_samples, std::uint64_t seed,
                                          const FillParams& fp = {});

// Survival Monte Carlo for the positivity event of the integrated walk.
// Free mode runs one pass of killed paths with checkpoints at the requested
// N values and also tracks positivity of the increment walk Y (a pathwise
// subset, so p >= p_y row by row). Bridge mode conditions both walks to
// return to zero at N (Gaussian only) and runs one pass per N. The exponent
// is the weighted log-log slope over the largest octave of N values.
struct RepulsionRow {
    int N = 0;
    long survivors = 0;
    double p = 0.0, se = 0.0;
    double p_y = 0.0, se_y = 0.0;  // free mode only
};

struct RepulsionFit {
    std::vector<RepulsionRow> rows;
    bool bridge = false;
    double exponent = 0.0;
    double exponent_se = 0.0;
    bool widened = false;  // fewer than 100 survivors at the largest N
};

RepulsionFit entropic_repulsion_mc(const Potential& pot,
                                   std::vector<int> N_list, long n_samples,
                                   std::uint64_t seed, bool bridge);

}  // namespace lpw
