#pragma once
#include <cstddef>
#include <vector>

#include "lpw/kernel_stack.hpp"
#include "lpw/spectral.hpp"
#include "lpw/util.hpp"

namespace lpw {

// Normalized Markov-renewal kernel
//   k(n)(x, y) = eps e^{-F n} f(n)(x, y) v(y) / v(x),
// with v the eigenfunction at the tilt lambda = F(eps). Row and column index
// 0 is the atom at zero, 1..m the continuum nodes; the n = 1 slice charges
// only the atom and the n >= 2 slices only the continuum. Beyond n_max the
// slices continue as kh(n_max) * tail_factor-weighted c/n^2 decay.
struct MarkovRenewalKernel {
    char model = 'p';
    double epsilon = 0.0;
    double F = 0.0;        // tilt actually used (free energy at epsilon)
    double eps_c = 0.0;    // 1/delta(0) on the same stack
    double defect = 0.0;   // 1 - min(epsilon/eps_c, 1)
    int n_max = 0;
    std::vector<double> mu;  // [atom weight, continuum weights]
    std::vector<double> z;   // state heights: z[0] = 0 (atom), then nodes
    double grid_h = 0.0;     // continuum node spacing
    std::vector<double> v;   // tilt eigenfunction over [atom, nodes]
    std::vector<double> k1;  // n = 1 jump density x_i -> atom
    std::vector<Mat> kh;     // kh[n-2]: n >= 2 slice, column 0 identically 0
    double tail_factor = 0.0;  // sum_{n>n_max} slice = kh(n_max) * tail_factor
    std::size_t i0 = 0;        // row index of the continuum node at zero

    std::size_t states() const { return mu.size(); }
    const Mat& slice(int n) const {
        if (n < 2 || n > n_max) fail("MarkovRenewalKernel::slice: bad n");
        return kh[static_cast<std::size_t>(n - 2)];
    }
};

// builds the kernel from a stack and the spectral solution at the tilt
// lambda = F(epsilon); fails if the row-mass identity (total outgoing mass
// equal to min(eps/eps_c, 1)) is violated by more than 1e-6 at any node
MarkovRenewalKernel build_markov_kernel(const KernelStack& st,
                                        const SpectralSolution& sol,
                                        double epsilon);

// total outgoing mass per state, tail included
std::vector<double> kernel_row_mass(const MarkovRenewalKernel& k);

// transition matrix of the modulating height chain, D = sum_n K(n), with
// mu-weights folded in (rows are probability vectors up to the defect)
Mat modulating_transition(const MarkovRenewalKernel& k);

// law of the first double-contact return time and its renewal mass function
struct RenewalLaw {
    std::vector<double> q;  // q[n] = P(chi_1 = n), exact up to horizon
    std::vector<double> u;  // u[n] = P(n in chi), u[0] = 1
    int horizon = 0;
    double mass = 0.0;      // sum q + fitted-tail mass
    double defect = 0.0;    // kernel defect, repeated for convenience
    double C_fit = 0.0;     // fixed-rate fit: q(n) ~ C e^{-F n} / n^2
    double F_fit = 0.0;     // free-rate least-squares fit of the decay
    double fit_spread = 0.0;  // max |n^2 e^{Fn} q / C_fit - 1| on last octave
    double mean = 0.0;        // sum n q(n) + tail (valid when finite)
    bool mean_diverges = false;  // F = 0: mean grows with the cutoff
};

// iterates the hatted kernel (atom removed) from the atom, absorbing into
// the atom one unit step later; q is exact for n <= horizon given the
// kernel's n_max-tail model, u follows by the renewal recursion
RenewalLaw chi_interarrival_law(const MarkovRenewalKernel& k,
                                int horizon = 512);

// Z = e^{F (N+1)} eps^{-2} u(N+1), the skeleton representation of the
// partition function (the accepted-event paths span N+1 kernel steps)
double partition_function_renewal(const MarkovRenewalKernel& k,
                                  const RenewalLaw& law, int N);

// mean return time to the double contact state at criticality, evaluated
// through the invariant-measure identity: 1 + eps_c * <w/w0, M v/v0>_mu with
// M = sum_n n f(n), the n-sum completed by the 1/(n^2 (log n)^{c}) decay.
// tail_fraction (optional out) reports the completed share of the n-sum;
// a share above 20% is the documented warning threshold.
double mean_chi_wetting(const KernelStack& st, const SpectralSolution& sol,
                        double* tail_fraction = nullptr);

}  // namespace lpw
