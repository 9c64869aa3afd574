#pragma once
#include <cstdint>
#include <memory>
#include <vector>

#include "lpw/fft.hpp"
#include "lpw/grid.hpp"
#include "lpw/potential.hpp"
#include "lpw/util.hpp"

namespace lpw {

// closed-form joint density of (Y_n, Z_n) at step n for Gaussian increments:
// Var(Y_n) = s^2 n, Cov = s^2 n(n+1)/2, Var(Z_n) = s^2 n(n+1)(2n+1)/6
double gaussian_joint_density(int n, double sigma, double y, double z);

// scaling limit density of (B_1, int_0^1 B_s ds) and its second marginal;
// the normalizing constant sqrt(3)/pi comes from the quadratic form itself
// (covariance [[1,1/2],[1/2,1/3]], det 1/12)
double llt_limit_density(double y, double z);
double llt_limit_marginal_z(double z);

struct JointDensityGrid {
    int n = 0;
    Grid1D ygrid, zgrid;  // shared spacing
    Mat values;           // (z rows, y cols), density units: mass = h^2 * sum
    double mass() const;
};

// Lattice propagation of (Y, Z): per z-row convolution with the step weights
// along y, then the shear z -> z + y. The two grids share one spacing, so the
// shear is an exact index shift and discrete mass is conserved to rounding.
// The z grid starts small and grows geometrically with the n^{3/2} support.
class JointPropagator {
public:
    // z_slope: optional extra floor z_extent >= z_slope * n, for callers that
    // read the density along rays z = n x and need those points on-grid even
    // at small n where the mass support alone would not cover them
    JointPropagator(const Potential& pot, int n_max, double h,
                    double cy = 8.0, double cz = 8.0, int nthreads = 1,
                    double z_slope = 0.0);

    void step();  // advance n -> n+1
    int n() const { return n_; }
    const JointDensityGrid& state() const { return state_; }

private:
    void ensure_extent(int n_next);
    void check_mass(const char* where);

    const Potential* pot_;
    int n_max_;
    int n_ = 2;
    double h_, cy_, cz_, sigma_, z_slope_;
    int nthreads_;
    std::vector<double> ker_;  // step weights, odd length 2K+1, sum exactly 1
    long khalf_ = 0;
    JointDensityGrid state_;
    Mat scratch_;
    long rlo_ = 0, rhi_ = -1;  // live z-row window
    std::vector<std::unique_ptr<Conv1D>> convs_;
};

// snapshots of the propagated joint density at the requested n values
std::vector<JointDensityGrid> propagate_joint_density(
    const Potential& pot, int n_max, double h,
    const std::vector<int>& snapshot_ns, double cy = 8.0, double cz = 8.0,
    int nthreads = 1);

struct LltRow {
    int n = 0;
    double sup_err = 0.0;           // sup |s^2 n^2 phi_n(scaled) - g|
    double marginal_sup_err = 0.0;  // same for the z marginal
};
std::vector<LltRow> llt_check(const Potential& pot, std::vector<int> ns,
                              double h, double cy = 8.0, double cz = 8.0,
                              int nthreads = 1);

struct WalkPath {
    std::vector<double> Y, Z;  // index 0..n; Y[0] = a, Z[0] = b
};
WalkPath sample_integrated_walk(const Potential& pot, int n, double a,
                                double b, std::uint64_t seed);

// step-weight vector used by the propagator (exposed for kernel builders):
// taps at j*h for j in [-K, K], normalized to sum exactly 1. Gaussian /
// smooth densities are point-sampled (trapezoid); tabulated densities use
// cell averages so that kinks do not break mass conservation.
std::vector<double> step_weights(const Potential& pot, double h, long& khalf);

}  // namespace lpw
