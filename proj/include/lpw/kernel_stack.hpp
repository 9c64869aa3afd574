#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "lpw/grid.hpp"
#include "lpw/potential.hpp"
#include "lpw/util.hpp"

namespace lpw {

// Excursion kernels f_{x,y}(n) over a shared (x, y) node grid, n = 1..n_max.
// n = 1 charges only the atom at y = 0 (column stored separately); n >= 2
// charges only the continuum. Wetting stacks ('w') live on the half line and
// carry the positivity restriction; by construction f_w <= f_p pointwise.
struct KernelStack {
    char model = 'p';  // 'p' pinning (full line) | 'w' wetting (half line)
    int n_max = 0;
    GriddedMeasure meas;          // x and y share this measure
    std::vector<double> atom1;    // f_{x,0}(1) = e^{-V(x)} per x node
    std::vector<Mat> cont;        // cont[n-2] = f(n) over (x, y), n = 2..n_max
    double tail_constant = 0.0;   // n_max^2 f_{0,0}(n_max), the c of f ~ c/n^2
    std::uint64_t pot_fingerprint = 0;
    double sigma = 1.0;
    double eV0 = 0.0;             // e^{-V(0)}, cached for operator sandwiches

    const Mat& fn(int n) const {
        if (n < 2 || n > n_max) fail("KernelStack::fn: n outside [2, n_max]");
        return cont[static_cast<std::size_t>(n - 2)];
    }
    std::size_t nodes() const { return meas.size(); }
    std::size_t zero_node() const { return meas.grid.zero_index(); }
};

struct StackParams {
    double extent = 18.0;  // x half-width (pinning) or width of [0, extent] (wetting)
    double h = 0.25;       // x/y node spacing
    int n_max = 128;
    int nthreads = 1;
    double hc = 2.0;       // coarse spacing of the wetting propagation z-grid
    double walk_h = 0.0;   // lattice spacing for tabulated reads; 0 -> h
};

// pinning: f_p(n)(x, y) = density of (x - y, n x) at step n. Gaussian
// potentials use the closed form; tabulated ones read the propagated lattice.
KernelStack build_pinning_stack(const Potential& pot, const StackParams& prm);

// wetting: restricted propagation started from (-x, 0), one run per x node;
// mass below the wall is discarded and the result is clamped by the pinning
// kernel so the domination invariant holds exactly on the grid.
KernelStack build_wetting_stack(const Potential& pot, const StackParams& prm);

struct KernelBoundsRow {
    int n = 0;
    double max_n2_f = 0.0;       // max_{x,y} n^2 f(n)
    double max_row_int = 0.0;    // max_x n^{3/2} int f(n)(x, dy)
    double max_col_int = 0.0;    // max_y n^{3/2} int f(n)(dx, y)
};
std::vector<KernelBoundsRow> kernel_row_integrals(const KernelStack& st);

// binary container with a JSON header line (grid spec, potential hash, n_max)
void save_stack(const KernelStack& st, const std::string& path);
KernelStack load_stack(const std::string& path);

// w_{x,y}(n) = f_w / f_p on the shared grid (diagnostic; 0/0 -> 0)
Mat wetting_weight_ratio(const KernelStack& wet, const KernelStack& pin, int n);

}  // namespace lpw
