#pragma once
#include <cstddef>
#include <vector>
#include <cmath>
#include "lpw/util.hpp"

namespace lpw {

// uniform grid with nodes k*h for integer k in [ilo, ihi]; keeping nodes as
// integer multiples of h makes "is this node exactly 0 / exactly u" an index
// comparison instead of a float comparison
struct Grid1D {
    double h = 0.0;
    long ilo = 0, ihi = -1;

    static Grid1D symmetric(double extent, double h) {
        long k = static_cast<long>(std::ceil(extent / h - 1e-12));
        return Grid1D{h, -k, k};
    }
    static Grid1D half_line(double extent, double h) {
        long k = static_cast<long>(std::ceil(extent / h - 1e-12));
        return Grid1D{h, 0, k};
    }

    std::size_t size() const { return static_cast<std::size_t>(ihi - ilo + 1); }
    double node(std::size_t k) const { return (ilo + static_cast<long>(k)) * h; }
    // index of the node at exactly 0; grids used here always contain it
    std::size_t zero_index() const { return static_cast<std::size_t>(-ilo); }

    std::vector<double> nodes() const {
        std::vector<double> v(size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = node(k);
        return v;
    }
    std::vector<double> trap_weights() const {
        std::vector<double> w(size(), h);
        if (!w.empty()) { w.front() = 0.5 * h; w.back() = 0.5 * h; }
        return w;
    }
};

// continuum part of mu = delta_0 + dx, discretized with trapezoid weights;
// the atom is kept separate from the continuum node at 0
struct GriddedMeasure {
    Grid1D grid;
    std::vector<double> weights;   // continuum quadrature weights
    double atom_weight = 1.0;
    bool half_line = false;

    static GriddedMeasure make(double extent, double h, bool half_line) {
        GriddedMeasure m;
        m.grid = half_line ? Grid1D::half_line(extent, h) : Grid1D::symmetric(extent, h);
        m.weights = m.grid.trap_weights();
        m.half_line = half_line;
        return m;
    }
    std::size_t size() const { return grid.size(); }
};

// piecewise-uniform grid for the integrated coordinate: a fine zone with
// spacing h on [kflo*h, kfhi*h] plus coarse extensions with spacing hc on
// both sides. The fine spacing always matches the velocity grid so the shear
// step is an exact index shift inside the fine zone.
struct ZGrid {
    double h = 0.0, hc = 0.0;
    long kflo = 0, kfhi = -1;   // fine-zone node indices (times h)
    long ncneg = 0, ncpos = 0;  // number of coarse nodes below / above

    std::size_t nfine() const { return static_cast<std::size_t>(kfhi - kflo + 1); }
    std::size_t size() const { return static_cast<std::size_t>(ncneg + ncpos) + nfine(); }
    double fine_lo() const { return kflo * h; }
    double fine_hi() const { return kfhi * h; }

    double node(std::size_t k) const {
        long i = static_cast<long>(k);
        if (i < ncneg) return fine_lo() - (ncneg - i) * hc;
        i -= ncneg;
        if (i < static_cast<long>(nfine())) return (kflo + i) * h;
        return fine_hi() + (i - static_cast<long>(nfine()) + 1) * hc;
    }
    // global index of the fine node with integer coordinate k (node value k*h)
    std::size_t fine_index(long k) const { return static_cast<std::size_t>(ncneg + (k - kflo)); }
    bool has_fine(long k) const { return k >= kflo && k <= kfhi; }

    // locate q for linear interpolation: j such that node(j) <= q <= node(j+1),
    // t the fractional offset. Returns false when q is outside the grid.
    bool locate(double q, std::size_t& j, double& t) const {
        const double lo = fine_lo(), hi = fine_hi();
        if (q < lo) {
            double offs = (q - (lo - ncneg * hc)) / hc;
            if (offs < 0.0) return false;
            long i = static_cast<long>(offs);
            if (i >= ncneg) i = ncneg - 1;
            j = static_cast<std::size_t>(i);
            t = offs - i;
            return true;
        }
        if (q <= hi) {
            double offs = (q - lo) / h;
            long i = static_cast<long>(offs);
            if (i >= static_cast<long>(nfine()) - 1) i = static_cast<long>(nfine()) - 2;
            if (i < 0) i = 0;
            j = static_cast<std::size_t>(ncneg + i);
            t = (q - lo - i * h) / h;
            return true;
        }
        double offs = (q - hi) / hc;
        if (offs > ncpos) return false;
        long i = static_cast<long>(offs);
        if (i >= ncpos) i = ncpos - 1;
        j = static_cast<std::size_t>(ncneg) + nfine() - 1 + static_cast<std::size_t>(i);
        t = offs - i;
        return true;
    }

    double interp(const double* vals, double q) const {
        std::size_t j; double t;
        if (!locate(q, j, t)) return 0.0;
        return vals[j] * (1.0 - t) + vals[j + 1] * t;
    }

    std::vector<double> nodes() const {
        std::vector<double> v(size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = node(k);
        return v;
    }
    std::vector<double> trap_weights() const {
        std::size_t n = size();
        std::vector<double> w(n, 0.0);
        if (n < 2) { if (n == 1) w[0] = h; return w; }
        std::vector<double> z = nodes();
        w[0] = 0.5 * (z[1] - z[0]);
        w[n - 1] = 0.5 * (z[n - 1] - z[n - 2]);
        for (std::size_t k = 1; k + 1 < n; ++k) w[k] = 0.5 * (z[k + 1] - z[k - 1]);
        return w;
    }
};

} // namespace lpw
