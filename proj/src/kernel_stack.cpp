#include "lpw/kernel_stack.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "lpw/fft.hpp"
#include "lpw/walk_density.hpp"

namespace lpw {
namespace {

constexpr double kTol = 1e-9;

// ------------------------------------------------------------------ pinning

// closed-form Gaussian read: f(n)(x, y) = density of (x - y, n x)
void fill_pinning_gaussian(const Potential& pot, KernelStack& st) {
    std::size_t m = st.nodes();
    std::vector<double> xs = st.meas.grid.nodes();
    for (int n = 2; n <= st.n_max; ++n) {
        Mat& f = st.cont[static_cast<std::size_t>(n - 2)];
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                f(i, j) = gaussian_joint_density(n, pot.sigma(), xs[i] - xs[j],
                                                 n * xs[i]);
    }
}

// tabulated read: lattice propagation, node-exact when walk_h == h
void fill_pinning_tabulated(const Potential& pot, KernelStack& st,
                            const StackParams& prm) {
    double hw = prm.walk_h > 0.0 ? prm.walk_h : prm.h;
    double sigma = pot.sigma();
    double cy = std::max(8.0, (2.0 * prm.extent) /
                                  (sigma * std::sqrt((double)prm.n_max)) + 1.0);
    JointPropagator prop(pot, st.n_max, hw, cy, 8.0, prm.nthreads,
                         prm.extent + hw);
    std::vector<double> xs = st.meas.grid.nodes();
    std::size_t m = st.nodes();
    for (int n = 2; n <= st.n_max; ++n) {
        while (prop.n() < n) prop.step();
        const JointDensityGrid& g = prop.state();
        Mat& f = st.cont[static_cast<std::size_t>(n - 2)];
        for (std::size_t i = 0; i < m; ++i) {
            double z = n * xs[i];
            double zq = z / hw - g.zgrid.ilo;
            long iz = static_cast<long>(std::floor(zq));
            double tz = zq - iz;
            if (iz < 0 || iz + 1 >= static_cast<long>(g.zgrid.size()))
                fail("build_pinning_stack: read point (x, n x) off the density "
                     "grid at n = " + std::to_string(n));
            for (std::size_t j = 0; j < m; ++j) {
                double yq = (xs[i] - xs[j]) / hw - g.ygrid.ilo;
                long iy = static_cast<long>(std::floor(yq));
                double ty = yq - iy;
                if (iy < 0 || iy + 1 >= static_cast<long>(g.ygrid.size()))
                    fail("build_pinning_stack: read point (x - y) off the "
                         "density grid at n = " + std::to_string(n));
                double v00 = g.values(static_cast<std::size_t>(iz),
                                      static_cast<std::size_t>(iy));
                double v01 = g.values(static_cast<std::size_t>(iz),
                                      static_cast<std::size_t>(iy + 1));
                double v10 = g.values(static_cast<std::size_t>(iz + 1),
                                      static_cast<std::size_t>(iy));
                double v11 = g.values(static_cast<std::size_t>(iz + 1),
                                      static_cast<std::size_t>(iy + 1));
                f(i, j) = (1 - tz) * ((1 - ty) * v00 + ty * v01) +
                          tz * ((1 - ty) * v10 + ty * v11);
            }
        }
    }
}

// ------------------------------------------------------------------ wetting

// propagation state for one start point x: density r_k(u = Y_k, w = Z_k) of
// the walk started at (-x, 0), killed below the wall, k the step index.
// Rows are w (piecewise-uniform ZGrid), columns u (uniform, spacing h).
struct WetRun {
    Grid1D ugrid;
    ZGrid zgrid;
    Mat state;  // (nz, nu)

    // column index of the u node equal to the row value w, or -1
    long diag_col(double w) const {
        double q = w / ugrid.h;
        long ju = static_cast<long>(std::llround(q));
        if (std::abs(ju * ugrid.h - w) > kTol) return -1;
        if (ju < ugrid.ilo || ju > ugrid.ihi) return -1;
        return ju - ugrid.ilo;
    }
};

// shared per-run scratch: conv engine plus row buffers
struct WetScratch {
    Conv1D conv;
    std::vector<double> in, out;
    Mat convd;  // convolved state (nz, nu)
    WetScratch(std::size_t nu, const std::vector<double>& ker)
        : conv(nu, ker.size()), in(nu), out(nu) {
        conv.set_kernel(ker.data());
    }
};

// convolve along u with the step weights, halving the w == u diagonal sample
// (the restricted density jumps there, trapezoid wants the midpoint value)
void conv_rows_halved(const WetRun& run, WetScratch& sc) {
    std::size_t nz = run.zgrid.size(), nu = run.ugrid.size();
    if (sc.convd.nr != nz || sc.convd.nc != nu) sc.convd = Mat(nz, nu);
    for (std::size_t iw = 0; iw < nz; ++iw) {
        const double* src = run.state.row(iw);
        double w = run.zgrid.node(iw);
        long dc = run.diag_col(w);
        if (dc >= 0) {
            std::memcpy(sc.in.data(), src, nu * sizeof(double));
            sc.in[static_cast<std::size_t>(dc)] *= 0.5;
            sc.conv.conv_same(sc.in.data(), sc.convd.row(iw));
        } else {
            sc.conv.conv_same(src, sc.convd.row(iw));
        }
    }
}

// one step of the restricted propagation: conv along u, shear z -> z + u,
// discard mass below the wall
void wet_step(WetRun& run, WetScratch& sc) {
    conv_rows_halved(run, sc);
    std::size_t nz = run.zgrid.size(), nu = run.ugrid.size();
    for (std::size_t iz = 0; iz < nz; ++iz) {
        double wnew = run.zgrid.node(iz);
        double* out = run.state.row(iz);
        if (wnew < -kTol) {
            std::memset(out, 0, nu * sizeof(double));
            continue;
        }
        for (std::size_t iu = 0; iu < nu; ++iu) {
            double q = wnew - run.ugrid.node(iu);
            std::size_t j;
            double t;
            if (run.zgrid.locate(q, j, t))
                out[iu] = sc.convd(j, iu) * (1.0 - t) + sc.convd(j + 1, iu) * t;
            else
                out[iu] = 0.0;
        }
    }
}

// kernel read at n = k + 2 from the state r_k: integrate the last two steps
// against the wall-aware w weights; only w < wcap contributes (the factor
// e^{-V(w - 2y)} kills the rest)
void wet_read(const WetRun& run, WetScratch& sc, const Potential& pot,
              const std::vector<double>& ys, double wcap, double* out_row) {
    std::size_t nu = run.ugrid.size(), ny = ys.size();
    std::vector<double> wallw = run.zgrid.trap_weights();
    std::size_t jmax = 0;
    while (jmax < run.zgrid.size() && run.zgrid.node(jmax) < wcap) ++jmax;
    for (std::size_t j = 0; j < jmax; ++j) {
        double w = run.zgrid.node(j);
        if (w < -kTol) wallw[j] = 0.0;
        else if (std::abs(w) <= kTol)
            wallw[j] = 0.5 * (run.zgrid.node(j + 1) - w);
    }
    std::fill(out_row, out_row + ny, 0.0);
    double hu = run.ugrid.h;
    long ilo = run.ugrid.ilo;
    for (std::size_t j = 0; j < jmax; ++j) {
        if (wallw[j] == 0.0) continue;
        double w = run.zgrid.node(j);
        const double* src = run.state.row(j);
        long dc = run.diag_col(w);
        const double* crow;
        if (dc >= 0) {
            std::memcpy(sc.in.data(), src, nu * sizeof(double));
            sc.in[static_cast<std::size_t>(dc)] *= 0.5;
            sc.conv.conv_same(sc.in.data(), sc.out.data());
            crow = sc.out.data();
        } else {
            sc.conv.conv_same(src, sc.out.data());
            crow = sc.out.data();
        }
        for (std::size_t iy = 0; iy < ny; ++iy) {
            double y = ys[iy];
            double q = (y - w) / hu - ilo;  // u position of Y_{n-1} = y - w
            long iq = static_cast<long>(std::floor(q));
            if (iq < 0 || iq + 1 >= static_cast<long>(nu)) continue;
            double t = q - iq;
            double c = crow[iq] * (1.0 - t) + crow[iq + 1] * t;
            out_row[iy] += c * pot.density(w - 2.0 * y) * wallw[j];
        }
    }
}

// restricted three-step kernel by direct quadrature over the single free
// interior point u = Z_1 >= 0 (wall node at half weight)
double wet_f3(const Potential& pot, double x, double y) {
    double R = pot.support_bound();
    double hq = 0.02 * pot.sigma();
    long K = static_cast<long>(std::ceil(1.5 * R / hq));
    double acc = 0.0;
    for (long k = 0; k <= K; ++k) {
        double u = k * hq;
        double wq = (k == 0 || k == K) ? 0.5 * hq : hq;
        acc += pot.density(u + x) * pot.density(y - 2.0 * u) *
               pot.density(u - 2.0 * y) * wq;
    }
    return acc;
}

void init_stack(KernelStack& st, const Potential& pot, const StackParams& prm,
                bool half_line) {
    if (prm.n_max < 2) fail("build stack: n_max must be >= 2");
    st.n_max = prm.n_max;
    st.meas = GriddedMeasure::make(prm.extent, prm.h, half_line);
    st.pot_fingerprint = pot.fingerprint();
    st.sigma = pot.sigma();
    st.eV0 = pot.density(0.0);
    std::size_t m = st.nodes();
    st.atom1.resize(m);
    std::vector<double> xs = st.meas.grid.nodes();
    for (std::size_t i = 0; i < m; ++i) st.atom1[i] = pot.density(xs[i]);
    st.cont.assign(static_cast<std::size_t>(prm.n_max - 1), Mat(m, m));
}

void set_tail_constant(KernelStack& st) {
    std::size_t z = st.zero_node();
    st.tail_constant =
        static_cast<double>(st.n_max) * st.n_max * st.fn(st.n_max)(z, z);
}

KernelStack build_pinning_on(const Potential& pot, const StackParams& prm,
                             bool half_line) {
    KernelStack st;
    st.model = 'p';
    init_stack(st, pot, prm, half_line);
    if (pot.is_gaussian())
        fill_pinning_gaussian(pot, st);
    else
        fill_pinning_tabulated(pot, st, prm);
    set_tail_constant(st);
    return st;
}

}  // namespace

KernelStack build_pinning_stack(const Potential& pot, const StackParams& prm) {
    return build_pinning_on(pot, prm, false);
}

KernelStack build_wetting_stack(const Potential& pot, const StackParams& prm) {
    KernelStack st;
    st.model = 'w';
    // an entry height above the one-step support cannot start an excursion
    // (the next field value would be forced negative), so nodes past the
    // support are dead states; cap the grid there to keep them out
    StackParams capped = prm;
    capped.extent = std::min(prm.extent, pot.support_bound());
    init_stack(st, pot, capped, true);
    std::size_t m = st.nodes();
    std::vector<double> xs = st.meas.grid.nodes();

    // pinning reference on the same half-line node set, for the exact clamp
    KernelStack ref = build_pinning_on(pot, capped, true);

    // n = 2: no interior constraint yet, so the wetting kernel equals the
    // pinning one on the quadrant (clamped so domination holds bit-exactly)
    {
        Mat& f2 = st.cont[0];
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                f2(i, j) = std::min(pot.density(xs[i] + xs[j]) *
                                        pot.density(-2.0 * xs[j]),
                                    ref.fn(2)(i, j));
    }
    if (st.n_max >= 3) {
        Mat& f3 = st.cont[1];
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                f3(i, j) = std::min(wet_f3(pot, xs[i], xs[j]),
                                    ref.fn(3)(i, j));
    }

    // n >= 4: one restricted propagation per start node x
    double R = pot.support_bound();
    double sigma = pot.sigma();
    double wcap = 2.0 * capped.extent + R;
    double zfine = std::max(wcap + 2.0, 3.0 * R + 2.0);
    double zmax = 8.0 * sigma * std::pow((double)prm.n_max, 1.5) + 4.0;
    long kq;  // unused out-param for the kernel builder
    std::vector<double> ker = step_weights(pot, prm.h, kq);

    parallel_for(m, prm.nthreads, [&](std::size_t ix) {
        double x = xs[ix];
        WetRun run;
        double Lu = 8.0 * sigma * std::sqrt((double)prm.n_max) + x + 4.0 * sigma;
        run.ugrid = Grid1D::symmetric(Lu, prm.h);
        run.zgrid.h = prm.h;
        run.zgrid.hc = prm.hc;
        run.zgrid.kflo = -static_cast<long>(std::llround(1.0 / prm.h));
        run.zgrid.kfhi = static_cast<long>(std::llround(zfine / prm.h));
        run.zgrid.ncneg = 0;
        run.zgrid.ncpos = static_cast<long>(
            std::ceil((zmax - run.zgrid.fine_hi()) / prm.hc));
        run.state = Mat(run.zgrid.size(), run.ugrid.size());

        // k = 2 start: with Z_1 = w - u >= 0 and Z_2 = w >= 0, the two
        // increments are w - u + x and 2u - w; nodes on the jump line u = w
        // carry the full right-limit value (halved only at quadrature time)
        std::size_t nu = run.ugrid.size(), nz = run.zgrid.size();
        for (std::size_t iw = 0; iw < nz; ++iw) {
            double w = run.zgrid.node(iw);
            double* rowp = run.state.row(iw);
            if (w < -kTol) continue;
            for (std::size_t iu = 0; iu < nu; ++iu) {
                double u = run.ugrid.node(iu);
                if (w - u < -kTol) continue;
                rowp[iu] = pot.density(w - u + x) * pot.density(2.0 * u - w);
            }
        }

        WetScratch sc(nu, ker);
        std::vector<double> row(m);
        for (int k = 2; k <= prm.n_max - 2; ++k) {
            int n = k + 2;
            wet_read(run, sc, pot, xs, wcap, row.data());
            Mat& f = st.cont[static_cast<std::size_t>(n - 2)];
            const Mat& fp = ref.fn(n);
            for (std::size_t j = 0; j < m; ++j)
                f(ix, j) = std::min(row[j], fp(ix, j));
            if (k < prm.n_max - 2) wet_step(run, sc);
        }
    });

    set_tail_constant(st);
    return st;
}

std::vector<KernelBoundsRow> kernel_row_integrals(const KernelStack& st) {
    std::vector<KernelBoundsRow> out;
    std::size_t m = st.nodes();
    const std::vector<double>& w = st.meas.weights;
    for (int n = 2; n <= st.n_max; ++n) {
        const Mat& f = st.fn(n);
        KernelBoundsRow r;
        r.n = n;
        double n2 = static_cast<double>(n) * n;
        double n32 = std::pow((double)n, 1.5);
        std::vector<double> colint(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            double rowint = 0.0;
            const double* fr = f.row(i);
            for (std::size_t j = 0; j < m; ++j) {
                r.max_n2_f = std::max(r.max_n2_f, n2 * fr[j]);
                rowint += fr[j] * w[j];
                colint[j] += fr[j] * w[i];
            }
            r.max_row_int = std::max(r.max_row_int, n32 * rowint);
        }
        for (std::size_t j = 0; j < m; ++j)
            r.max_col_int = std::max(r.max_col_int, n32 * colint[j]);
        out.push_back(r);
    }
    return out;
}

void save_stack(const KernelStack& st, const std::string& path) {
    nlohmann::json h;
    h["format"] = "kernel-stack/1";
    h["model"] = std::string(1, st.model);
    h["n_max"] = st.n_max;
    h["h"] = st.meas.grid.h;
    h["ilo"] = st.meas.grid.ilo;
    h["ihi"] = st.meas.grid.ihi;
    h["half_line"] = st.meas.half_line;
    h["sigma"] = st.sigma;
    h["eV0"] = st.eV0;
    h["tail_constant"] = st.tail_constant;
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(st.pot_fingerprint));
    h["potential_fingerprint"] = hex;
    std::ofstream f(path, std::ios::binary);
    if (!f) fail("save_stack: cannot open " + path);
    f << h.dump() << "\n";
    std::size_t m = st.nodes();
    f.write(reinterpret_cast<const char*>(st.atom1.data()),
            static_cast<std::streamsize>(m * sizeof(double)));
    for (const Mat& mat : st.cont)
        f.write(reinterpret_cast<const char*>(mat.a.data()),
                static_cast<std::streamsize>(mat.a.size() * sizeof(double)));
    if (!f) fail("save_stack: write failed for " + path);
}

KernelStack load_stack(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("load_stack: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) fail("load_stack: missing header in " + path);
    nlohmann::json h = nlohmann::json::parse(line, nullptr, false);
    if (h.is_discarded() || h.value("format", "") != "kernel-stack/1")
        fail("load_stack: unrecognized header in " + path);
    KernelStack st;
    st.model = h["model"].get<std::string>()[0];
    st.n_max = h["n_max"].get<int>();
    st.meas.grid.h = h["h"].get<double>();
    st.meas.grid.ilo = h["ilo"].get<long>();
    st.meas.grid.ihi = h["ihi"].get<long>();
    st.meas.half_line = h["half_line"].get<bool>();
    st.meas.weights = st.meas.grid.trap_weights();
    st.sigma = h["sigma"].get<double>();
    st.eV0 = h["eV0"].get<double>();
    st.tail_constant = h["tail_constant"].get<double>();
    st.pot_fingerprint = std::stoull(
        h["potential_fingerprint"].get<std::string>(), nullptr, 16);
    std::size_t m = st.nodes();
    st.atom1.resize(m);
    f.read(reinterpret_cast<char*>(st.atom1.data()),
           static_cast<std::streamsize>(m * sizeof(double)));
    st.cont.assign(static_cast<std::size_t>(st.n_max - 1), Mat(m, m));
    for (Mat& mat : st.cont)
        f.read(reinterpret_cast<char*>(mat.a.data()),
               static_cast<std::streamsize>(mat.a.size() * sizeof(double)));
    if (!f) fail("load_stack: truncated payload in " + path);
    return st;
}

Mat wetting_weight_ratio(const KernelStack& wet, const KernelStack& pin, int n) {
    // the pinning stack may live on the full line; align by node value
    if (wet.meas.grid.h != pin.meas.grid.h || wet.meas.grid.ilo != 0 ||
        pin.meas.grid.ihi < wet.meas.grid.ihi)
        fail("wetting_weight_ratio: pinning grid does not cover the wetting one");
    std::size_t off = pin.meas.grid.zero_index();
    const Mat& fw = wet.fn(n);
    const Mat& fp = pin.fn(n);
    std::size_t m = wet.nodes();
    Mat r(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double p = fp(off + i, off + j);
            r(i, j) = p > 0.0 ? fw(i, j) / p : 0.0;
        }
    return r;
}

}  // namespace lpw
