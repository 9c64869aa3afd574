#include "lpw/walk_density.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace lpw {

double gaussian_joint_density(int n, double sigma, double y, double z) {
    if (n < 2) fail("gaussian_joint_density: n must be >= 2 (degenerate below)");
    double s2 = sigma * sigma;
    double vy = s2 * n;
    double cyz = s2 * n * (n + 1.0) / 2.0;
    double vz = s2 * n * (n + 1.0) * (2.0 * n + 1.0) / 6.0;
    double det = vy * vz - cyz * cyz;  // = sigma^4 n^2 (n^2 - 1) / 12
    double q = (vz * y * y - 2.0 * cyz * y * z + vy * z * z) / det;
    return std::exp(-0.5 * q) / (2.0 * M_PI * std::sqrt(det));
}

double llt_limit_density(double y, double z) {
    return (std::sqrt(3.0) / M_PI) *
           std::exp(-2.0 * y * y + 6.0 * y * z - 6.0 * z * z);
}

double llt_limit_marginal_z(double z) {
    // z marginal of the limit: normal with variance 1/3
    return std::sqrt(3.0 / (2.0 * M_PI)) * std::exp(-1.5 * z * z);
}

double JointDensityGrid::mass() const {
    double s = 0.0;
    for (double v : values.a) s += v;
    return s * ygrid.h * zgrid.h;
}

std::vector<double> step_weights(const Potential& pot, double h, long& khalf) {
    long K = static_cast<long>(std::ceil(pot.support_bound() / h - 1e-12));
    std::vector<double> w(static_cast<std::size_t>(2 * K + 1), 0.0);
    double sum = 0.0;
    for (long j = -K; j <= K; ++j) {
        double x = j * h;
        double wj = pot.is_gaussian() ? h * pot.density(x)
                                      : pot.cell_mass(x - 0.5 * h, x + 0.5 * h);
        w[static_cast<std::size_t>(j + K)] = wj;
        sum += wj;
    }
    if (!(sum > 0.0)) fail("step_weights: potential density vanishes on grid");
    for (double& wj : w) wj /= sum;
    khalf = K;
    return w;
}

JointPropagator::JointPropagator(const Potential& pot, int n_max, double h,
                                 double cy, double cz, int nthreads,
                                 double z_slope)
    : pot_(&pot), n_max_(n_max), h_(h), cy_(cy), cz_(cz),
      sigma_(pot.sigma()), z_slope_(z_slope), nthreads_(std::max(1, nthreads)) {
    if (n_max_ < 2) fail("JointPropagator: n_max must be >= 2");
    ker_ = step_weights(pot, h_, khalf_);

    // the y grid is fixed for the whole run; z grows on demand
    state_.n = 2;
    state_.ygrid = Grid1D::symmetric(cy_ * sigma_ * std::sqrt((double)n_max_), h_);
    state_.zgrid = Grid1D::symmetric(
        std::max({cz_ * sigma_ * 2.83, 3.0 * pot.support_bound(),
                  z_slope_ * 2.0}) + h_, h_);
    state_.values = Mat(state_.zgrid.size(), state_.ygrid.size());

    // two lattice steps from (Y_0, Z_0) = (0, 0): mass w[j1] w[j2] lands at
    // y = (j1 + j2) h, z = (2 j1 + j2) h; (j1, j2) -> (y, z) is a bijection,
    // so this equals the two-step density f(z - y) f(2y - z) on the lattice
    long ylo = state_.ygrid.ilo, yhi = state_.ygrid.ihi;
    long zlo = state_.zgrid.ilo, zhi = state_.zgrid.ihi;
    double inv_h2 = 1.0 / (h_ * h_);
    for (long j1 = -khalf_; j1 <= khalf_; ++j1) {
        double w1 = ker_[static_cast<std::size_t>(j1 + khalf_)];
        if (w1 == 0.0) continue;
        for (long j2 = -khalf_; j2 <= khalf_; ++j2) {
            long iy = j1 + j2, iz = 2 * j1 + j2;
            if (iy < ylo || iy > yhi || iz < zlo || iz > zhi) continue;
            state_.values(static_cast<std::size_t>(iz - zlo),
                          static_cast<std::size_t>(iy - ylo)) +=
                w1 * ker_[static_cast<std::size_t>(j2 + khalf_)] * inv_h2;
        }
    }
    rlo_ = std::max(zlo, -2 * khalf_) - zlo;
    rhi_ = std::min(zhi, 2 * khalf_) - zlo;
    check_mass("initial grid");
}

void JointPropagator::ensure_extent(int n_next) {
    double need = std::max(cz_ * sigma_ * std::pow((double)n_next, 1.5),
                           z_slope_ * n_next) + h_;
    if (state_.zgrid.ihi * h_ >= need) return;
    double ext = std::max(need, 2.0 * state_.zgrid.ihi * h_);
    Grid1D zg = Grid1D::symmetric(ext, h_);
    Mat grown(zg.size(), state_.ygrid.size());
    long shift = state_.zgrid.ilo - zg.ilo;  // old row 0 in the new numbering
    std::memcpy(grown.row(static_cast<std::size_t>(shift)), state_.values.a.data(),
                state_.values.a.size() * sizeof(double));
    state_.values = std::move(grown);
    state_.zgrid = zg;
    rlo_ += shift;
    rhi_ += shift;
}

void JointPropagator::check_mass(const char* where) {
    double m = state_.mass();
    if (m < 1.0 - 1e-6) {
        fail(std::string("JointPropagator: grid too small at ") + where +
             ": mass " + std::to_string(m) + " < 1 - 1e-6; need y extent >= " +
             std::to_string(cy_ * sigma_ * std::sqrt((double)n_max_)) +
             " and z extent >= " +
             std::to_string(cz_ * sigma_ * std::pow((double)n_max_, 1.5)));
    }
}

void JointPropagator::step() {
    if (n_ >= n_max_) fail("JointPropagator::step: past n_max");
    ensure_extent(n_ + 1);
    std::size_t ny = state_.ygrid.size(), nz = state_.zgrid.size();
    if (scratch_.nr != nz || scratch_.nc != ny) scratch_ = Mat(nz, ny);

    if (convs_.size() != static_cast<std::size_t>(nthreads_)) {
        convs_.clear();
        for (int t = 0; t < nthreads_; ++t) {
            convs_.emplace_back(std::make_unique<Conv1D>(ny, ker_.size()));
            convs_.back()->set_kernel(ker_.data());
        }
    }

    // convolve live rows along y
    long r0 = rlo_, r1 = rhi_;
    std::size_t nrows = static_cast<std::size_t>(r1 - r0 + 1);
    parallel_for(nrows, nthreads_, [&](std::size_t k) {
        std::size_t iz = static_cast<std::size_t>(r0) + k;
        std::size_t tid = k % static_cast<std::size_t>(nthreads_);
        convs_[tid]->conv_same(state_.values.row(iz), scratch_.row(iz));
    });

    // shear: out(z, y) = conv(z - y, y); both coordinates share one spacing,
    // so the shift is by whole rows. Writes are contiguous along each row.
    long ylo = state_.ygrid.ilo;
    long new_rlo = std::max<long>(0, r0 + ylo);
    long new_rhi = std::min<long>(static_cast<long>(nz) - 1,
                                  r1 + ylo + static_cast<long>(ny) - 1);
    parallel_for(static_cast<std::size_t>(new_rhi - new_rlo + 1), nthreads_,
                 [&](std::size_t k) {
        long iz = new_rlo + static_cast<long>(k);
        double* out = state_.values.row(static_cast<std::size_t>(iz));
        for (std::size_t iy = 0; iy < ny; ++iy) {
            long src = iz - (ylo + static_cast<long>(iy));
            out[iy] = (src >= r0 && src <= r1)
                          ? scratch_(static_cast<std::size_t>(src), iy)
                          : 0.0;
        }
    });
    // rows outside the new live window were written last step; clear them
    for (long iz = rlo_; iz < new_rlo; ++iz)
        std::memset(state_.values.row(static_cast<std::size_t>(iz)), 0,
                    ny * sizeof(double));
    for (long iz = new_rhi + 1; iz <= rhi_; ++iz)
        std::memset(state_.values.row(static_cast<std::size_t>(iz)), 0,
                    ny * sizeof(double));
    rlo_ = new_rlo;
    rhi_ = new_rhi;
    ++n_;
    state_.n = n_;
    check_mass("step");
}

std::vector<JointDensityGrid> propagate_joint_density(
    const Potential& pot, int n_max, double h,
    const std::vector<int>& snapshot_ns, double cy, double cz, int nthreads) {
    JointPropagator prop(pot, n_max, h, cy, cz, nthreads);
    std::vector<int> ns = snapshot_ns;
    std::sort(ns.begin(), ns.end());
    std::vector<JointDensityGrid> out;
    for (int target : ns) {
        if (target < 2 || target > n_max)
            fail("propagate_joint_density: snapshot n outside [2, n_max]");
        while (prop.n() < target) prop.step();
        out.push_back(prop.state());
    }
    return out;
}

std::vector<LltRow> llt_check(const Potential& pot, std::vector<int> ns,
                              double h, double cy, double cz, int nthreads) {
    if (ns.empty()) return {};
    std::sort(ns.begin(), ns.end());
    int n_max = ns.back();
    JointPropagator prop(pot, std::max(n_max, 2), h, cy, cz, nthreads);
    double sigma = pot.sigma();
    std::vector<LltRow> rows;
    for (int target : ns) {
        while (prop.n() < target) prop.step();
        const JointDensityGrid& g = prop.state();
        double n = target;
        double sy = sigma * std::sqrt(n), sz = sigma * std::pow(n, 1.5);
        std::size_t ny = g.ygrid.size(), nz = g.zgrid.size();
        std::vector<double> row_err(nz, 0.0), row_marg(nz, 0.0);
        parallel_for(nz, nthreads, [&](std::size_t iz) {
            double z = g.zgrid.node(iz);
            double worst = 0.0, marg = 0.0;
            const double* vr = g.values.row(iz);
            for (std::size_t iy = 0; iy < ny; ++iy) {
                double y = g.ygrid.node(iy);
                double scaled = sigma * sigma * n * n * vr[iy];
                double lim = llt_limit_density(y / sy, z / sz);
                worst = std::max(worst, std::abs(scaled - lim));
                marg += vr[iy];
            }
            row_err[iz] = worst;
            row_marg[iz] = marg * g.ygrid.h;  // z-marginal density at z
        });
        LltRow r;
        r.n = target;
        for (std::size_t iz = 0; iz < nz; ++iz) {
            r.sup_err = std::max(r.sup_err, row_err[iz]);
            double z = g.zgrid.node(iz);
            double scaled = sz * row_marg[iz];
            r.marginal_sup_err = std::max(
                r.marginal_sup_err,
                std::abs(scaled - llt_limit_marginal_z(z / sz)));
        }
        rows.push_back(r);
    }
    return rows;
}

WalkPath sample_integrated_walk(const Potential& pot, int n, double a,
                                double b, std::uint64_t seed) {
    if (n < 0) fail("sample_integrated_walk: n must be >= 0");
    Rng rng(seed);
    WalkPath p;
    p.Y.resize(static_cast<std::size_t>(n) + 1);
    p.Z.resize(static_cast<std::size_t>(n) + 1);
    p.Y[0] = a;
    p.Z[0] = b;
    for (int k = 1; k <= n; ++k) {
        double x = pot.sample(rng);
        p.Y[static_cast<std::size_t>(k)] = p.Y[static_cast<std::size_t>(k - 1)] + x;
        p.Z[static_cast<std::size_t>(k)] =
            p.Z[static_cast<std::size_t>(k - 1)] + p.Y[static_cast<std::size_t>(k)];
    }
    return p;
}

}  // namespace lpw
