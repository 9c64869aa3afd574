#include "lpw/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lpw/fft.hpp"
#include "lpw/grid.hpp"
#include "lpw/util.hpp"

namespace lpw {

namespace {

// position inside a cell whose density is linear from g_lo to g_hi, given
// the mass share in [0, 1); inverts share * cellmass = int_0^t g
double invert_cell(double g_lo, double g_hi, double share) {
    const double d = g_hi - g_lo;
    const double target = share * 0.5 * (g_lo + g_hi);
    double t;
    if (std::abs(d) <= 1e-14 * (g_lo + g_hi))
        t = g_lo > 0.0 ? target / g_lo : share;
    else
        t = (-g_lo + std::sqrt(std::max(g_lo * g_lo + 2.0 * d * target, 0.0))) /
            d;
    return std::min(std::max(t, 0.0), 1.0 - 1e-12);
}

// continuum draw from a piecewise-linear density given by node values g
// over nodes z0 + c*h; fails when the density carries no mass
double sample_pwlinear(const std::vector<double>& g, double z0, double h,
                       Rng& rng) {
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < g.size(); ++c)
        total += 0.5 * h * (g[c] + g[c + 1]);
    if (!(total > 0.0) || !std::isfinite(total))
        fail("sample_pwlinear: conditional density carries no mass");
    double target = rng.uniform() * total;
    for (std::size_t c = 0; c + 1 < g.size(); ++c) {
        const double cm = 0.5 * h * (g[c] + g[c + 1]);
        if (target < cm || c + 2 == g.size()) {
            const double share = cm > 0.0 ? std::min(target / cm, 1.0) : 0.0;
            return z0 + (static_cast<double>(c) +
                         invert_cell(g[c], g[c + 1], share)) *
                            h;
        }
        target -= cm;
    }
    return z0;  // unreachable
}

// jump length beyond the tabulated slices, distributed as
// e^{-F(m - M)} / m^2 on m > M: a 1/m^2 proposal is drawn by inverting the
// continuous envelope and thinned by the exact ratio
long draw_tail_length(double F, long M, Rng& rng) {
    for (int tries = 0; tries < 1000000; ++tries) {
        const double u = rng.uniform();
        const double w = (static_cast<double>(M) + 0.5) / u;
        if (w > 9e17) continue;
        const long mm = static_cast<long>(std::floor(w + 0.5));
        const double md = static_cast<double>(mm);
        const double acc = (1.0 - 0.25 / (md * md)) *
                           std::exp(-F * (md - static_cast<double>(M)));
        if (rng.uniform() < acc) return mm;
    }
    fail("skeleton tail draw: thinning stalled");
    return 0;
}

// one increment of the integrated walk conditioned to reach velocity ty and
// position tz after the remaining m steps (closed-form Gaussian conditioning
// of the next increment on the two linear constraints)
void bridge_step(double sigma, double m, double ty, double tz, double& Y,
                 double& Z, Rng& rng) {
    const double t1 = ty - Y;
    const double t2 = tz - Z - m * Y;
    const double mean = -2.0 * t1 / m + 6.0 * t2 / (m * (m + 1.0));
    const double sd =
        sigma * std::sqrt((m - 1.0) * (m - 2.0) / (m * (m + 1.0)));
    Y += mean + sd * rng.normal();
    Z += Y;
}

// exact draw of the Gaussian excursion interior: integrated walk from
// (Y, Z) = (-x, 0) conditioned on (Z_{n-1}, Z_n) = (y, 0)
void gauss_bridge(double sigma, double x, double y, int n, Rng& rng,
                  std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(n) - 1);
    double Y = -x, Z = 0.0;
    for (int j = 1; j <= n - 2; ++j) {
        bridge_step(sigma, static_cast<double>(n - j + 1), -y, 0.0, Y, Z,
                    rng);
        out[static_cast<std::size_t>(j) - 1] = Z;
    }
    out[static_cast<std::size_t>(n) - 2] = y;
}

// tabulated-potential excursion interior: propagate the pair density
// (phi_{t-1}, phi_t) forward on a grid, then sample backward through the
// stored slices; the wetting grid lives on the half line so positivity is
// carried by the support itself
std::vector<double> fill_tabulated(const Potential& pot, char model, double x,
                                   double y, int n, Rng& rng,
                                   const FillParams& prm) {
    const bool half = model == 'w';
    double m0, m1, m2;
    pot.moments(m0, m1, m2);
    const double sig = std::sqrt(std::max(m2 / m0, 1e-12));
    const double span = std::abs(x) + std::abs(y) + pot.support_bound() +
                        0.75 * sig * std::pow(static_cast<double>(n), 1.5) +
                        4.0;
    const double hh = prm.h;
    const Grid1D grid = half ? Grid1D::half_line(span, hh)
                             : Grid1D::symmetric(span, hh);
    const std::size_t G = grid.size();
    const std::size_t nslices = static_cast<std::size_t>(n) - 2;
    if (nslices * G * G * sizeof(double) > prm.max_bytes)
        fail("fill_excursion: length " + std::to_string(n) + " needs " +
             std::to_string(nslices * G * G * sizeof(double) >> 20) +
             " MiB of slices, over the table budget; raise max_bytes, "
             "coarsen h, or use the Gaussian potential");

    const std::size_t nt = 4 * G - 3;
    const long toff = 2 * (static_cast<long>(G) - 1);
    std::vector<double> T(nt);
    for (std::size_t s = 0; s < nt; ++s)
        T[s] = pot.density(hh * (static_cast<long>(s) - toff));
    std::vector<double> w = grid.trap_weights();

    // psi[t-2](a, b) is the density of (phi_{t-1}, phi_t) = (a, b), each
    // slice rescaled to max 1 (the backward pass only uses ratios)
    std::vector<Mat> psi;
    psi.reserve(nslices);
    {
        Mat p0(G, G);
        for (std::size_t a = 0; a < G; ++a) {
            const double fa = pot.density(grid.node(a) + x);
            double* row = p0.row(a);
            if (fa == 0.0) continue;
            for (std::size_t b = 0; b < G; ++b)
                row[b] = fa * pot.density(grid.node(b) - 2.0 * grid.node(a));
        }
        psi.push_back(std::move(p0));
    }
    Conv1D conv(G, nt);
    conv.set_kernel(T.data());
    std::vector<double> rcol(G), full(G + nt - 1);
    for (int t = 3; t <= n - 1; ++t) {
        const Mat& prev = psi.back();
        Mat next(G, G);
        for (std::size_t a = 0; a < G; ++a) {
            bool any = false;
            for (std::size_t c = 0; c < G; ++c) {
                const double v = prev(c, a) * w[c];
                rcol[G - 1 - c] = v;
                any = any || v != 0.0;
            }
            if (!any) continue;
            conv.conv_full(rcol.data(), full.data());
            const long shift =
                3 * (static_cast<long>(G) - 1) - 2 * static_cast<long>(a);
            double* row = next.row(a);
            for (std::size_t b = 0; b < G; ++b)
                row[b] = full[static_cast<std::size_t>(
                    shift + static_cast<long>(b))];
        }
        double mx = 0.0;
        for (double v : next.a) mx = std::max(mx, v);
        if (!(mx > 0.0))
            fail("fill_excursion: pair density vanished during propagation");
        const double inv = 1.0 / mx;
        for (double& v : next.a) v *= inv;
        psi.push_back(std::move(next));
    }

    std::vector<double> out(static_cast<std::size_t>(n) - 1);
    out[static_cast<std::size_t>(n) - 2] = y;
    std::vector<double> g(G);
    double phi_next = 0.0, phi_cur = y;
    for (int t = n - 1; t >= 2; --t) {
        const Mat& slice = psi[static_cast<std::size_t>(t) - 2];
        // column of the slice at the continuum value phi_cur, lerped
        double u = (phi_cur - grid.node(0)) / hh;
        u = std::min(std::max(u, 0.0), static_cast<double>(G - 1) - 1e-9);
        const std::size_t jb = static_cast<std::size_t>(u);
        const double fb = u - static_cast<double>(jb);
        for (std::size_t c = 0; c < G; ++c) {
            const double lerp =
                (1.0 - fb) * slice(c, jb) + fb * slice(c, jb + 1);
            g[c] = lerp * pot.density(phi_next - 2.0 * phi_cur + grid.node(c));
        }
        const double drawn = sample_pwlinear(g, grid.node(0), hh, rng);
        out[static_cast<std::size_t>(t) - 2] = drawn;
        phi_next = phi_cur;
        phi_cur = drawn;
    }
    return out;
}

}  // namespace

SkeletonSampler::SkeletonSampler(const MarkovRenewalKernel& k, int N,
                                 const SkeletonParams& prm,
                                 const RenewalLaw* law)
    : k_(&k), N_(N), model_(k.model) {
    if (N < 1) fail("SkeletonSampler: N must be >= 1");
    const std::size_t ns = k.states();
    if (ns < 3) fail("SkeletonSampler: kernel has no continuum cells");
    if (k.z.size() != ns || !(k.grid_h > 0.0))
        fail("SkeletonSampler: kernel carries no state heights");

    law_ = law ? *law
               : chi_interarrival_law(k, std::max(N + 1, 64));
    if (law_.horizon < N + 1)
        fail("SkeletonSampler: renewal law horizon " +
             std::to_string(law_.horizon) + " is shorter than N + 1");
    accept_ = law_.u[static_cast<std::size_t>(N) + 1];
    if (accept_ < prm.accept_floor)
        fail("SkeletonSampler: acceptance u(N+1) = " +
             std::to_string(accept_) + " is below the floor " +
             std::to_string(prm.accept_floor) +
             "; in the delocalized regime the contact set collapses to a "
             "bounded number of near-boundary returns, so sample those "
             "returns directly instead of conditioning the full chain");
    max_attempts_ =
        prm.max_attempts > 0
            ? prm.max_attempts
            : static_cast<long>(std::ceil(60.0 / accept_)) + 100;

    // flat per-row cumulative masses: [n=1 atom][(n, cell) for n=2..n_max]
    // [tail cells]; cell c sits between continuum states c+1 and c+2 and
    // carries the trapezoid mass of the linear density between its nodes
    const int M = k.n_max;
    ncells_ = ns - 2;
    stride_ = 1 + static_cast<std::size_t>(M - 1) * ncells_ + ncells_;
    cum_.assign(ns * stride_, 0.0);
    total_.assign(ns, 0.0);
    const double h = k.grid_h;
    for (std::size_t i = 0; i < ns; ++i) {
        double* row = cum_.data() + i * stride_;
        double acc = k.k1[i] * k.mu[0];
        row[0] = acc;
        std::size_t pos = 1;
        for (int n = 2; n <= M; ++n) {
            const Mat& s = k.slice(n);
            const double* srow = s.row(i);
            for (std::size_t c = 0; c < ncells_; ++c, ++pos) {
                acc += 0.5 * h * (srow[c + 1] + srow[c + 2]);
                row[pos] = acc;
            }
        }
        const Mat& last = k.slice(M);
        const double* lrow = last.row(i);
        for (std::size_t c = 0; c < ncells_; ++c, ++pos) {
            acc += k.tail_factor * 0.5 * h * (lrow[c + 1] + lrow[c + 2]);
            row[pos] = acc;
        }
        total_[i] = acc;
    }
}

double SkeletonSampler::node_density(int row, int slice,
                                     std::size_t state) const {
    return k_->slice(slice)(static_cast<std::size_t>(row), state);
}

SkeletonSampler::Landing SkeletonSampler::hop(Rng& rng, int cell,
                                              double frac,
                                              long /*remaining*/) const {
    Landing L;
    const int row =
        cell < 0 ? 0 : (rng.uniform() < frac ? cell + 2 : cell + 1);
    const double u = rng.uniform();
    if (u >= total_[static_cast<std::size_t>(row)]) {
        L.dead = true;
        return L;
    }
    const double* base = cum_.data() + static_cast<std::size_t>(row) * stride_;
    const std::size_t pos = static_cast<std::size_t>(
        std::upper_bound(base, base + stride_, u) - base);
    if (pos == 0) {
        L.n = 1;
        return L;  // atom landing: y = 0, cell = -1
    }
    const double rem = u - base[pos - 1];
    const std::size_t body = static_cast<std::size_t>(k_->n_max - 1) * ncells_;
    int slice;
    std::size_t c;
    if (pos - 1 < body) {
        slice = 2 + static_cast<int>((pos - 1) / ncells_);
        c = (pos - 1) % ncells_;
        L.n = slice;
    } else {
        slice = k_->n_max;
        c = pos - 1 - body;
        L.n = draw_tail_length(k_->F, k_->n_max, rng);
    }
    const double g_lo = node_density(row, slice, c + 1);
    const double g_hi = node_density(row, slice, c + 2);
    const double cm = 0.5 * k_->grid_h * (g_lo + g_hi) *
                      (pos - 1 < body ? 1.0 : k_->tail_factor);
    const double share = cm > 0.0 ? std::min(rem / cm, 1.0) : 0.0;
    L.cell = static_cast<int>(c);
    L.frac = invert_cell(g_lo, g_hi, share);
    L.y = k_->z[c + 1] + L.frac * k_->grid_h;
    return L;
}

ContactSkeleton SkeletonSampler::draw(Rng& rng) const {
    ContactSkeleton sk;
    for (long att = 1; att <= max_attempts_; ++att) {
        sk.tau.assign(1, 0);
        sk.J.assign(1, 0.0);
        long pos = 0;
        int cell = -1;
        double frac = 0.0;
        for (;;) {
            const Landing L = hop(rng, cell, frac, N_ + 1 - pos);
            if (L.dead) break;
            pos += L.n;
            if (L.cell < 0) {
                if (pos == N_ + 1) {
                    sk.tau.push_back(pos);
                    sk.J.push_back(0.0);
                    sk.attempts = att;
                    return sk;
                }
                if (pos > N_) break;
                sk.tau.push_back(pos);
                sk.J.push_back(0.0);
                cell = -1;
                frac = 0.0;
            } else {
                if (pos > N_) break;
                sk.tau.push_back(pos);
                sk.J.push_back(L.y);
                cell = L.cell;
                frac = L.frac;
            }
        }
    }
    fail("sample_contact_skeleton: rejection budget " +
         std::to_string(max_attempts_) + " exhausted at acceptance " +
         std::to_string(accept_));
    return sk;
}

long SkeletonSampler::first_return(Rng& rng, long cap) const {
    long pos = 0;
    int cell = -1;
    double frac = 0.0;
    for (;;) {
        const Landing L = hop(rng, cell, frac, cap);
        if (L.dead) return -1;
        pos += L.n;
        if (pos >= cap) return cap;
        if (L.cell < 0) return pos;
        cell = L.cell;
        frac = L.frac;
    }
}

ContactSkeleton sample_contact_skeleton(const MarkovRenewalKernel& k, int N,
                                        std::uint64_t seed,
                                        const SkeletonParams& prm) {
    SkeletonSampler sk(k, N, prm);
    Rng rng(seed);
    return sk.draw(rng);
}

std::vector<double> fill_excursion(const Potential& pot, char model, double x,
                                   double y, int n, Rng& rng,
                                   const FillParams& prm) {
    if (model != 'p' && model != 'w') fail("fill_excursion: bad model tag");
    if (n < 2) fail("fill_excursion: need n >= 2");
    const bool half = model == 'w';
    if (half && (x < 0.0 || y < 0.0))
        fail("fill_excursion: wetting endpoints must be nonnegative");
    if (n == 2) return {y};
    if (pot.is_gaussian()) {
        std::vector<double> out;
        for (long tries = 0; tries < prm.max_tries; ++tries) {
            gauss_bridge(pot.sigma(), x, y, n, rng, out);
            if (!half) return out;
            bool ok = true;
            for (double v : out)
                if (v < 0.0) {
                    ok = false;
                    break;
                }
            if (ok) return out;
        }
        fail("fill_excursion: positivity rejection budget exhausted at "
             "length " +
             std::to_string(n));
    }
    return fill_tabulated(pot, model, x, y, n, rng, prm);
}

std::vector<double> fill_excursion(const Potential& pot, char model, double x,
                                   double y, int n, std::uint64_t seed,
                                   const FillParams& prm) {
    Rng rng(seed);
    return fill_excursion(pot, model, x, y, n, rng, prm);
}

void compute_field_stats(FieldSample& fs) {
    const long N = static_cast<long>(fs.phi.size()) - 1;
    fs.tau.clear();
    fs.chi.clear();
    fs.ell = 0;
    fs.sup_abs = 0.0;
    for (long i = 0; i <= N; ++i) {
        const double v = fs.phi[static_cast<std::size_t>(i)];
        fs.sup_abs = std::max(fs.sup_abs, std::abs(v));
        if (v == 0.0) {
            fs.tau.push_back(i);
            if (i >= 1) ++fs.ell;
            const bool prev_zero =
                i == 0 || fs.phi[static_cast<std::size_t>(i) - 1] == 0.0;
            if (prev_zero) fs.chi.push_back(i);
        }
    }
    fs.iota = static_cast<long>(fs.chi.size());
    long gap = 0, prev = 0;
    for (long t : fs.tau) {
        gap = std::max(gap, t - prev);
        prev = t;
    }
    fs.gap = std::max(gap, N - prev);
}

FieldSample sample_field(const SkeletonSampler& sk, const Potential& pot,
                         Rng& rng, const FillParams& fp) {
    const ContactSkeleton s = sk.draw(rng);
    const long N = sk.N();
    FieldSample fs;
    fs.phi.assign(static_cast<std::size_t>(N) + 1, 0.0);
    for (std::size_t j = 1; j < s.tau.size(); ++j) {
        const long t0 = s.tau[j - 1];
        const int n = static_cast<int>(s.tau[j] - t0);
        if (n == 1) continue;
        const std::vector<double> mid =
            fill_excursion(pot, sk.model(), s.J[j - 1], s.J[j], n, rng, fp);
        for (int i = 1; i <= n - 1; ++i)
            if (t0 + i <= N)
                fs.phi[static_cast<std::size_t>(t0 + i)] =
                    mid[static_cast<std::size_t>(i) - 1];
    }
    compute_field_stats(fs);
    return fs;
}

FieldSample sample_field(const MarkovRenewalKernel& k, const Potential& pot,
                         int N, std::uint64_t seed, const FillParams& fp) {
    SkeletonSampler sk(k, N);
    Rng rng(seed);
    return sample_field(sk, pot, rng, fp);
}

PathStatsTable path_statistics_experiment(const MarkovRenewalKernel& k,
                                          const Potential& pot, int N,
                                          int n_samples, std::uint64_t seed,
                                          const FillParams& fp) {
    if (n_samples < 1) fail("path_statistics_experiment: need samples");
    SkeletonSampler sk(k, N);
    PathStatsTable tab;
    tab.N = N;
    tab.ell_frac.reserve(static_cast<std::size_t>(n_samples));
    long attempts = 0;
    for (int i = 0; i < n_samples; ++i) {
        Rng rng(block_seed(seed, static_cast<std::uint64_t>(i)));
        const ContactSkeleton s = sk.draw(rng);
        attempts += s.attempts;
        FieldSample fs;
        fs.phi.assign(static_cast<std::size_t>(N) + 1, 0.0);
        for (std::size_t j = 1; j < s.tau.size(); ++j) {
            const long t0 = s.tau[j - 1];
            const int n = static_cast<int>(s.tau[j] - t0);
            if (n == 1) continue;
            const std::vector<double> mid = fill_excursion(
                pot, sk.model(), s.J[j - 1], s.J[j], n, rng, fp);
            for (int t = 1; t <= n - 1; ++t)
                if (t0 + t <= N)
                    fs.phi[static_cast<std::size_t>(t0 + t)] =
                        mid[static_cast<std::size_t>(t) - 1];
        }
        compute_field_stats(fs);
        const double dn = static_cast<double>(N);
        tab.ell_frac.push_back(static_cast<double>(fs.ell) / dn);
        tab.iota_frac.push_back(static_cast<double>(fs.iota) / dn);
        tab.gap_frac.push_back(static_cast<double>(fs.gap) / dn);
        tab.sup_abs.push_back(fs.sup_abs);
    }
    auto mean_se = [](const std::vector<double>& v, double& mean,
                      double& se) {
        mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var = v.size() > 1 ? var / static_cast<double>(v.size() - 1) : 0.0;
        se = std::sqrt(var / static_cast<double>(v.size()));
    };
    mean_se(tab.ell_frac, tab.mean_ell, tab.se_ell);
    mean_se(tab.iota_frac, tab.mean_iota, tab.se_iota);
    double dummy;
    mean_se(tab.gap_frac, tab.mean_gap, dummy);
    mean_se(tab.sup_abs, tab.mean_sup, dummy);
    tab.rejection_rate =
        static_cast<double>(attempts - n_samples) /
        static_cast<double>(std::max<long>(attempts, 1));
    return tab;
}

RepulsionFit entropic_repulsion_mc(const Potential& pot,
                                   std::vector<int> N_list, long n_samples,
                                   std::uint64_t seed, bool bridge) {
    if (n_samples < 1) fail("entropic_repulsion_mc: need samples");
    std::sort(N_list.begin(), N_list.end());
    N_list.erase(std::unique(N_list.begin(), N_list.end()), N_list.end());
    if (N_list.empty() || N_list.front() < 2)
        fail("entropic_repulsion_mc: N ladder must start at 2 or above");
    const std::size_t ncp = N_list.size();
    const int Nmax = N_list.back();

    RepulsionFit fit;
    fit.bridge = bridge;
    fit.rows.resize(ncp);
    for (std::size_t i = 0; i < ncp; ++i) fit.rows[i].N = N_list[i];
    const double dn = static_cast<double>(n_samples);

    if (!bridge) {
        std::vector<long> surv_z(ncp, 0), surv_y(ncp, 0);
        for (long p = 0; p < n_samples; ++p) {
            Rng rng(block_seed(seed, static_cast<std::uint64_t>(p)));
            double Y = 0.0, Z = 0.0;
            bool yok = true;
            std::size_t ci = 0;
            for (int step = 1; step <= Nmax && ci < ncp; ++step) {
                Y += pot.sample(rng);
                if (yok && Y < 0.0) yok = false;
                Z += Y;
                if (Z < 0.0) break;
                if (step == N_list[ci]) {
                    ++surv_z[ci];
                    if (yok) ++surv_y[ci];
                    ++ci;
                }
            }
        }
        for (std::size_t i = 0; i < ncp; ++i) {
            RepulsionRow& r = fit.rows[i];
            r.survivors = surv_z[i];
            r.p = static_cast<double>(surv_z[i]) / dn;
            r.se = std::sqrt(std::max(r.p * (1.0 - r.p), 0.0) / dn);
            r.p_y = static_cast<double>(surv_y[i]) / dn;
            r.se_y = std::sqrt(std::max(r.p_y * (1.0 - r.p_y), 0.0) / dn);
        }
    } else {
        if (!pot.is_gaussian())
            fail("entropic_repulsion_mc: the bridge mode needs the "
                 "closed-form Gaussian conditional sampler");
        const double sigma = pot.sigma();
        for (std::size_t i = 0; i < ncp; ++i) {
            const int N = N_list[i];
            const std::uint64_t s2 =
                block_seed(seed, 0x42000000ULL + static_cast<std::uint64_t>(N));
            long surv = 0;
            for (long p = 0; p < n_samples; ++p) {
                Rng rng(block_seed(s2, static_cast<std::uint64_t>(p)));
                double Y = 0.0, Z = 0.0;
                bool ok = true;
                for (int j = 1; j <= N - 2; ++j) {
                    bridge_step(sigma, static_cast<double>(N - j + 1), 0.0,
                                0.0, Y, Z, rng);
                    if (Z < 0.0) {
                        ok = false;
                        break;
                    }
                }
                if (ok) ++surv;
            }
            RepulsionRow& r = fit.rows[i];
            r.survivors = surv;
            r.p = static_cast<double>(surv) / dn;
            r.se = std::sqrt(std::max(r.p * (1.0 - r.p), 0.0) / dn);
        }
    }

    // weighted log-log slope over the largest octave of the ladder
    double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int used = 0;
    for (const RepulsionRow& r : fit.rows) {
        if (2 * r.N < Nmax || r.p <= 0.0) continue;
        const double sig = r.se > 0.0 ? r.se / r.p : 1e-3;
        const double w = 1.0 / (sig * sig);
        const double lx = std::log(static_cast<double>(r.N));
        const double ly = std::log(r.p);
        sw += w;
        sx += w * lx;
        sy += w * ly;
        sxx += w * lx * lx;
        sxy += w * lx * ly;
        ++used;
    }
    if (used < 2)
        fail("entropic_repulsion_mc: fewer than two usable ladder points in "
             "the top octave");
    const double den = sw * sxx - sx * sx;
    fit.exponent = -(sw * sxy - sx * sy) / den;
    fit.exponent_se = std::sqrt(sw / den);
    if (fit.rows.back().survivors < 100) {
        fit.widened = true;
        fit.exponent_se *= 3.0;
    }
    return fit;
}

}  // namespace lpw
