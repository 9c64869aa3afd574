#include "lpw/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace lpw {

namespace {

// sum_{n > M} e^{-lambda n} / n, by direct summation (lambda > 0)
double log_tail_sum(double lambda, int M) {
    double acc = 0.0;
    double qn = std::exp(-lambda * (M + 1.0)) / (M + 1.0);
    const double damp = std::exp(-lambda);
    for (int n = M + 1; qn > acc * 1e-16 + 1e-300; ++n) {
        acc += qn;
        qn *= damp * n / (n + 1.0);
    }
    return acc;
}

// continuum node index backing a state (the atom shares the zero node)
std::size_t state_node(const KernelStack& st, std::size_t i) {
    return i == 0 ? st.zero_node() : i - 1;
}

}  // namespace

MarkovRenewalKernel build_markov_kernel(const KernelStack& st,
                                        const SpectralSolution& sol,
                                        double epsilon) {
    if (epsilon <= 0.0) fail("build_markov_kernel: epsilon must be positive");
    if (sol.lambda < 0.0) fail("build_markov_kernel: negative tilt");
    const std::size_t m = st.nodes();
    const std::size_t ns = m + 1;
    if (sol.v.size() != ns)
        fail("build_markov_kernel: solution and stack disagree on the grid");

    for (double x : sol.v)
        if (!(x > 0.0) || !std::isfinite(x))
            fail("build_markov_kernel: eigenfunction not strictly positive "
                 "(stack grid may extend past the one-step support)");

    MarkovRenewalKernel k;
    k.model = st.model;
    k.epsilon = epsilon;
    k.F = sol.lambda;
    k.n_max = st.n_max;
    k.i0 = st.zero_node() + 1;
    k.v = sol.v;

    k.mu.assign(ns, 0.0);
    k.mu[0] = 1.0;
    for (std::size_t j = 0; j < m; ++j) k.mu[j + 1] = st.meas.weights[j];

    k.grid_h = st.meas.grid.h;
    k.z.assign(ns, 0.0);
    for (std::size_t j = 0; j < m; ++j) k.z[j + 1] = st.meas.grid.node(j);

    const double delta0 =
        sol.lambda == 0.0 ? sol.delta : solve_at(st, 0.0).delta;
    k.eps_c = 1.0 / delta0;
    k.defect = 1.0 - std::min(epsilon / k.eps_c, 1.0);

    // n = 1: jump into the atom, single-step weight e^{-V(x)} at height x
    const double e1 = epsilon * std::exp(-k.F);
    k.k1.assign(ns, 0.0);
    for (std::size_t i = 0; i < ns; ++i) {
        const double fx = st.atom1[state_node(st, i)];
        k.k1[i] = e1 * fx * sol.v[0] / sol.v[i];
    }

    // n >= 2: continuum-to-continuum slices; column 0 (the atom) stays zero
    k.kh.reserve(static_cast<std::size_t>(st.n_max - 1));
    for (int n = 2; n <= st.n_max; ++n) {
        const Mat& f = st.fn(n);
        const double en = epsilon * std::exp(-k.F * n);
        Mat s(ns, ns);
        for (std::size_t i = 0; i < ns; ++i) {
            const double* frow = f.row(state_node(st, i));
            double* srow = s.row(i);
            const double vi = sol.v[i];
            for (std::size_t j = 0; j < m; ++j)
                srow[j + 1] = en * frow[j] * sol.v[j + 1] / vi;
        }
        k.kh.push_back(std::move(s));
    }

    const double M = static_cast<double>(st.n_max);
    k.tail_factor =
        std::exp(k.F * M) * M * M * kernel_tail_sum(k.F, st.n_max);

    // eigen-identity: every row must carry total mass epsilon * delta(F)
    const double target = epsilon * sol.delta;
    const std::vector<double> mass = kernel_row_mass(k);
    double dev = 0.0;
    for (std::size_t i = 0; i < ns; ++i)
        dev = std::max(dev, std::abs(mass[i] - target));
    if (!(dev <= 1e-6))
        fail("build_markov_kernel: row-mass identity violated, deviation " +
             std::to_string(dev));
    return k;
}

std::vector<double> kernel_row_mass(const MarkovRenewalKernel& k) {
    const std::size_t ns = k.states();
    std::vector<double> mass(k.k1);
    for (std::size_t n = 0; n < k.kh.size(); ++n) {
        const Mat& s = k.kh[n];
        const double extra = (n + 1 == k.kh.size()) ? k.tail_factor : 0.0;
        for (std::size_t i = 0; i < ns; ++i) {
            const double* srow = s.row(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < ns; ++j) acc += srow[j] * k.mu[j];
            mass[i] += (1.0 + extra) * acc;
        }
    }
    return mass;
}

Mat modulating_transition(const MarkovRenewalKernel& k) {
    const std::size_t ns = k.states();
    Mat d(ns, ns);
    for (std::size_t i = 0; i < ns; ++i) d.row(i)[0] = k.k1[i] * k.mu[0];
    for (std::size_t n = 0; n < k.kh.size(); ++n) {
        const Mat& s = k.kh[n];
        const double w = (n + 1 == k.kh.size()) ? 1.0 + k.tail_factor : 1.0;
        for (std::size_t i = 0; i < ns; ++i) {
            const double* srow = s.row(i);
            double* drow = d.row(i);
            for (std::size_t j = 1; j < ns; ++j)
                drow[j] += w * srow[j] * k.mu[j];
        }
    }
    return d;
}

RenewalLaw chi_interarrival_law(const MarkovRenewalKernel& k, int horizon) {
    if (horizon < 8) fail("chi_interarrival_law: horizon too short");
    const std::size_t ns = k.states();
    const int H = horizon;
    const int M = k.n_max;

    // smu[t] = mu-weighted occupation density of the atom-avoiding chain at
    // kernel time t; the atom entry is populated only at t = 0 (the start)
    std::vector<std::vector<double>> smu(
        static_cast<std::size_t>(H), std::vector<double>(ns, 0.0));
    smu[0][0] = 1.0;

    RenewalLaw law;
    law.horizon = H;
    law.defect = k.defect;
    law.q.assign(static_cast<std::size_t>(H) + 1, 0.0);
    law.u.assign(static_cast<std::size_t>(H) + 1, 0.0);

    const Mat& last = k.slice(M);
    std::vector<double> uc(ns, 0.0);
    std::vector<double> smear(ns, 0.0);
    for (int t = 1; t <= H; ++t) {
        // absorption into the atom after t steps
        double qv = 0.0;
        for (std::size_t j = 0; j < ns; ++j) qv += smu[t - 1][j] * k.k1[j];
        law.q[static_cast<std::size_t>(t)] = qv;
        if (t == H) break;

        // continuum occupation at time t: exact slices up to n_max, then the
        // c / n^2 tail of the long jumps smeared through the last slice
        std::fill(uc.begin(), uc.end(), 0.0);
        for (int j = 2; j <= std::min(t, M); ++j) {
            const Mat& s = k.slice(j);
            const std::vector<double>& src = smu[static_cast<std::size_t>(t - j)];
            for (std::size_t i = 0; i < ns; ++i) {
                const double si = src[i];
                if (si == 0.0) continue;
                const double* srow = s.row(i);
                for (std::size_t c = 1; c < ns; ++c) uc[c] += si * srow[c];
            }
        }
        if (t > M) {
            std::fill(smear.begin(), smear.end(), 0.0);
            for (int j = M + 1; j <= t; ++j) {
                const double g = std::exp(-k.F * (j - M)) *
                                 (static_cast<double>(M) * M) /
                                 (static_cast<double>(j) * j);
                const std::vector<double>& src =
                    smu[static_cast<std::size_t>(t - j)];
                for (std::size_t c = 0; c < ns; ++c) smear[c] += g * src[c];
            }
            for (std::size_t i = 0; i < ns; ++i) {
                const double si = smear[i];
                if (si == 0.0) continue;
                const double* srow = last.row(i);
                for (std::size_t c = 1; c < ns; ++c) uc[c] += si * srow[c];
            }
        }
        for (std::size_t c = 1; c < ns; ++c)
            smu[static_cast<std::size_t>(t)][c] = uc[c] * k.mu[c];
    }

    law.u[0] = 1.0;
    for (int n = 1; n <= H; ++n) {
        double acc = 0.0;
        for (int m2 = 1; m2 <= n; ++m2)
            acc += law.q[static_cast<std::size_t>(m2)] *
                   law.u[static_cast<std::size_t>(n - m2)];
        law.u[static_cast<std::size_t>(n)] = acc;
    }

    // tail fit over the last octave: q(n) ~ C e^{-F n} / n^2
    std::vector<double> xs, ys;
    for (int n = H / 2; n <= H; ++n) {
        const double qn = law.q[static_cast<std::size_t>(n)];
        if (qn > 1e-290) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(std::log(qn) + 2.0 * std::log(static_cast<double>(n)));
        }
    }
    if (xs.size() < 4)
        fail("chi_interarrival_law: tail underflows, lower the horizon");
    double logc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) logc += ys[i] + k.F * xs[i];
    logc /= static_cast<double>(xs.size());
    law.C_fit = std::exp(logc);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = std::exp(ys[i] + k.F * xs[i] - logc) - 1.0;
        law.fit_spread = std::max(law.fit_spread, std::abs(r));
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double nn = static_cast<double>(xs.size());
    law.F_fit = -(nn * sxy - sx * sy) / (nn * sxx - sx * sx);

    double mass = 0.0, mean = 0.0;
    for (int n = 1; n <= H; ++n) {
        mass += law.q[static_cast<std::size_t>(n)];
        mean += n * law.q[static_cast<std::size_t>(n)];
    }
    if (law.F_fit > 1e-8) {
        mass += law.C_fit * kernel_tail_sum(law.F_fit, H);
        mean += law.C_fit * log_tail_sum(law.F_fit, H);
        law.mean = mean;
    } else {
        mass += law.C_fit * kernel_tail_sum(0.0, H);
        law.mean_diverges = true;
        law.mean = mean;  // truncated partial sum, flagged as divergent
    }
    law.mass = mass;
    return law;
}

double partition_function_renewal(const MarkovRenewalKernel& k,
                                  const RenewalLaw& law, int N) {
    if (N < 1) fail("partition_function_renewal: N must be >= 1");
    if (N + 1 > law.horizon)
        fail("partition_function_renewal: horizon shorter than N + 1");
    return std::exp(k.F * (N + 1)) / (k.epsilon * k.epsilon) *
           law.u[static_cast<std::size_t>(N) + 1];
}

double mean_chi_wetting(const KernelStack& st, const SpectralSolution& sol,
                        double* tail_fraction) {
    if (sol.lambda != 0.0)
        fail("mean_chi_wetting: needs the untilted spectral solution");
    const std::size_t m = st.nodes();
    const std::size_t ns = m + 1;
    if (sol.v.size() != ns || sol.w.size() != ns)
        fail("mean_chi_wetting: solution and stack disagree on the grid");
    const double eps_c = 1.0 / sol.delta;

    std::vector<double> mu(ns, 0.0);
    mu[0] = 1.0;
    for (std::size_t j = 0; j < m; ++j) mu[j + 1] = st.meas.weights[j];

    // sum_n n f(n)(x, y): the n = 1 slice charges the atom column, n >= 2
    // the continuum; past n_max complete with the 1/(n^2 (log n)^c) decay,
    // anchored at the last stored slice: the per-pair amplitude is
    // f(M)(x, y) M^2 (log M)^c and sum_{n>M} n / (n^2 (log n)^c) integrates
    // to (log M)^{1-c} / (c - 1)
    const double cplus = std::log(2.0) / std::log(1.5);
    const double M = static_cast<double>(st.n_max);
    const double tail_weight = M * M * std::pow(std::log(M), cplus) *
                               std::pow(std::log(M), 1.0 - cplus) /
                               (cplus - 1.0);

    double core = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < ns; ++i) {
        const double wi = mu[i] * sol.w[i] / sol.w[0];
        const double acc1 = st.atom1[state_node(st, i)];
        double accn = 0.0, acct = 0.0;
        for (int n = 2; n <= st.n_max; ++n) {
            const double* frow = st.fn(n).row(state_node(st, i));
            double dot = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                dot += frow[j] * sol.v[j + 1] * mu[j + 1];
            accn += n * dot;
            if (n == st.n_max) acct = dot;
        }
        core += wi * (acc1 * mu[0] + accn / sol.v[0]);
        tail += wi * acct * tail_weight / sol.v[0];
    }
    const double integral = core + tail;
    if (tail_fraction != nullptr)
        *tail_fraction = integral > 0.0 ? tail / integral : 0.0;
    return 1.0 + eps_c * integral;
}

}  // namespace lpw
