#include "lpw/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lpw {
namespace {

constexpr double kEulerGamma = 0.57721566490153286;

// sum_{n > M} 1/n^2 by the Euler-Maclaurin expansion of the trigamma tail
double zeta2_tail(int M) {
    double m = static_cast<double>(M);
    return 1.0 / m - 1.0 / (2.0 * m * m) + 1.0 / (6.0 * m * m * m) -
           1.0 / (30.0 * m * m * m * m * m);
}

}  // namespace

double kernel_tail_sum(double lambda, int n_max) {
    if (lambda < 0.0) fail("kernel_tail_sum: lambda must be >= 0");
    if (lambda < 1e-8) return zeta2_tail(n_max);
    if (lambda < 1e-4) {
        // S(0) - sum_{n>M} (1 - e^{-lambda n})/n^2, the correction evaluated
        // by the midpoint integral with E1 in its small-argument series
        double a = n_max + 0.5;
        double x = lambda * a;
        double e1 = -kEulerGamma - std::log(x) + x - x * x / 4.0 +
                    x * x * x / 18.0;
        return zeta2_tail(n_max) -
               ((-std::expm1(-x)) / a + lambda * e1);
    }
    double q = std::exp(-lambda);
    double qn = std::pow(q, static_cast<double>(n_max + 1));
    double acc = 0.0;
    for (int n = n_max + 1; qn > acc * 1e-16 + 1e-300; ++n) {
        acc += qn / (static_cast<double>(n) * n);
        qn *= q;
    }
    return acc;
}

OperatorMatrix assemble_operator(const KernelStack& st, double lambda) {
    if (lambda < 0.0) fail("assemble_operator: lambda must be >= 0");
    OperatorMatrix op;
    op.model = st.model;
    op.lambda = lambda;
    std::size_t m = st.nodes();
    op.mu.resize(m + 1);
    op.mu[0] = st.meas.atom_weight;
    for (std::size_t j = 0; j < m; ++j) op.mu[j + 1] = st.meas.weights[j];
    op.i0 = st.zero_node() + 1;

    // geometric weights e^{-lambda n} and the tail completion factor
    std::vector<double> g(static_cast<std::size_t>(st.n_max) + 1, 0.0);
    double q = std::exp(-lambda);
    g[1] = q;
    for (int n = 2; n <= st.n_max; ++n)
        g[static_cast<std::size_t>(n)] = g[static_cast<std::size_t>(n - 1)] * q;
    double tail = kernel_tail_sum(lambda, st.n_max) *
                  static_cast<double>(st.n_max) * st.n_max;

    op.A = Mat(m + 1, m + 1);
    for (std::size_t i = 0; i < m; ++i) {
        double* out = op.A.row(i + 1);
        out[0] = g[1] * st.atom1[i] * op.mu[0];
        for (int n = 2; n <= st.n_max; ++n) {
            double gn = g[static_cast<std::size_t>(n)];
            const double* fr = st.fn(n).row(i);
            for (std::size_t j = 0; j < m; ++j) out[j + 1] += gn * fr[j];
        }
        const double* flast = st.fn(st.n_max).row(i);
        for (std::size_t j = 0; j < m; ++j) {
            out[j + 1] += tail * flast[j];
            out[j + 1] *= op.mu[j + 1];
        }
    }
    // the atom row sees the same kernels as the continuum node at zero
    std::copy(op.A.row(op.i0), op.A.row(op.i0) + m + 1, op.A.row(0));
    return op;
}

namespace {

double matvec(const Mat& A, const std::vector<double>& x, bool transpose,
              std::vector<double>& y) {
    std::size_t n = A.nr;
    std::fill(y.begin(), y.end(), 0.0);
    if (!transpose) {
        for (std::size_t i = 0; i < n; ++i) {
            const double* r = A.row(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += r[j] * x[j];
            y[i] = acc;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double* r = A.row(i);
            double xi = x[i];
            if (xi == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) y[j] += r[j] * xi;
        }
    }
    double s = 0.0;
    for (double t : y) s += t * t;
    return std::sqrt(s);
}

// dominant eigenpair of A (or A^T) by power iteration; vectors of a strictly
// positive primitive matrix stay positive, so no sign bookkeeping is needed
double power_iteration(const Mat& A, bool transpose, double tol,
                       std::vector<double>& v, double& resid) {
    std::size_t n = A.nr;
    v.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> y(n);
    double delta = 0.0;
    const int itmax = 200000;
    for (int it = 0; it < itmax; ++it) {
        double ny = matvec(A, v, transpose, y);
        if (ny <= 0.0) fail("spectral_radius: operator annihilated the iterate");
        // Rayleigh-style estimate: <v, Av> with ||v|| = 1
        delta = 0.0;
        for (std::size_t k = 0; k < n; ++k) delta += v[k] * y[k];
        double r2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double d = y[k] - delta * v[k];
            r2 += d * d;
        }
        resid = std::sqrt(r2);
        for (std::size_t k = 0; k < n; ++k) v[k] = y[k] / ny;
        if (resid <= tol * std::max(delta, 1e-300)) return delta;
    }
    fail("spectral_radius: no convergence after iteration cap, residual " +
         std::to_string(resid));
}

}  // namespace

SpectralSolution spectral_radius(const OperatorMatrix& op, double tol) {
    SpectralSolution sol;
    sol.lambda = op.lambda;
    double resid_r = 0.0, resid_l = 0.0;
    double dr = power_iteration(op.A, false, tol, sol.v, resid_r);
    std::vector<double> what;
    power_iteration(op.A, true, tol, what, resid_l);
    sol.delta = dr;
    sol.residual = std::max(resid_r, resid_l);

    // the transpose eigenvector is w-hat = mu .* w; recover w and normalize
    // so that <v, w>_mu = sum_i v_i what_i = 1, making nu a probability
    std::size_t n = op.A.nr;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += sol.v[i] * what[i];
    if (s <= 0.0) fail("spectral_radius: degenerate eigenvector pairing");
    sol.w.resize(n);
    sol.nu.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        what[i] /= s;
        sol.w[i] = op.mu[i] > 0.0 ? what[i] / op.mu[i] : 0.0;
        sol.nu[i] = sol.v[i] * what[i];
    }
    return sol;
}

SpectralSolution solve_at(const KernelStack& st, double lambda, double tol) {
    return spectral_radius(assemble_operator(st, lambda), tol);
}

double critical_epsilon(const KernelStack& st) {
    return 1.0 / solve_at(st, 0.0).delta;
}

double free_energy(const KernelStack& st, double epsilon) {
    if (epsilon <= 0.0) fail("free_energy: epsilon must be > 0");
    double d0 = solve_at(st, 0.0).delta;
    double target = 1.0 / epsilon;
    if (target >= d0) return 0.0;
    // delta(lambda) <= delta(0) e^{-lambda}, so this bracket always closes;
    // the widening loop is a guard against quadrature-level slack
    double lo = 0.0;
    double hi = std::log(epsilon * d0) + 1.0;
    while (solve_at(st, hi).delta > target) hi += 1.0;
    while (hi - lo > 1e-10) {
        double mid = 0.5 * (lo + hi);
        if (solve_at(st, mid).delta > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

ContactDerivative contact_fraction_derivative(const KernelStack& st,
                                              double epsilon,
                                              double rel_step) {
    if (epsilon <= 0.0) fail("contact_fraction_derivative: epsilon must be > 0");
    if (rel_step <= 0.0 || rel_step >= 1.0)
        fail("contact_fraction_derivative: rel_step must lie in (0, 1)");
    double eps_c = critical_epsilon(st);
    ContactDerivative out;
    out.F = free_energy(st, epsilon);
    double lo = epsilon * (1.0 - rel_step), hi = epsilon * (1.0 + rel_step);
    if (lo > eps_c || hi < eps_c) {
        out.value = (free_energy(st, hi) - free_energy(st, lo)) /
                    (2.0 * rel_step);
        return out;
    }
    // stencil straddles the critical point: one-sided difference, flagged
    out.one_sided = true;
    if (epsilon > eps_c)
        out.value = (free_energy(st, hi) - out.F) / rel_step;
    else
        out.value = (out.F - free_energy(st, lo)) / rel_step;
    return out;
}

}  // namespace lpw
