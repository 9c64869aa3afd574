#pragma once
#include <cstddef>
#include <vector>

#include "lpw/kernel_stack.hpp"
#include "lpw/util.hpp"

namespace lpw {

// Discretization of the tilted transfer operator
//   (B^lambda g)(x) = e^{-lambda} f(1)(x) g(0-atom)
//                   + sum_{n>=2} e^{-lambda n} int f(n)(x, y) g(y) mu(dy),
// with the n-sum completed beyond n_max by the c/n^2 kernel tail. Index 0 is
// the atom at zero; indices 1..m are the continuum nodes (including the
// continuum node at zero, which the n >= 2 kernels charge under dy while the
// atom only ever receives the n = 1 term).
struct OperatorMatrix {
    char model = 'p';
    double lambda = 0.0;
    Mat A;                   // (1+m)^2, mu-weights folded into columns
    std::vector<double> mu;  // [atom weight, continuum trapezoid weights]
    std::size_t i0 = 0;      // index of the continuum node at zero
    bool tail_included = true;
};

// sum_{n > n_max} e^{-lambda n} / n^2, evaluated to ~1e-12 absolute across
// all regimes (exact zeta' tail at lambda = 0, exponential-integral expansion
// for tiny lambda, geometric direct sum otherwise)
double kernel_tail_sum(double lambda, int n_max);

OperatorMatrix assemble_operator(const KernelStack& st, double lambda);

struct SpectralSolution {
    double lambda = 0.0;
    double delta = 0.0;        // spectral radius
    std::vector<double> v, w;  // right / left eigenfunctions on [atom, nodes]
    std::vector<double> nu;    // nu_i = v_i w_i mu_i, a probability vector
    double residual = 0.0;     // ||A v - delta v||_2 with ||v||_2 = 1
};

// power iteration on A and A^T; converges when the residual drops below
// tol * delta, errors out with the last residual after the iteration cap
SpectralSolution spectral_radius(const OperatorMatrix& op, double tol = 1e-12);

// convenience: assemble at lambda and solve
SpectralSolution solve_at(const KernelStack& st, double lambda,
                          double tol = 1e-12);

// epsilon_c = 1 / delta(0)
double critical_epsilon(const KernelStack& st);

// F(eps) = 0 for eps <= epsilon_c, else the unique lambda with
// delta(lambda) = 1/eps (bisection, absolute tolerance 1e-10 on lambda)
double free_energy(const KernelStack& st, double epsilon);

struct ContactDerivative {
    double value = 0.0;   // D(eps) = eps F'(eps)
    double F = 0.0;       // free energy at eps
    bool one_sided = false;  // set when [eps(1-h), eps(1+h)] straddles eps_c
};

// central difference D = (F(eps(1+h)) - F(eps(1-h))) / (2h); falls back to a
// flagged one-sided difference when the stencil straddles the critical point
ContactDerivative contact_fraction_derivative(const KernelStack& st,
                                              double epsilon,
                                              double rel_step = 1e-3);

}  // namespace lpw
