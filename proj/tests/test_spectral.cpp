#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lpw/kernel_stack.hpp"
#include "lpw/potential.hpp"
#include "lpw/spectral.hpp"

using namespace lpw;

namespace {

const KernelStack& pinning_reference() {
    static KernelStack st = [] {
        StackParams sp;
        sp.extent = 18.0;
        sp.h = 0.25;
        sp.n_max = 128;
        return build_pinning_stack(make_gaussian_potential(1.0), sp);
    }();
    return st;
}

double brute_tail(double lambda, int n_max) {
    double s = 0.0;
    for (int n = 4000000; n > n_max; --n)
        s += std::exp(-lambda * n) / (static_cast<double>(n) * n);
    return s;
}

}  // namespace

TEST_CASE("completed kernel tail sums match brute force") {
    for (int n_max : {8, 128}) {
        for (double lam : {0.0, 1e-4, 0.07, 1.0}) {
            double ref = brute_tail(lam, n_max);
            CHECK(kernel_tail_sum(lam, n_max) == doctest::Approx(ref).epsilon(1e-10));
        }
    }
}

TEST_CASE("spectral radius ladder on the reference stack") {
    const KernelStack& st = pinning_reference();
    // frozen from this configuration (extent 18, h = 0.25, n_max = 128)
    const double expect[5][2] = {{0.0, 1.017626003495},
                                 {0.1, 0.692112785489},
                                 {0.5, 0.336118109349},
                                 {1.0, 0.174734318638},
                                 {2.0, 0.057218942146}};
    for (const auto& e : expect) {
        SpectralSolution s = solve_at(st, e[0]);
        CHECK(s.delta == doctest::Approx(e[1]).epsilon(1e-8));
        CHECK(s.residual <= 1e-11);
        double nu_sum = 0.0;
        for (double v : s.nu) nu_sum += v;
        CHECK(nu_sum == doctest::Approx(1.0).epsilon(1e-10));
        for (double v : s.v) CHECK(v > 0.0);
    }
}

TEST_CASE("critical epsilon and free energy values are pinned") {
    const KernelStack& st = pinning_reference();
    double ec = critical_epsilon(st);
    CHECK(ec == doctest::Approx(0.982679291376).epsilon(1e-8));
    CHECK(free_energy(st, 2.0 * ec) == doctest::Approx(0.244306989747).epsilon(1e-7));
    CHECK(free_energy(st, 1.05 * ec) == doctest::Approx(0.005370293123).epsilon(1e-5));
}

TEST_CASE("free energy vanishes below the critical point and grows above") {
    const KernelStack& st = pinning_reference();
    double ec = critical_epsilon(st);
    CHECK(free_energy(st, 0.5 * ec) == 0.0);
    CHECK(free_energy(st, 0.999 * ec) == 0.0);
    CHECK(free_energy(st, ec * 1.000001) >= 0.0);
    CHECK(free_energy(st, ec * 1.000001) < 1e-4);
    double f1 = free_energy(st, 1.2 * ec);
    double f2 = free_energy(st, 1.5 * ec);
    double f3 = free_energy(st, 3.0 * ec);
    CHECK(f1 > 0.0);
    CHECK(f2 > f1);
    CHECK(f3 > f2);
    // for large rewards one contact per step dominates: F ~ log eps
    CHECK(free_energy(st, 1e6) / std::log(1e6) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("contact fraction derivative is positive, monotone, and flags straddles") {
    const KernelStack& st = pinning_reference();
    double ec = critical_epsilon(st);
    ContactDerivative a = contact_fraction_derivative(st, 1.2 * ec);
    ContactDerivative b = contact_fraction_derivative(st, 2.0 * ec);
    CHECK(!a.one_sided);
    CHECK(!b.one_sided);
    CHECK(a.value > 0.0);
    CHECK(b.value > a.value);
    CHECK(b.value < 1.0);
    ContactDerivative c = contact_fraction_derivative(st, ec);
    CHECK(c.one_sided);
    ContactDerivative d = contact_fraction_derivative(st, 0.5 * ec);
    CHECK(d.value == 0.0);
}

TEST_CASE("wetting critical point sits above the pinning one") {
    Potential pot = make_gaussian_potential(1.0);
    StackParams sw;
    sw.extent = 12.0;
    sw.h = 0.25;
    sw.n_max = 64;
    KernelStack wst = build_wetting_stack(pot, sw);
    double ecw = critical_epsilon(wst);
    CHECK(ecw == doctest::Approx(1.772015634208).epsilon(1e-7));
    CHECK(ecw > critical_epsilon(pinning_reference()));

    StackParams sw40 = sw;
    sw40.n_max = 40;
    KernelStack w40 = build_wetting_stack(pot, sw40);
    SpectralSolution s0 = solve_at(w40, 0.0);
    CHECK(s0.delta == doctest::Approx(0.564723378487).epsilon(1e-8));
}

TEST_CASE("operator assembly marks the atom and continuum blocks") {
    const KernelStack& st = pinning_reference();
    OperatorMatrix op = assemble_operator(st, 0.3);
    REQUIRE(op.mu.size() == st.nodes() + 1);
    CHECK(op.lambda == 0.3);
    CHECK(op.i0 == st.zero_node() + 1);
    CHECK(op.mu[0] == 1.0);
    // column 0 holds the n = 1 jumps into the atom: e^{-lambda} e^{-V(x)}
    for (std::size_t i = 1; i < op.mu.size(); ++i)
        CHECK(op.A(i, 0) ==
              doctest::Approx(std::exp(-0.3) * st.atom1[i - 1]).epsilon(1e-12));
}
