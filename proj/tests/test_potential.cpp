#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "lpw/potential.hpp"
#include "lpw/rng.hpp"

using namespace lpw;

namespace {

// dense Gaussian table on [-8, 8], used by the tabulated-kind tests
Potential gaussian_table(double step = 0.01) {
    std::vector<double> xs, vs;
    for (double x = -8.0; x <= 8.0 + 1e-12; x += step) {
        xs.push_back(x);
        vs.push_back(0.5 * x * x + 0.5 * std::log(2.0 * M_PI));
    }
    return make_tabulated_potential(xs, vs);
}

}  // namespace

TEST_CASE("gaussian potential closed forms") {
    Potential pot = make_gaussian_potential(1.0);
    CHECK(pot.is_gaussian());
    CHECK(pot.sigma() == 1.0);
    CHECK(pot.sigma2() == 1.0);
    // V(x) = x^2/2 + log sqrt(2 pi), so e^{-V} is the standard normal density
    CHECK(pot.density(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-14));
    for (double x : {-2.5, -1.0, 0.0, 0.3, 1.7})
        CHECK(pot.density(x) == doctest::Approx(std::exp(-pot.V(x))).epsilon(1e-13));
    double m0, m1, m2;
    pot.moments(m0, m1, m2);
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(m1) <= 1e-12);
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("gaussian cell mass matches the error function") {
    Potential pot = make_gaussian_potential(0.8);
    auto phi = [&](double x) { return 0.5 * std::erfc(-x / (0.8 * std::sqrt(2.0))); };
    CHECK(pot.cell_mass(-0.4, 1.1) == doctest::Approx(phi(1.1) - phi(-0.4)).epsilon(1e-12));
    CHECK(pot.cell_mass(-6.0, 6.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(pot.cell_mass(0.25, 0.25) == doctest::Approx(0.0));
}

TEST_CASE("gaussian sampling has the right first two moments") {
    Potential pot = make_gaussian_potential(1.3);
    Rng rng(12345);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = pot.sample(rng);
        s1 += x;
        s2 += x * x;
    }
    double mean = s1 / n, var = s2 / n - mean * mean;
    // 4 sigma Monte Carlo tolerances
    CHECK(std::fabs(mean) <= 4.0 * 1.3 / std::sqrt(static_cast<double>(n)));
    CHECK(std::fabs(var - 1.69) <= 4.0 * 1.69 * std::sqrt(2.0 / n));
}

TEST_CASE("tabulated potential reproduces its generating gaussian") {
    Potential tab = gaussian_table();
    CHECK(!tab.is_gaussian());
    // renormalization and recentering are near no-ops for a dense table
    double m0, m1, m2;
    tab.moments(m0, m1, m2);
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::fabs(m1) <= 1e-10);
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(tab.sigma2() == doctest::Approx(m2 / m0).epsilon(1e-12));
    Potential g = make_gaussian_potential(1.0);
    for (double x : {-3.0, -0.7, 0.0, 0.4, 2.2})
        CHECK(tab.density(x) == doctest::Approx(g.density(x)).epsilon(1e-4));
    // piecewise-linear V is exact at the nodes up to the renormalization shift
    CHECK(tab.V(2.0) - tab.V(0.0) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("tabulated sampling matches the table moments") {
    Potential tab = gaussian_table(0.05);
    Rng rng(777);
    const int n = 100000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = tab.sample(rng);
        s1 += x;
        s2 += x * x;
    }
    double mean = s1 / n, var = s2 / n - mean * mean;
    CHECK(std::fabs(mean) <= 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::fabs(var - 1.0) <= 4.0 * std::sqrt(2.0 / n) + 1e-3);
}

TEST_CASE("potential file round trip") {
    const char* path = "potential_roundtrip.txt";
    {
        std::ofstream f(path);
        f << "# quadratic table\n";
        for (double x = -6.0; x <= 6.0 + 1e-12; x += 0.02)
            f << x << " " << 0.5 * x * x << "\n";
    }
    Potential p = potential_from_file(path);
    CHECK(!p.is_gaussian());
    // 0.5 x^2 is the unnormalized standard normal: same density after
    // renormalization
    Potential g = make_gaussian_potential(1.0);
    CHECK(p.density(0.0) == doctest::Approx(g.density(0.0)).epsilon(1e-4));
    CHECK(p.density(1.5) == doctest::Approx(g.density(1.5)).epsilon(1e-4));
    std::remove(path);
}

TEST_CASE("fingerprints separate parameter sets and are stable") {
    Potential a = make_gaussian_potential(1.0);
    Potential b = make_gaussian_potential(1.0);
    Potential c = make_gaussian_potential(1.1);
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint() != c.fingerprint());
    CHECK(a.fingerprint() != gaussian_table().fingerprint());
}

TEST_CASE("tabulated construction rejects bad input") {
    CHECK_THROWS(make_tabulated_potential({0.0}, {1.0}));
    CHECK_THROWS(make_tabulated_potential({1.0, 0.0}, {0.5, 0.5}));
}

TEST_CASE("hamiltonian window sums curvature penalties and is affine invariant") {
    Potential pot = make_gaussian_potential(1.0);
    std::vector<double> phi = {0.3, -0.1, 0.7, 0.2, -0.4, 0.05};
    double direct = 0.0;
    for (std::size_t n = 1; n + 1 < phi.size(); ++n)
        direct += pot.V(phi[n + 1] + phi[n - 1] - 2.0 * phi[n]);
    CHECK(hamiltonian_window(pot, phi) == doctest::Approx(direct).epsilon(1e-13));
    std::vector<double> shifted = phi;
    for (std::size_t n = 0; n < shifted.size(); ++n) shifted[n] += 2.5 - 0.7 * n;
    CHECK(hamiltonian_window(pot, shifted) ==
          doctest::Approx(hamiltonian_window(pot, phi)).epsilon(1e-12));
}
