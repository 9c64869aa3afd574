#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lpw/kernel_stack.hpp"
#include "lpw/potential.hpp"
#include "lpw/renewal.hpp"
#include "lpw/rng.hpp"
#include "lpw/sampler.hpp"
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

const MarkovRenewalKernel& localized_kernel() {
    static MarkovRenewalKernel k = [] {
        const KernelStack& st = pinning_reference();
        double eps = 2.0 * critical_epsilon(st);
        return build_markov_kernel(st, solve_at(st, free_energy(st, eps)),
                                   eps);
    }();
    return k;
}

}  // namespace

TEST_CASE("skeleton draws satisfy the renewal conventions") {
    const MarkovRenewalKernel& k = localized_kernel();
    const int N = 128;
    SkeletonSampler sk(k, N);
    CHECK(sk.acceptance() == sk.law().u[N + 1]);
    Rng rng(2024);
    for (int rep = 0; rep < 200; ++rep) {
        ContactSkeleton cs = sk.draw(rng);
        REQUIRE(cs.tau.size() == cs.J.size());
        REQUIRE(cs.tau.size() >= 2);
        CHECK(cs.tau.front() == 0);
        CHECK(cs.tau.back() == N + 1);
        CHECK(cs.J.front() == 0.0);
        CHECK(cs.J.back() == 0.0);
        CHECK(cs.attempts >= 1);
        for (std::size_t i = 1; i < cs.tau.size(); ++i) {
            long gap = cs.tau[i] - cs.tau[i - 1];
            CHECK(gap >= 1);
            // a unit return lands on the atom, anything longer on a height
            CHECK((cs.J[i] == 0.0) == (gap == 1));
        }
    }
}

TEST_CASE("skeleton draws are reproducible") {
    const MarkovRenewalKernel& k = localized_kernel();
    SkeletonSampler a(k, 64), b(k, 64);
    Rng ra(7), rb(7);
    for (int rep = 0; rep < 10; ++rep) {
        ContactSkeleton ca = a.draw(ra), cb = b.draw(rb);
        CHECK(ca.tau == cb.tau);
        CHECK(ca.J == cb.J);
        CHECK(ca.attempts == cb.attempts);
    }
    ContactSkeleton c1 = sample_contact_skeleton(k, 64, 99);
    ContactSkeleton c2 = sample_contact_skeleton(k, 64, 99);
    CHECK(c1.tau == c2.tau);
    CHECK(c1.J == c2.J);
}

TEST_CASE("unconditioned first returns follow the interarrival law") {
    const MarkovRenewalKernel& k = localized_kernel();
    SkeletonSampler sk(k, 16);
    const RenewalLaw& law = sk.law();
    Rng rng(515);
    const int reps = 20000;
    std::vector<long> count(18, 0);
    for (int i = 0; i < reps; ++i) {
        long n = sk.first_return(rng);
        REQUIRE(n >= 1);
        CHECK(n != 2);
        if (n <= 16)
            ++count[static_cast<std::size_t>(n)];
        else
            ++count[17];
    }
    CHECK(count[2] == 0);
    double chi2 = 0.0;
    double rest = reps;
    for (int n = 1; n <= 16; ++n) {
        if (n == 2) continue;
        double expect = reps * law.q[static_cast<std::size_t>(n)];
        rest -= expect;
        chi2 += (count[n] - expect) * (count[n] - expect) / expect;
    }
    chi2 += (count[17] - rest) * (count[17] - rest) / rest;
    // 16 effective bins; 36 is far in the tail of chi-square(15)
    CHECK(chi2 < 36.0);
}

TEST_CASE("field draws report self-consistent contact statistics") {
    const MarkovRenewalKernel& k = localized_kernel();
    const Potential pot = make_gaussian_potential(1.0);
    FieldSample fs = sample_field(k, pot, 48, 31);
    REQUIRE(fs.phi.size() == 49);
    CHECK(fs.phi[0] == 0.0);
    FieldSample g;
    g.phi = fs.phi;
    compute_field_stats(g);
    CHECK(g.tau == fs.tau);
    CHECK(g.chi == fs.chi);
    CHECK(g.ell == fs.ell);
    CHECK(g.iota == fs.iota);
    CHECK(g.gap == fs.gap);
    CHECK(g.sup_abs == fs.sup_abs);
}

TEST_CASE("localized contact fractions match the transfer derivative") {
    const MarkovRenewalKernel& k = localized_kernel();
    const Potential pot = make_gaussian_potential(1.0);
    const int N = 64;
    PathStatsTable tab = path_statistics_experiment(k, pot, N, 300, 12);
    REQUIRE(tab.ell_frac.size() == 300);
    // double-contact density equals one over the mean return time, with the
    // forced double zero at the origin contributing one boundary unit
    RenewalLaw law = chi_interarrival_law(k);
    double iota_ref = 1.0 / law.mean, boundary = 1.0 / N;
    CHECK(std::fabs(tab.mean_iota - (iota_ref + boundary)) <=
          3.0 * tab.se_iota + boundary);
    // contact count over [1, N] equals N D_N plus the forced zero at site N;
    // D_64 is pinned from the transfer oracle
    double ell_ref = 64.0 * 0.53645345 + 1.0;
    CHECK(std::fabs(N * tab.mean_ell - ell_ref) <=
          3.0 * N * tab.se_ell + 0.5);
    CHECK(tab.rejection_rate >= 0.0);
    CHECK(tab.mean_sup > 0.0);
}

TEST_CASE("excursion fill matches the conditional Gaussian closed form") {
    const Potential pot = make_gaussian_potential(1.0);
    Rng rng(808);
    const double x = 0.7, y = -0.3;
    const int reps = 20000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < reps; ++i) {
        std::vector<double> w = fill_excursion(pot, 'p', x, y, 3, rng);
        REQUIRE(w.size() == 2);
        CHECK(w[1] == y);
        s1 += w[0];
        s2 += w[0] * w[0];
    }
    double mean = s1 / reps;
    double var = s2 / reps - mean * mean;
    // minimizing (w + x)^2 + (y - 2w)^2 + (w - 2y)^2 gives w* = (4y - x)/6
    // with curvature 6, so the conditional law is N((4y - x)/6, 1/6)
    double expect = (4.0 * y - x) / 6.0;
    CHECK(std::fabs(mean - expect) <= 4.0 * std::sqrt(1.0 / 6.0 / reps));
    CHECK(std::fabs(var * 6.0 - 1.0) <= 0.06);
}

TEST_CASE("excursion fill endpoints and sizes") {
    const Potential pot = make_gaussian_potential(1.0);
    std::vector<double> w2 = fill_excursion(pot, 'p', 0.4, -0.2, 2, 5);
    REQUIRE(w2.size() == 1);
    CHECK(w2[0] == -0.2);
    std::vector<double> w9 = fill_excursion(pot, 'p', 0.0, 1.1, 9, 5);
    REQUIRE(w9.size() == 8);
    CHECK(w9.back() == 1.1);
}

TEST_CASE("wetting draws stay on the positive half line") {
    StackParams sw;
    sw.extent = 12.0;
    sw.h = 0.25;
    sw.n_max = 64;
    KernelStack wst = build_wetting_stack(make_gaussian_potential(1.0), sw);
    double eps = 2.0 * critical_epsilon(wst);
    MarkovRenewalKernel k =
        build_markov_kernel(wst, solve_at(wst, free_energy(wst, eps)), eps);
    const Potential pot = make_gaussian_potential(1.0);
    FieldSample fs = sample_field(k, pot, 64, 17);
    for (double v : fs.phi) CHECK(v >= 0.0);
    Rng rng(21);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> w = fill_excursion(pot, 'w', 0.5, 0.25, 6, rng);
        for (double v : w) CHECK(v >= 0.0);
    }
}

TEST_CASE("tabulated potentials fill through the gridded propagator") {
    std::vector<double> xs, vs;
    for (double x = -8.0; x <= 8.0 + 1e-12; x += 0.01) {
        xs.push_back(x);
        vs.push_back(0.5 * x * x + 0.5 * std::log(2.0 * M_PI));
    }
    const Potential tab = make_tabulated_potential(xs, vs);
    const Potential pot = make_gaussian_potential(1.0);
    Rng ra(66), rb(67);
    const int reps = 2000;
    double sa = 0.0, sa2 = 0.0, sb = 0.0, sb2 = 0.0;
    for (int i = 0; i < reps; ++i) {
        double a = fill_excursion(tab, 'p', 0.3, -0.1, 4, ra)[0];
        double b = fill_excursion(pot, 'p', 0.3, -0.1, 4, rb)[0];
        sa += a;
        sa2 += a * a;
        sb += b;
        sb2 += b * b;
    }
    double ma = sa / reps, mb = sb / reps;
    double va = sa2 / reps - ma * ma, vb = sb2 / reps - mb * mb;
    double se = std::sqrt((va + vb) / reps);
    CHECK(std::fabs(ma - mb) <= 4.0 * se);
    CHECK(va / vb >= 0.85);
    CHECK(va / vb <= 1.2);
    // the forward-slice budget is enforced
    FillParams tight;
    tight.max_bytes = 1000;
    CHECK_THROWS(fill_excursion(tab, 'p', 0.0, 0.0, 24, 3, tight));
}

TEST_CASE("deep delocalized conditioning is rejected up front") {
    const KernelStack& st = pinning_reference();
    double eps = 0.5 * critical_epsilon(st);
    MarkovRenewalKernel k = build_markov_kernel(st, solve_at(st, 0.0), eps);
    CHECK_THROWS(SkeletonSampler(k, 256));
}

TEST_CASE("free positivity survival decays with the known small exponent") {
    const Potential pot = make_gaussian_potential(1.0);
    RepulsionFit fit =
        entropic_repulsion_mc(pot, {64, 128, 256, 512}, 20000, 7, false);
    REQUIRE(fit.rows.size() == 4);
    CHECK(!fit.bridge);
    CHECK(!fit.widened);
    for (const auto& r : fit.rows) {
        CHECK(r.p >= r.p_y);
        CHECK(r.survivors > 100);
    }
    CHECK(fit.exponent >= 0.05);
    CHECK(fit.exponent <= 0.45);
    RepulsionFit again =
        entropic_repulsion_mc(pot, {64, 128, 256, 512}, 20000, 7, false);
    CHECK(again.exponent == fit.exponent);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(again.rows[i].survivors == fit.rows[i].survivors);
}

TEST_CASE("bridge positivity survival decays faster than the free walk") {
    const Potential pot = make_gaussian_potential(1.0);
    RepulsionFit fit =
        entropic_repulsion_mc(pot, {32, 64, 128}, 4000, 11, true);
    REQUIRE(fit.rows.size() == 3);
    CHECK(fit.bridge);
    CHECK(fit.exponent >= 0.2);
    CHECK(fit.exponent <= 0.8);
}
