#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lpw/dp_oracle.hpp"
#include "lpw/kernel_stack.hpp"
#include "lpw/potential.hpp"
#include "lpw/walk_density.hpp"

using namespace lpw;

namespace {

const Potential& gauss() {
    static Potential pot = make_gaussian_potential(1.0);
    return pot;
}

// critical point of the reference pinning discretization, frozen once
constexpr double kEpsC = 0.982679291376;

}  // namespace

TEST_CASE("two-interior-site chain matches its closed form") {
    // N = 2: Z = (2 pi)^{-3/2} (1 + sqrt(pi / 3)) at eps = 1
    DpResult r = dp_partition(gauss(), 'p', 1.0, 2);
    double closed = std::pow(2.0 * M_PI, -1.5) * (1.0 + std::sqrt(M_PI / 3.0));
    CHECK(std::fabs(std::exp(r.log_z) / closed - 1.0) <= 1e-13);
}

TEST_CASE("free chain reproduces the integrated-walk joint density") {
    for (int N : {4, 8, 16}) {
        DpResult r = dp_partition(gauss(), 'p', 0.0, N);
        double ref = std::log(gaussian_joint_density(N + 1, 1.0, 0.0, 0.0));
        CHECK(r.log_z == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("wall-to-pinning ratio at eps = 0 converges at second order in h") {
    double ratio[3];
    int idx = 0;
    for (double h : {0.25, 0.125, 0.0625}) {
        DpParams prm;
        prm.h = h;
        DpResult zp = dp_partition(gauss(), 'p', 0.0, 6, prm);
        DpResult zw = dp_partition(gauss(), 'w', 0.0, 6, prm);
        ratio[idx++] = std::exp(zw.log_z - zp.log_z);
    }
    CHECK(ratio[0] == doctest::Approx(0.23493001).epsilon(1e-5));
    CHECK(ratio[1] == doctest::Approx(0.23779540).epsilon(1e-5));
    double order = (ratio[1] - ratio[0]) / (ratio[2] - ratio[1]);
    CHECK(order >= 3.2);
    CHECK(order <= 4.8);
}

TEST_CASE("kernel-stack slice ratio equals the transfer ratio at eps = 0") {
    StackParams sp;
    sp.extent = 12.0;
    sp.h = 0.25;
    sp.n_max = 16;
    KernelStack wst = build_wetting_stack(gauss(), sp);
    KernelStack pst = build_pinning_stack(gauss(), sp);
    std::size_t zw = wst.zero_node(), zp = pst.zero_node();
    DpParams prm;
    prm.h = 0.25;
    const double pinned[2] = {0.20091891, 0.23493001};
    for (int N : {8, 6}) {
        DpResult rp = dp_partition(gauss(), 'p', 0.0, N, prm);
        DpResult rw = dp_partition(gauss(), 'w', 0.0, N, prm);
        double dp_ratio = std::exp(rw.log_z - rp.log_z);
        double stack_ratio = wst.fn(N + 1)(zw, zw) / pst.fn(N + 1)(zp, zp);
        CHECK(stack_ratio == doctest::Approx(dp_ratio).epsilon(1e-4));
        CHECK(dp_ratio == doctest::Approx(pinned[N == 6]).epsilon(1e-5));
    }
}

TEST_CASE("wall constraint can only lower the partition function") {
    DpResult zp = dp_partition(gauss(), 'p', 1.0, 8);
    DpResult zw = dp_partition(gauss(), 'w', 1.0, 8);
    CHECK(zw.log_z <= zp.log_z);
}

TEST_CASE("auto extent grows until the truncation gap closes") {
    DpResult r = dp_partition(gauss(), 'p', 1.0, 8);
    CHECK(r.extent >= 16.0);
    CHECK(r.leak <= 1e-6);
    CHECK(r.grid_points ==
          static_cast<std::size_t>(2.0 * r.extent / 0.25) + 1);
}

TEST_CASE("explicit extent verification rejects a truncating window") {
    DpParams prm;
    prm.extent = 4.0;
    prm.verify = true;
    CHECK_THROWS(dp_partition(gauss(), 'p', 0.5, 24, prm));
}

TEST_CASE("contact fraction in the localized phase is pinned") {
    double d16 = dp_contact_fraction(gauss(), 'p', 2.0 * kEpsC, 16);
    CHECK(d16 == doctest::Approx(0.52648451).epsilon(1e-6));
}

TEST_CASE("free energy is increasing and convex in log eps") {
    ConvexityTable tab = dp_convexity_check(gauss(), 'p', std::log(0.6),
                                            std::log(2.4), 8, 8);
    REQUIRE(tab.t.size() == 8);
    REQUIRE(tab.f.size() == 8);
    CHECK(tab.min_first_difference > 0.0);
    CHECK(tab.min_second_difference >= -1e-8);
}

TEST_CASE("quenched oracle at beta = 0 collapses onto the pure model") {
    DpResult r = dp_partition(gauss(), 'p', 1.2, 6);
    QuenchedSample q = dp_quenched(gauss(), 'p', 1.2, 0.0, 6, {}, 4, 9);
    REQUIRE(q.f.size() == 4);
    for (double f : q.f) CHECK(f == r.log_z / 6.0);
    CHECK(q.sd == 0.0);
    CHECK(q.mean == r.log_z / 6.0);
}

TEST_CASE("quenched free energy sits between its annealed bounds") {
    const double beta = 0.5, eps = 1.2;
    const int N = 8;
    QuenchedSample q = dp_quenched(gauss(), 'p', eps, beta, N, {}, 8, 1);
    double M = std::exp(0.5 * beta * beta);
    double lower = dp_partition(gauss(), 'p', eps, N).log_z / N;
    double upper = dp_partition(gauss(), 'p', eps * M, N).log_z / N;
    CHECK(q.mean >= lower - 3.0 * q.se);
    CHECK(q.mean <= upper + 3.0 * q.se);
    CHECK(q.sd > 0.0);
}
