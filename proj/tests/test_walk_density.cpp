#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lpw/potential.hpp"
#include "lpw/walk_density.hpp"

using namespace lpw;

namespace {

// trapezoid mass and raw second moments of the closed-form joint density
void grid_moments(int n, double sigma, double& mass, double& myy, double& myz,
                  double& mzz) {
    double sy = sigma * std::sqrt(static_cast<double>(n));
    double sz = sigma * std::pow(static_cast<double>(n), 1.5) / std::sqrt(3.0);
    double hy = sy / 40.0, hz = sz / 40.0;
    mass = myy = myz = mzz = 0.0;
    for (int i = -400; i <= 400; ++i) {
        double wy = (std::abs(i) == 400) ? 0.5 : 1.0;
        double y = i * hy;
        for (int j = -400; j <= 400; ++j) {
            double wz = (std::abs(j) == 400) ? 0.5 : 1.0;
            double z = j * hz;
            double f = wy * wz * gaussian_joint_density(n, sigma, y, z);
            mass += f;
            myy += f * y * y;
            myz += f * y * z;
            mzz += f * z * z;
        }
    }
    mass *= hy * hz;
    myy *= hy * hz;
    myz *= hy * hz;
    mzz *= hy * hz;
}

}  // namespace

TEST_CASE("closed-form joint density integrates to one with the exact covariance") {
    for (int n : {2, 5, 12}) {
        double mass, myy, myz, mzz;
        grid_moments(n, 1.0, mass, myy, myz, mzz);
        double nn = n;
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(myy == doctest::Approx(nn).epsilon(1e-8));
        CHECK(myz == doctest::Approx(nn * (nn + 1.0) / 2.0).epsilon(1e-8));
        CHECK(mzz == doctest::Approx(nn * (nn + 1.0) * (2.0 * nn + 1.0) / 6.0).epsilon(1e-8));
    }
}

TEST_CASE("closed-form density scales with sigma") {
    // (Y, Z) under scale s is (s Y, s Z) under scale 1
    double a = gaussian_joint_density(7, 2.0, 1.2, -3.0);
    double b = gaussian_joint_density(7, 1.0, 0.6, -1.5) / 4.0;
    CHECK(a == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("scaling limit density is normalized with normal z marginal") {
    // 2-d trapezoid over [-12, 12]^2; the quadratic form has smallest
    // eigenvalue ~0.39 so the tail beyond the box is far below 1e-12
    const double L = 12.0, h = 0.02;
    const int M = static_cast<int>(std::lround(2.0 * L / h));
    double total = 0.0;
    for (int i = 0; i <= M; ++i) {
        double wy = (i == 0 || i == M) ? 0.5 : 1.0;
        double y = -L + i * h;
        double row = 0.0;
        for (int j = 0; j <= M; ++j) {
            double wz = (j == 0 || j == M) ? 0.5 : 1.0;
            row += wz * llt_limit_density(y, -L + j * h);
        }
        total += wy * row;
    }
    total *= h * h;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    // z marginal of the pair is centered normal with variance 1/3
    for (double z : {-1.0, 0.0, 0.4, 2.0})
        CHECK(llt_limit_marginal_z(z) ==
              doctest::Approx(std::sqrt(3.0 / (2.0 * M_PI)) * std::exp(-1.5 * z * z))
                  .epsilon(1e-12));
    // peak value carries the sqrt(3)/pi constant
    CHECK(llt_limit_density(0.0, 0.0) ==
          doctest::Approx(std::sqrt(3.0) / M_PI).epsilon(1e-13));
}

TEST_CASE("lattice propagation reproduces the gaussian closed form") {
    Potential pot = make_gaussian_potential(1.0);
    auto grids = propagate_joint_density(pot, 8, 0.25, {8});
    REQUIRE(grids.size() == 1);
    const JointDensityGrid& g = grids[0];
    CHECK(g.n == 8);
    CHECK(g.mass() == doctest::Approx(1.0).epsilon(1e-10));
    double worst = 0.0;
    for (std::size_t r = 0; r < g.values.nr; ++r) {
        double z = g.zgrid.node(r);
        for (std::size_t c = 0; c < g.values.nc; ++c) {
            double y = g.ygrid.node(c);
            worst = std::max(worst,
                             std::fabs(g.values(r, c) - gaussian_joint_density(8, 1.0, y, z)));
        }
    }
    // trapezoid sampling of a unit gaussian at h = 0.25 aliases far below
    // any floating error that could matter here
    CHECK(worst <= 1e-10);
}

TEST_CASE("local limit errors shrink along the n ladder") {
    Potential pot = make_gaussian_potential(1.0);
    auto rows = llt_check(pot, {8, 16, 32}, 0.25);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].sup_err < 0.05);
    CHECK(rows[1].sup_err < rows[0].sup_err);
    CHECK(rows[2].sup_err < rows[1].sup_err);
    CHECK(rows[2].sup_err < 0.012);
    CHECK(rows[1].marginal_sup_err < rows[0].marginal_sup_err);
    CHECK(rows[2].marginal_sup_err < rows[1].marginal_sup_err);
}

TEST_CASE("integrated walk sampler tracks its own recursion") {
    Potential pot = make_gaussian_potential(1.0);
    WalkPath w = sample_integrated_walk(pot, 12, 0.5, -0.25, 4242);
    REQUIRE(w.Y.size() == 13);
    REQUIRE(w.Z.size() == 13);
    CHECK(w.Y[0] == 0.5);
    CHECK(w.Z[0] == -0.25);
    for (std::size_t k = 1; k < w.Z.size(); ++k)
        CHECK(w.Z[k] == doctest::Approx(w.Z[k - 1] + w.Y[k]).epsilon(1e-14));
    // same seed, same path
    WalkPath v = sample_integrated_walk(pot, 12, 0.5, -0.25, 4242);
    CHECK(v.Y == w.Y);
    CHECK(v.Z == w.Z);
}

TEST_CASE("integrated walk sampler has the bridge-free covariance") {
    Potential pot = make_gaussian_potential(1.0);
    const int n = 10, reps = 40000;
    double sy = 0.0, syy = 0.0, szz = 0.0;
    for (int r = 0; r < reps; ++r) {
        WalkPath w = sample_integrated_walk(pot, n, 0.0, 0.0, 1000 + r);
        sy += w.Y[n];
        syy += w.Y[n] * w.Y[n];
        szz += w.Z[n] * w.Z[n];
    }
    double mean = sy / reps;
    double vy = syy / reps - mean * mean;
    double vz = szz / reps;
    double nn = n;
    CHECK(std::fabs(mean) <= 4.0 * std::sqrt(nn / reps));
    CHECK(std::fabs(vy - nn) <= 4.0 * nn * std::sqrt(2.0 / reps));
    double var_z = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 6.0;
    CHECK(std::fabs(vz - var_z) <= 4.0 * var_z * std::sqrt(2.0 / reps));
}

TEST_CASE("step weights are a normalized symmetric stencil") {
    Potential pot = make_gaussian_potential(1.0);
    long khalf = 0;
    std::vector<double> w = step_weights(pot, 0.25, khalf);
    REQUIRE(w.size() == static_cast<std::size_t>(2 * khalf + 1));
    double s = 0.0;
    for (double v : w) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
    for (long j = 0; j <= khalf; ++j)
        CHECK(w[khalf + j] == doctest::Approx(w[khalf - j]).epsilon(1e-12));
}
