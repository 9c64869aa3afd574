#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "lpw/kernel_stack.hpp"
#include "lpw/potential.hpp"

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

}  // namespace

TEST_CASE("pinning atom slice is the bare potential weight") {
    const KernelStack& st = pinning_reference();
    REQUIRE(st.atom1.size() == st.nodes());
    for (std::size_t i = 0; i < st.nodes(); ++i) {
        double x = st.meas.grid.node(i);
        CHECK(st.atom1[i] ==
              doctest::Approx(std::exp(-(0.5 * x * x + 0.5 * std::log(2.0 * M_PI))))
                  .epsilon(1e-12));
    }
    CHECK(st.eV0 == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-13));
}

TEST_CASE("kernel tail settles on the sqrt(3)/pi constant over n^2") {
    const KernelStack& st = pinning_reference();
    std::size_t z = st.zero_node();
    CHECK(st.tail_constant ==
          doctest::Approx(128.0 * 128.0 * st.fn(128)(z, z)).epsilon(1e-12));
    // n^2 f_{0,0}(n) converges to sqrt(3)/pi; at n_max = 128 the residual is
    // a few parts in 1e5
    CHECK(st.tail_constant == doctest::Approx(std::sqrt(3.0) / M_PI).epsilon(1e-4));
    CHECK(96.0 * 96.0 * st.fn(96)(z, z) ==
          doctest::Approx(st.tail_constant).epsilon(1e-4));
}

TEST_CASE("kernel bounds stay uniform in n") {
    auto rows = kernel_row_integrals(pinning_reference());
    REQUIRE(rows.size() >= 2);
    for (const auto& r : rows) {
        CHECK(r.max_n2_f > 0.0);
        CHECK(r.max_n2_f <= 0.70);
        CHECK(r.max_row_int <= 0.75);
        CHECK(r.max_col_int <= 1.25);
    }
}

TEST_CASE("wetting grid clamps to the reachable half line") {
    StackParams sp;
    sp.extent = 12.0;
    sp.h = 0.25;
    sp.n_max = 16;
    KernelStack wst = build_wetting_stack(make_gaussian_potential(1.0), sp);
    CHECK(wst.model == 'w');
    CHECK(wst.meas.half_line);
    CHECK(wst.meas.grid.node(0) == 0.0);
    // entry slopes above the one-step support cannot reach the wall region
    CHECK(wst.meas.grid.node(wst.meas.grid.size() - 1) == doctest::Approx(8.0));
}

TEST_CASE("wetting kernel is dominated by the pinning kernel") {
    Potential pot = make_gaussian_potential(1.0);
    StackParams sp;
    sp.extent = 12.0;
    sp.h = 0.25;
    sp.n_max = 24;
    KernelStack wst = build_wetting_stack(pot, sp);
    KernelStack pst = build_pinning_stack(pot, sp);
    std::size_t zw = wst.zero_node(), zp = pst.zero_node();
    for (int n : {2, 3, 8, 24}) {
        Mat ratio = wetting_weight_ratio(wst, pst, n);
        for (double v : ratio.a) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0 + 1e-12);
        }
        CHECK(wst.fn(n)(zw, zw) <= pst.fn(n)(zp, zp));
    }
    // restriction probabilities from a double zero, pinned by an independent
    // transfer-matrix computation of the same bridge event
    CHECK(wst.fn(7)(zw, zw) / pst.fn(7)(zp, zp) ==
          doctest::Approx(0.234930).epsilon(2e-4));
    CHECK(wst.fn(9)(zw, zw) / pst.fn(9)(zp, zp) ==
          doctest::Approx(0.200919).epsilon(2e-4));
}

TEST_CASE("tabulated potentials rebuild the gaussian kernels on the lattice") {
    std::vector<double> xs, vs;
    for (double x = -8.0; x <= 8.0 + 1e-12; x += 0.01) {
        xs.push_back(x);
        vs.push_back(0.5 * x * x + 0.5 * std::log(2.0 * M_PI));
    }
    Potential tab = make_tabulated_potential(xs, vs);
    Potential g = make_gaussian_potential(1.0);
    StackParams sp;
    sp.extent = 8.0;
    sp.h = 0.25;
    sp.n_max = 16;
    KernelStack a = build_pinning_stack(g, sp);
    KernelStack b = build_pinning_stack(tab, sp);
    REQUIRE(a.nodes() == b.nodes());
    std::size_t z = a.zero_node();
    for (int n : {2, 4, 8, 16})
        CHECK(b.fn(n)(z, z) == doctest::Approx(a.fn(n)(z, z)).epsilon(1e-2));
}

TEST_CASE("stack container round trips through disk") {
    StackParams sp;
    sp.extent = 6.0;
    sp.h = 0.5;
    sp.n_max = 12;
    KernelStack a = build_pinning_stack(make_gaussian_potential(1.0), sp);
    const char* path = "stack_roundtrip.bin";
    save_stack(a, path);
    KernelStack b = load_stack(path);
    CHECK(b.model == a.model);
    CHECK(b.n_max == a.n_max);
    CHECK(b.tail_constant == a.tail_constant);
    CHECK(b.pot_fingerprint == a.pot_fingerprint);
    REQUIRE(b.nodes() == a.nodes());
    CHECK(b.atom1 == a.atom1);
    for (int n = 2; n <= a.n_max; ++n)
        CHECK(b.fn(n).a == a.fn(n).a);
    std::remove(path);
}

TEST_CASE("fn range checking") {
    const KernelStack& st = pinning_reference();
    CHECK_THROWS(st.fn(1));
    CHECK_THROWS(st.fn(129));
}
