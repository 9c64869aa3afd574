#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "lpw/rng.hpp"

namespace lpw {

// Single-site potential V with normalized density e^{-V}.
// Two kinds: a closed-form Gaussian (all integrals analytic) and a tabulated
// potential given as nodes (x, V(x)), piecewise linear in V so the density is
// piecewise exponential and segment integrals stay closed-form. Tabulated
// input is renormalized (integral 1) and recentered (mean 0) on construction.
class Potential {
public:
    enum class Kind { gaussian, tabulated };

    Kind kind() const { return kind_; }
    double sigma() const { return sigma_; }
    double sigma2() const { return sigma_ * sigma_; }
    // truncation radius: density treated as zero beyond |x| > support_bound
    double support_bound() const { return support_; }

    double V(double x) const;        // +inf outside support (returned as large)
    double density(double x) const;  // e^{-V(x)}, 0 outside support

    // integral of the density over [a, b], exact per segment
    double cell_mass(double a, double b) const;

    // raw moments of the density over the support: m0, m1, m2
    void moments(double& m0, double& m1, double& m2) const;

    // one draw from the density (inverse CDF on segments; exact normal draw
    // in the Gaussian case)
    double sample(Rng& rng) const;

    // stable hash of kind + parameters + table, for cache keys and manifests
    std::uint64_t fingerprint() const;

    bool is_gaussian() const { return kind_ == Kind::gaussian; }

private:
    Kind kind_ = Kind::gaussian;
    double sigma_ = 1.0;
    double support_ = 8.0;
    // tabulated data (empty for Gaussian)
    std::vector<double> xs_, vs_;
    std::vector<double> cum_;  // cumulative density mass at xs_ nodes

    friend Potential make_gaussian_potential(double sigma);
    friend Potential make_tabulated_potential(std::vector<double> xs,
                                              std::vector<double> vs,
                                              double support_bound);
};

Potential make_gaussian_potential(double sigma);

// nodes (xs[i], vs[i]) with xs sorted strictly increasing; V is interpolated
// linearly, the density renormalized and recentered. Throws on
// non-normalizable input or vanishing second moment.
Potential make_tabulated_potential(std::vector<double> xs,
                                   std::vector<double> vs,
                                   double support_bound = 0.0);

// two-column whitespace-separated text file of (x, V(x)); '#' comments
Potential potential_from_file(const std::string& path,
                              double support_bound = 0.0);

// H over a finite window: sum_{n=1}^{len-2} V(phi[n+1] + phi[n-1] - 2 phi[n]).
// Invariant under phi[n] -> phi[n] + c + d n.
double hamiltonian_window(const Potential& pot, const std::vector<double>& phi);

}  // namespace lpw
