#include "lpw/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lpw/util.hpp"

namespace lpw {
namespace {

constexpr double kVClamp = 800.0;  // e^-800 underflows to 0, slope stays finite

double std_normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }
double std_normal_pdf(double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI);
}

// Segment integrals of e^{-(va + s t)} over t in [0, d], s = (vb - va)/d.
// phi0/psi1/psi2 are the zeroth, first and second moment shapes in the
// rescaled variable; evaluated only at u >= 0 so every value sits in [0, 1]
// and nothing overflows even for clamped (infinite) potential values.
double phi0(double u) {
    if (u < 1e-4) return 1.0 - u / 2.0 + u * u / 6.0;
    return -std::expm1(-u) / u;
}
double psi1(double u) {
    if (u < 1e-4) return 0.5 - u / 3.0 + u * u / 8.0;
    return (phi0(u) - std::exp(-u)) / u;
}
double psi2(double u) {
    if (u < 1e-4) return 1.0 / 3.0 - u / 4.0 + u * u / 10.0;
    return (2.0 * psi1(u) - std::exp(-u)) / u;
}

// moments of e^{-V} over one linear-V segment [xa, xb], about the origin
void segment_moments(double xa, double va, double xb, double vb, double& m0,
                     double& m1, double& m2) {
    double d = xb - xa;
    double i0, i1, i2;  // raw moments about the left endpoint
    if (va <= vb) {
        double ea = std::exp(-va), u = vb - va;
        i0 = d * ea * phi0(u);
        i1 = d * d * ea * psi1(u);
        i2 = d * d * d * ea * psi2(u);
    } else {
        // integrate from the low-V end to keep every factor bounded
        double eb = std::exp(-vb), u = va - vb;
        double p0 = phi0(u), p1 = psi1(u), p2 = psi2(u);
        i0 = d * eb * p0;
        i1 = d * d * eb * (p0 - p1);
        i2 = d * d * d * eb * (p0 - 2.0 * p1 + p2);
    }
    m0 += i0;
    m1 += xa * i0 + i1;
    m2 += xa * xa * i0 + 2.0 * xa * i1 + i2;
}

// mass of e^{-V} over [xa + t0, xa + t1] inside a segment with slope s
double segment_mass_part(double va, double s, double t0, double t1) {
    double d = t1 - t0;
    if (d <= 0.0) return 0.0;
    double vstart = va + s * t0, vend = va + s * t1;
    if (vstart <= vend) return d * std::exp(-vstart) * phi0(vend - vstart);
    return d * std::exp(-vend) * phi0(vstart - vend);
}

}  // namespace

double Potential::V(double x) const {
    if (std::abs(x) > support_) return 1e30;
    if (kind_ == Kind::gaussian)
        return x * x / (2.0 * sigma_ * sigma_) +
               std::log(std::sqrt(2.0 * M_PI) * sigma_);
    if (x < xs_.front() || x > xs_.back()) return 1e30;
    std::size_t j = static_cast<std::size_t>(
        std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
    if (j == 0) j = 1;
    if (j >= xs_.size()) j = xs_.size() - 1;
    double t = (x - xs_[j - 1]) / (xs_[j] - xs_[j - 1]);
    return vs_[j - 1] * (1.0 - t) + vs_[j] * t;
}

double Potential::density(double x) const {
    double v = V(x);
    return v >= kVClamp ? 0.0 : std::exp(-v);
}

double Potential::cell_mass(double a, double b) const {
    if (b <= a) return 0.0;
    a = std::max(a, -support_);
    b = std::min(b, support_);
    if (b <= a) return 0.0;
    if (kind_ == Kind::gaussian)
        return std_normal_cdf(b / sigma_) - std_normal_cdf(a / sigma_);
    a = std::max(a, xs_.front());
    b = std::min(b, xs_.back());
    if (b <= a) return 0.0;
    std::size_t ja = static_cast<std::size_t>(
        std::upper_bound(xs_.begin(), xs_.end(), a) - xs_.begin());
    if (ja == 0) ja = 1;
    double total = 0.0;
    for (std::size_t j = ja; j < xs_.size(); ++j) {
        double xl = xs_[j - 1], xr = xs_[j];
        double lo = std::max(a, xl), hi = std::min(b, xr);
        if (hi > lo) {
            double s = (vs_[j] - vs_[j - 1]) / (xr - xl);
            total += segment_mass_part(vs_[j - 1], s, lo - xl, hi - xl);
        }
        if (xr >= b) break;
    }
    return total;
}

void Potential::moments(double& m0, double& m1, double& m2) const {
    if (kind_ == Kind::gaussian) {
        double r = support_ / sigma_;
        double core = 2.0 * std_normal_cdf(r) - 1.0;
        m0 = core;
        m1 = 0.0;
        m2 = sigma_ * sigma_ * (core - 2.0 * r * std_normal_pdf(r));
        return;
    }
    m0 = m1 = m2 = 0.0;
    for (std::size_t j = 1; j < xs_.size(); ++j)
        segment_moments(xs_[j - 1], vs_[j - 1], xs_[j], vs_[j], m0, m1, m2);
}

double Potential::sample(Rng& rng) const {
    if (kind_ == Kind::gaussian) {
        for (;;) {
            double x = sigma_ * rng.normal();
            if (std::abs(x) <= support_) return x;
        }
    }
    double target = rng.uniform() * cum_.back();
    std::size_t j = static_cast<std::size_t>(
        std::upper_bound(cum_.begin(), cum_.end(), target) - cum_.begin());
    if (j == 0) j = 1;
    if (j >= cum_.size()) j = cum_.size() - 1;
    double r = target - cum_[j - 1];
    double xl = xs_[j - 1], d = xs_[j] - xl;
    double va = vs_[j - 1];
    double s = (vs_[j] - va) / d;
    double ea = std::exp(-va);
    if (ea <= 0.0) return xl;
    double t;
    if (std::abs(s) * d < 1e-10) {
        t = r / ea;
    } else {
        double arg = -r * s / ea;
        if (arg <= -1.0) return xs_[j];
        t = -std::log1p(arg) / s;
    }
    return xl + std::min(std::max(t, 0.0), d);
}

std::uint64_t Potential::fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    unsigned char k = kind_ == Kind::gaussian ? 1 : 2;
    h = fnv1a(&k, 1, h);
    h = fnv1a(&sigma_, sizeof sigma_, h);
    h = fnv1a(&support_, sizeof support_, h);
    if (!xs_.empty()) {
        h = fnv1a(xs_.data(), xs_.size() * sizeof(double), h);
        h = fnv1a(vs_.data(), vs_.size() * sizeof(double), h);
    }
    return h;
}

Potential make_gaussian_potential(double sigma) {
    if (!(sigma > 0.0)) fail("make_gaussian_potential: sigma must be positive");
    Potential p;
    p.kind_ = Potential::Kind::gaussian;
    p.sigma_ = sigma;
    p.support_ = 8.0 * sigma;
    return p;
}

Potential make_tabulated_potential(std::vector<double> xs,
                                   std::vector<double> vs,
                                   double support_bound) {
    if (xs.size() != vs.size() || xs.size() < 2)
        fail("make_tabulated_potential: need >= 2 matching (x, V) nodes");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]))
            fail("make_tabulated_potential: non-finite x node");
        if (i > 0 && !(xs[i] > xs[i - 1]))
            fail("make_tabulated_potential: x nodes must be strictly increasing");
        if (std::isnan(vs[i]))
            fail("make_tabulated_potential: NaN potential value");
        if (vs[i] < -700.0)
            fail("make_tabulated_potential: V too negative, density overflows");
        if (vs[i] > kVClamp) vs[i] = kVClamp;  // includes +inf: density 0 there
    }

    Potential p;
    p.kind_ = Potential::Kind::tabulated;
    p.xs_ = std::move(xs);
    p.vs_ = std::move(vs);
    p.support_ = std::max(std::abs(p.xs_.front()), std::abs(p.xs_.back()));

    double m0, m1, m2;
    p.moments(m0, m1, m2);
    if (!(m0 > 1e-300) || !std::isfinite(m0))
        fail("make_tabulated_potential: density is not normalizable on its support");

    // renormalize so the total mass is 1, then recenter so the mean is 0
    double shift = std::log(m0);
    for (double& v : p.vs_) v += shift;
    double mean = m1 / m0;
    for (double& x : p.xs_) x -= mean;

    p.moments(m0, m1, m2);
    double var = m2 - m1 * m1;  // m0 == 1 now
    if (!(var > 1e-12))
        fail("make_tabulated_potential: second moment of the density is zero");
    p.sigma_ = std::sqrt(var);
    if (support_bound > 0.0)
        p.support_ = support_bound;
    else
        p.support_ = std::max(std::abs(p.xs_.front()), std::abs(p.xs_.back()));

    p.cum_.assign(p.xs_.size(), 0.0);
    for (std::size_t j = 1; j < p.xs_.size(); ++j) {
        double t0 = 0.0, t1 = 0.0, t2 = 0.0;
        segment_moments(p.xs_[j - 1], p.vs_[j - 1], p.xs_[j], p.vs_[j],
                        t0, t1, t2);
        p.cum_[j] = p.cum_[j - 1] + t0;
    }
    return p;
}

Potential potential_from_file(const std::string& path, double support_bound) {
    std::ifstream f(path);
    if (!f) fail("potential_from_file: cannot open " + path);
    std::vector<double> xs, vs;
    std::string line;
    while (std::getline(f, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        double x;
        std::string vtok;
        if (!(ss >> x >> vtok)) continue;
        double v;
        if (vtok == "inf" || vtok == "+inf" || vtok == "Inf") {
            v = kVClamp;
        } else {
            try {
                v = std::stod(vtok);
            } catch (...) {
                fail("potential_from_file: bad value '" + vtok + "' in " + path);
            }
        }
        xs.push_back(x);
        vs.push_back(v);
    }
    if (xs.size() < 2) fail("potential_from_file: fewer than 2 rows in " + path);
    return make_tabulated_potential(std::move(xs), std::move(vs), support_bound);
}

double hamiltonian_window(const Potential& pot, const std::vector<double>& phi) {
    if (phi.size() < 3) return 0.0;
    double h = 0.0;
    for (std::size_t n = 1; n + 1 < phi.size(); ++n)
        h += pot.V(phi[n + 1] + phi[n - 1] - 2.0 * phi[n]);
    return h;
}

}  // namespace lpw
