#include "gaslab/transport.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace gaslab {

BallAverageOracle BallAverageOracle::closed_form(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("ball average radius must be positive");
    BallAverageOracle o;
    o.method = Method::ClosedForm;
    o.radius = radius;
    return o;
}

BallAverageOracle BallAverageOracle::quadrature(double radius, int node_count) {
    if (!(radius > 0.0)) throw std::invalid_argument("ball average radius must be positive");
    if (node_count < 2) throw std::invalid_argument("quadrature needs at least 2 nodes");
    BallAverageOracle o;
    o.method = Method::Quadrature;
    o.radius = radius;
    o.node_count = node_count;
    return o;
}

namespace {

struct GlTable {
    std::vector<double> x;  // nodes on (-1, 1)
    std::vector<double> w;
};

// Gauss-Legendre nodes by Newton iteration on P_n; cached per node count
const GlTable& gl_table(int n) {
    static std::mutex mtx;
    static std::map<int, GlTable> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GlTable t;
    t.x.resize(n);
    t.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                // one polishing pass after convergence
                double q0 = 1.0, q1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double q2 = ((2.0 * k - 1.0) * x * q1 - (k - 1.0) * q0) / k;
                    q0 = q1;
                    q1 = q2;
                }
                dp = n * (x * q1 - q0) / (x * x - 1.0);
                break;
            }
        }
        t.x[static_cast<size_t>(i)] = -x;
        t.x[static_cast<size_t>(n - 1 - i)] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        t.w[static_cast<size_t>(i)] = w;
        t.w[static_cast<size_t>(n - 1 - i)] = w;
    }
    return cache.emplace(n, std::move(t)).first->second;
}

// integrate f over [a, b] with an n-node Gauss-Legendre rule
template <class F>
double gl_integrate(F&& f, double a, double b, int n) {
    if (!(b > a)) return 0.0;
    const GlTable& t = gl_table(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += t.w[static_cast<size_t>(i)] * f(mid + half * t.x[static_cast<size_t>(i)]);
    return acc * half;
}

double closed_form_coulomb_nd(int d, double r, double t) {
    if (t >= r) return std::pow(t, 2.0 - d);
    return (d * r * r - (d - 2.0) * t * t) / (2.0 * std::pow(r, static_cast<double>(d)));
}

// 2d log-kernel ball average, used as an internal quadrature cross-check
double closed_form_coulomb_2d(double r, double t) {
    if (t >= r) return -std::log(t);
    return -std::log(r) + 0.5 - t * t / (2.0 * r * r);
}

}  // namespace

double shell_average_kernel(const KernelSpec& k, int d, double rho, double t, int node_count) {
    if (rho < 0.0 || t < 0.0) throw std::invalid_argument("shell average needs rho, t >= 0");
    switch (k.variant) {
        case KernelSpec::Variant::Coulomb2D:
        case KernelSpec::Variant::CoulombND: {
            // Newton: the spherical mean of a harmonic-off-0 kernel sees
            // only the larger of the two radii
            const double u = std::max(rho, t);
            if (u <= 0.0) return kInf;
            return k.variant == KernelSpec::Variant::Coulomb2D ? -std::log(u) : std::pow(u, -k.exponent);
        }
        case KernelSpec::Variant::Riesz: {
            if (rho == 0.0 || t == 0.0) {
                const double u = std::max(rho, t);
                return u > 0.0 ? std::pow(u, -k.exponent) : kInf;
            }
            // angular mean with weight sin^{d-2}(phi); self-normalizing so
            // the weight's own quadrature error cancels
            double num = 0.0, den = 0.0;
            const GlTable& tab = gl_table(node_count);
            for (int i = 0; i < node_count; ++i) {
                const double phi = 0.5 * kPi * (1.0 + tab.x[static_cast<size_t>(i)]);
                const double wt = tab.w[static_cast<size_t>(i)] * std::pow(std::sin(phi), d - 2.0);
                const double u2 = t * t + rho * rho - 2.0 * t * rho * std::cos(phi);
                num += wt * std::pow(u2, -0.5 * k.exponent);
                den += wt;
            }
            return num / den;
        }
    }
    return kInf;
}

double ball_average_kernel(const BallAverageOracle& o, const KernelSpec& k, int d, double dist) {
    if (dist < 0.0) throw std::invalid_argument("ball average needs dist >= 0");
    const double r = o.radius;
    if (o.method == BallAverageOracle::Method::ClosedForm) {
        if (k.variant != KernelSpec::Variant::CoulombND)
            throw std::invalid_argument("closed-form ball average applies to the d >= 3 coulomb kernel only");
        return closed_form_coulomb_nd(d, r, dist);
    }
    // radial integral of shell means, d r^{-d} int_0^r rho^{d-1} S(rho) drho,
    // split at rho = dist so the shell-mean kink sits on an interval edge
    const int n = o.node_count;
    auto integrand = [&](double rho) {
        return std::pow(rho, d - 1.0) * shell_average_kernel(k, d, rho, dist, n);
    };
    double acc;
    if (dist > 0.0 && dist < r)
        acc = gl_integrate(integrand, 0.0, dist, n) + gl_integrate(integrand, dist, r, n);
    else
        acc = gl_integrate(integrand, 0.0, r, n);
    return acc * d / std::pow(r, static_cast<double>(d));
}

double ball_average_potential(const PotentialSpec& w, int d, double r, const Point& y) {
    if (w.variant == PotentialSpec::Variant::Zero) return 0.0;
    // E|y + U|^2 = |y|^2 + E|U|^2, E|U|^2 = d r^2 / (d + 2) for U ~ unif(B_r)
    return w.a * (norm2(y) + d * r * r / (d + 2.0));
}

double w_gap(const PotentialSpec& w, int d, double r) {
    if (w.variant == PotentialSpec::Variant::Zero) return 0.0;
    return w.a * d * r * r / (d + 2.0);
}

double c_bound(const GasParams& p, const BallAverageOracle& o) {
    BallAverageOracle unit = o;
    unit.radius = 1.0;
    return ball_average_kernel(unit, p.kernel, p.d, 0.0) + w_gap(p.potential, p.d, 1.0);
}

namespace {

// energy of c with particle i deleted: all pair, potential, and exterior
// terms not involving y_i
double energy_without(const GasParams& p, const Configuration& c, const FrozenExterior& mu, int i) {
    KahanSum acc;
    const int m = c.size();
    for (int a = 0; a < m; ++a) {
        if (a == i) continue;
        for (int b = a + 1; b < m; ++b) {
            if (b == i) continue;
            const double r2 = dist2(c.at(a), c.at(b));
            if (r2 <= 0.0) return kInf;
            acc.add(kernel_from_r2(p.kernel, r2));
        }
        acc.add(p.potential.value(c.at(a)));
        for (const FrozenExterior::Atom& atom : mu.atoms) {
            const double r2 = dist2(atom.x, c.at(a));
            if (r2 <= 0.0) return kInf;
            acc.add(atom.weight * kernel_from_r2(p.kernel, r2));
        }
    }
    return acc.value();
}

}  // namespace

double mim_energy(const GasParams& p, const Configuration& c, const FrozenExterior& mu,
                  int i, int j, const BallAverageOracle& o) {
    const int m = c.size();
    if (i == j || i < 0 || j < 0 || i >= m || j >= m) throw std::out_of_range("mim_energy: bad index pair");
    BallAverageOracle unit = o;
    unit.radius = 1.0;

    // terms never touching y_i pass through the expectation unchanged
    const double rest = energy_without(p, c, mu, i);
    if (rest == kInf) return kInf;

    // replacement terms: pair with y_j collapses to the center average,
    // every other interaction becomes a ball average around y_j
    KahanSum repl;
    repl.add(ball_average_kernel(unit, p.kernel, p.d, 0.0));
    for (int k = 0; k < m; ++k) {
        if (k == i || k == j) continue;
        repl.add(ball_average_kernel(unit, p.kernel, p.d, std::sqrt(dist2(c.at(j), c.at(k)))));
    }
    repl.add(ball_average_potential(p.potential, p.d, 1.0, c.at(j)));
    for (const FrozenExterior::Atom& atom : mu.atoms)
        repl.add(atom.weight * ball_average_kernel(unit, p.kernel, p.d, std::sqrt(dist2(atom.x, c.at(j)))));
    return rest + repl.value();
}

MimResult favorability(const GasParams& p, const Configuration& c, const FrozenExterior& mu,
                       int i, int j, const BallAverageOracle& o) {
    MimResult r;
    r.mim_ij = mim_energy(p, c, mu, i, j, o);
    r.mim_ji = mim_energy(p, c, mu, j, i, o);
    r.favorable = r.mim_ij <= r.mim_ji ? MimDirection::i_to_j : MimDirection::j_to_i;
    const double h = conditional_hamiltonian(p, c, mu);
    r.slack = h + c_bound(p, o) - std::min(r.mim_ij, r.mim_ji);
    return r;
}

Configuration mim_move(const GasParams& p, const Configuration& c, int i, int j, Rng& rng) {
    const int m = c.size();
    if (i == j || i < 0 || j < 0 || i >= m || j >= m) throw std::out_of_range("mim_move: bad index pair");
    const Point u = rng.uniform_in_ball(p.d, 1.0);
    Point dest = c.at(j);
    for (int k = 0; k < p.d; ++k) dest[static_cast<size_t>(k)] += u[static_cast<size_t>(k)];
    Configuration out = c;
    out.set(i, std::move(dest));
    return out;
}

double iso_pair_average(const BallAverageOracle& o, const KernelSpec& k, int d, double dist) {
    if (dist < 0.0) throw std::invalid_argument("iso pair average needs dist >= 0");
    const double r = o.radius;
    const bool coulomb = k.variant != KernelSpec::Variant::Riesz;
    if (coulomb && dist >= 2.0 * r) {
        // both averages collapse by the mean-value property
        return k.variant == KernelSpec::Variant::Coulomb2D ? -std::log(dist) : std::pow(dist, -k.exponent);
    }
    // outer average over V uniform in B_r of the radial function
    // u -> <g>_{B_r}(u); inner averages via the oracle's own method
    const int n = o.node_count;
    auto inner = [&](double u) { return ball_average_kernel(o, k, d, u); };
    double num = 0.0, den = 0.0;
    const GlTable& tab = gl_table(n);
    for (int ia = 0; ia < n; ++ia) {
        const double phi = 0.5 * kPi * (1.0 + tab.x[static_cast<size_t>(ia)]);
        const double aw = tab.w[static_cast<size_t>(ia)] * std::pow(std::sin(phi), d - 2.0);
        const double c = std::cos(phi);
        auto radial = [&](double rho) {
            const double u2 = dist * dist + rho * rho - 2.0 * dist * rho * c;
            return std::pow(rho, d - 1.0) * inner(std::sqrt(std::max(u2, 0.0)));
        };
        num += aw * gl_integrate(radial, 0.0, r, n);
        den += aw * std::pow(r, static_cast<double>(d)) / d;
    }
    return num / den;
}

std::pair<double, double> iso_energy_bound_check(const GasParams& p, const Configuration& c,
                                                 const FrozenExterior& mu, double r,
                                                 const BallAverageOracle& o) {
    if (!(r > 0.0)) throw std::invalid_argument("iso radius must be positive");
    BallAverageOracle at_r = o;
    at_r.radius = r;
    const int m = c.size();
    KahanSum lhs;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j)
            lhs.add(iso_pair_average(at_r, p.kernel, p.d, std::sqrt(dist2(c.at(i), c.at(j)))));
        lhs.add(ball_average_potential(p.potential, p.d, r, c.at(i)));
        for (const FrozenExterior::Atom& atom : mu.atoms)
            lhs.add(atom.weight *
                    ball_average_kernel(at_r, p.kernel, p.d, std::sqrt(dist2(atom.x, c.at(i)))));
    }
    const double rhs = conditional_hamiltonian(p, c, mu) + m * w_gap(p.potential, p.d, r);
    return {lhs.value(), rhs};
}

}  // namespace gaslab
