#include "gaslab/model.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

namespace gaslab {

KernelSpec KernelSpec::coulomb(int d) {
    if (d < 2) throw ParseError("kernel: coulomb requires d >= 2");
    KernelSpec k;
    k.variant = d == 2 ? Variant::Coulomb2D : Variant::CoulombND;
    k.exponent = d - 2.0;
    return k;
}

KernelSpec KernelSpec::riesz(double s) {
    if (!(s > 0.0)) throw ParseError("kernel: riesz exponent must be positive");
    KernelSpec k;
    k.variant = Variant::Riesz;
    k.exponent = s;
    return k;
}

std::string KernelSpec::to_text() const {
    if (variant == Variant::Riesz) return "riesz(" + fmt17(exponent) + ")";
    return "coulomb";
}

KernelSpec KernelSpec::parse(const std::string& text, int d) {
    if (text == "coulomb") return coulomb(d);
    if (text.rfind("riesz(", 0) == 0 && text.back() == ')') {
        const std::string inner = text.substr(6, text.size() - 7);
        char* end = nullptr;
        const double s = std::strtod(inner.c_str(), &end);
        if (end == inner.c_str() || *end != '\0') throw ParseError("kernel: bad riesz exponent '" + inner + "'");
        return riesz(s);
    }
    throw ParseError("kernel: expected 'coulomb' or 'riesz(s)', got '" + text + "'");
}

PotentialSpec PotentialSpec::zero() { return {}; }

PotentialSpec PotentialSpec::quadratic(double a) {
    PotentialSpec w;
    w.variant = Variant::Quadratic;
    w.a = a;
    return w;
}

double PotentialSpec::value(const Point& x) const {
    if (variant == Variant::Zero) return 0.0;
    return a * norm2(x);
}

double PotentialSpec::laplacian(int d) const {
    if (variant == Variant::Zero) return 0.0;
    return 2.0 * a * d;
}

std::string PotentialSpec::to_text() const {
    if (variant == Variant::Zero) return "zero";
    return "quadratic(" + fmt17(a) + ")";
}

PotentialSpec PotentialSpec::parse(const std::string& text) {
    if (text == "zero") return zero();
    if (text.rfind("quadratic(", 0) == 0 && text.back() == ')') {
        const std::string inner = text.substr(10, text.size() - 11);
        char* end = nullptr;
        const double a = std::strtod(inner.c_str(), &end);
        if (end == inner.c_str() || *end != '\0') throw ParseError("potential: bad coefficient '" + inner + "'");
        return quadratic(a);
    }
    throw ParseError("potential: expected 'zero' or 'quadratic(a)', got '" + text + "'");
}

GasParams GasParams::make(int d, int n_particles, double beta) {
    GasParams p;
    p.d = d;
    p.n_particles = n_particles;
    p.beta = beta;
    p.kernel = KernelSpec::coulomb(d);
    p.potential = PotentialSpec::quadratic(1.0 / (2.0 * d));
    p.delta = 0.5;
    p.validate();
    return p;
}

void GasParams::validate() const {
    if (d < 2) throw ParseError("params: dimension must be >= 2");
    if (n_particles < 1) throw ParseError("params: need at least one particle");
    if (!(delta > 0.0) || delta > 1.0) throw ParseError("params: delta must lie in (0, 1]");
    if (!(beta >= delta) || !(beta <= 1.0 / delta))
        throw ParseError("params: beta = " + fmt17(beta) + " outside [delta, 1/delta]");
    if (kernel.variant == KernelSpec::Variant::Coulomb2D && d != 2)
        throw ParseError("params: 2d coulomb kernel with d != 2");
    if (kernel.variant == KernelSpec::Variant::CoulombND && d < 3)
        throw ParseError("params: d >= 3 coulomb kernel with d = " + std::to_string(d));
    if (kernel.variant == KernelSpec::Variant::CoulombND && kernel.exponent != d - 2.0)
        throw ParseError("params: coulomb kernel exponent disagrees with d");
    if (kernel.variant == KernelSpec::Variant::Riesz && !(kernel.exponent < d))
        throw ParseError("params: riesz exponent must satisfy s < d");
    if (potential.variant == PotentialSpec::Variant::Quadratic && potential.a < 0.0)
        throw ParseError("params: quadratic potential must be convex (a >= 0)");
    if (potential.laplacian(d) > 1.0 / delta)
        throw ParseError("params: potential laplacian exceeds 1/delta");
}

Configuration::Configuration(std::vector<Point> positions) : positions_(std::move(positions)) {
    if (positions_.empty()) return;
    const size_t d = positions_[0].size();
    if (d == 0) throw ParseError("configuration: zero-dimensional point");
    for (const Point& p : positions_) {
        if (p.size() != d) throw ParseError("configuration: mixed dimensions");
        for (double v : p)
            if (!std::isfinite(v)) throw ParseError("configuration: non-finite coordinate");
    }
    const size_t m = positions_.size();
    for (size_t i = 0; i < m; ++i)
        for (size_t j = i + 1; j < m; ++j)
            if (dist2(positions_[i], positions_[j]) <= 0.0)
                throw ParseError("configuration: coincident positions " + std::to_string(i) + ", " + std::to_string(j));
}

void FrozenExterior::add(Point x, double weight) {
    atoms.push_back({std::move(x), weight});
}

double FrozenExterior::total_mass() const {
    double m = 0.0;
    for (const Atom& a : atoms) m += a.weight;
    return m;
}

void FrozenExterior::validate() const {
    for (const Atom& a : atoms) {
        if (!(a.weight >= 0.0)) throw ParseError("exterior: negative atom weight");
        if (!support.contains(a.x)) throw ParseError("exterior: atom outside support region");
    }
}

double kernel_from_r2(const KernelSpec& k, double r2) {
    if (r2 <= 0.0) return kInf;
    if (k.variant == KernelSpec::Variant::Coulomb2D) return -0.5 * std::log(r2);
    if (k.exponent == 1.0) return 1.0 / std::sqrt(r2);  // d = 3 coulomb, the common case
    return std::pow(r2, -0.5 * k.exponent);
}

double kernel_eval(const KernelSpec& k, const Point& x) {
    const double r2 = norm2(x);
    if (r2 <= 0.0) throw std::domain_error("kernel singularity at x = 0");
    return kernel_from_r2(k, r2);
}

namespace {

// pairwise + external sum touching particle i only, skipping index j too if
// requested; +inf propagates from any coincidence
double one_body_terms(const GasParams& p, const Configuration& c, const FrozenExterior& mu,
                      const Point& x, int skip_a, int skip_b) {
    double acc = 0.0;
    const int m = c.size();
    for (int k = 0; k < m; ++k) {
        if (k == skip_a || k == skip_b) continue;
        const double r2 = dist2(x, c.at(k));
        if (r2 <= 0.0) return kInf;
        acc += kernel_from_r2(p.kernel, r2);
    }
    acc += p.potential.value(x);
    for (const FrozenExterior::Atom& a : mu.atoms) {
        const double r2 = dist2(x, a.x);
        if (r2 <= 0.0) return kInf;
        acc += a.weight * kernel_from_r2(p.kernel, r2);
    }
    return acc;
}

}  // namespace

double interaction_at(const GasParams& p, const Configuration& c, const FrozenExterior& mu,
                      const Point& x, int skip_a, int skip_b) {
    return one_body_terms(p, c, mu, x, skip_a, skip_b);
}

double hamiltonian(const GasParams& p, const Configuration& c) {
    KahanSum pair_sum, pot_sum;
    const int m = c.size();
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const double r2 = dist2(c.at(i), c.at(j));
            if (r2 <= 0.0) return kInf;
            pair_sum.add(kernel_from_r2(p.kernel, r2));
        }
        pot_sum.add(p.potential.value(c.at(i)));
    }
    return pair_sum.value() + pot_sum.value();
}

double conditional_hamiltonian(const GasParams& p, const Configuration& c, const FrozenExterior& mu) {
    const double base = hamiltonian(p, c);
    if (base == kInf) return kInf;
    KahanSum ext;
    for (const FrozenExterior::Atom& a : mu.atoms) {
        for (int i = 0; i < c.size(); ++i) {
            const double r2 = dist2(a.x, c.at(i));
            if (r2 <= 0.0) return kInf;
            ext.add(a.weight * kernel_from_r2(p.kernel, r2));
        }
    }
    return base + ext.value();
}

double energy_delta_move(const GasParams& p, const Configuration& c, const FrozenExterior& mu,
                         int i, const Point& new_pos) {
    if (i < 0 || i >= c.size()) throw std::out_of_range("energy_delta_move: particle index");
    const double fresh = one_body_terms(p, c, mu, new_pos, i, -1);
    if (fresh == kInf) return kInf;
    const double stale = one_body_terms(p, c, mu, c.at(i), i, -1);
    return fresh - stale;
}

}  // namespace gaslab
