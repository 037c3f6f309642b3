#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gaslab/model.hpp"
#include "gaslab/rng.hpp"

using namespace gaslab;

namespace {

Configuration conf(std::vector<Point> ps) { return Configuration(std::move(ps)); }

// independent brute-force oracle: naive double loop in a permuted order
double brute_hamiltonian(const GasParams& p, const std::vector<Point>& ps) {
    double h = 0.0;
    int m = static_cast<int>(ps.size());
    for (int i = m - 1; i >= 0; --i) {
        for (int j = m - 1; j >= 0; --j) {
            if (i == j) continue;
            h += 0.5 * kernel_eval(p.kernel, {ps[i][0] - ps[j][0], ps[i][1] - ps[j][1],
                                              ps[i][2] - ps[j][2]});
        }
        h += p.potential.value(ps[i]);
    }
    return h;
}

}  // namespace

TEST_CASE("kernel point values") {
    CHECK(kernel_eval(KernelSpec::coulomb(3), {2.0, 0.0, 0.0}) == doctest::Approx(0.5));
    CHECK(kernel_eval(KernelSpec::coulomb(2), {1.0, 0.0}) == doctest::Approx(0.0));
    CHECK(kernel_eval(KernelSpec::riesz(1.5), {4.0, 0.0}) == doctest::Approx(0.125));
    CHECK_THROWS(kernel_eval(KernelSpec::coulomb(3), {0.0, 0.0, 0.0}));
    CHECK(kernel_from_r2(KernelSpec::coulomb(3), 0.0) == kInf);
}

TEST_CASE("hamiltonian closed values") {
    GasParams p = GasParams::make(3, 2, 1.0);
    p.potential = PotentialSpec::zero();
    CHECK(hamiltonian(p, conf({{0, 0, 0}, {1, 0, 0}})) == doctest::Approx(1.0));

    p.n_particles = 3;
    // equilateral triangle with unit sides embedded in d=3
    double h = std::sqrt(3.0) / 2.0;
    CHECK(hamiltonian(p, conf({{0, 0, 0}, {1, 0, 0}, {0.5, h, 0}})) == doctest::Approx(3.0));

    GasParams q = GasParams::make(2, 2, 1.0);
    q.potential = PotentialSpec::quadratic(0.25);
    double e = std::exp(1.0);
    CHECK(hamiltonian(q, conf({{0, 0}, {e, 0}})) ==
          doctest::Approx(-1.0 + e * e / 4.0).epsilon(1e-12));

    // transient coincidence through the unchecked hot path
    Configuration coincident = conf({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}});
    coincident.set(2, {1, 0, 0});
    CHECK(hamiltonian(p, coincident) == kInf);
}

TEST_CASE("conditional hamiltonian with frozen atoms") {
    GasParams p = GasParams::make(3, 1, 1.0);
    p.potential = PotentialSpec::zero();
    Configuration c = conf({{0, 0, 0}});
    CHECK(conditional_hamiltonian(p, c, FrozenExterior::empty()) == hamiltonian(p, c));

    FrozenExterior mu;
    mu.add({3, 0, 0}, 1.0);
    CHECK(conditional_hamiltonian(p, c, mu) == doctest::Approx(1.0 / 3.0));

    GasParams p2 = GasParams::make(3, 2, 1.0);
    p2.potential = PotentialSpec::zero();
    Configuration c2 = conf({{0, 0, 0}, {1, 0, 0}});
    FrozenExterior mu2;
    mu2.add({0, 3, 0}, 2.0);
    double expect = 1.0 + 2.0 * (1.0 / 3.0 + 1.0 / std::sqrt(10.0));
    CHECK(conditional_hamiltonian(p2, c2, mu2) == doctest::Approx(expect).epsilon(1e-12));

    // particle on an atom
    FrozenExterior mu3;
    mu3.add({0, 0, 0}, 1.0);
    CHECK(conditional_hamiltonian(p, c, mu3) == kInf);
}

TEST_CASE("energy_delta_move closed values") {
    GasParams p = GasParams::make(3, 2, 1.0);
    p.potential = PotentialSpec::zero();
    Configuration c = conf({{0, 0, 0}, {1, 0, 0}});
    CHECK(energy_delta_move(p, c, FrozenExterior::empty(), 1, {1, 0, 0}) == doctest::Approx(0.0));
    CHECK(energy_delta_move(p, c, FrozenExterior::empty(), 1, {2, 0, 0}) == doctest::Approx(-0.5));
    CHECK(energy_delta_move(p, c, FrozenExterior::empty(), 1, {0, 0, 0}) == kInf);
}

TEST_CASE("incremental deltas track full recomputation over long move sequences") {
    GasParams p = GasParams::make(3, 8, 1.0);
    Rng rng(91);
    std::vector<Point> ps;
    for (int i = 0; i < p.n_particles; ++i) ps.push_back(rng.uniform_in_ball(3, 3.0));
    Configuration c = conf(ps);
    FrozenExterior mu;
    for (int a = 0; a < 5; ++a) mu.add(rng.uniform_in_ball(3, 6.0), rng.uniform(0.0, 2.0));

    double energy = conditional_hamiltonian(p, c, mu);
    for (int t = 0; t < 10000; ++t) {
        int i = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(p.n_particles)));
        Point np = rng.uniform_in_ball(3, 4.0);
        double before = conditional_hamiltonian(p, c, mu);
        double delta = energy_delta_move(p, c, mu, i, np);
        Point old = c.at(i);
        c.set(i, np);
        double after = conditional_hamiltonian(p, c, mu);
        CHECK(std::abs((after - before) - delta) <= 1e-9 * std::max(1.0, std::abs(delta)));
        energy += delta;
        if (t % 2 == 1) c.set(i, old);  // revisit old states too
    }
}

TEST_CASE("exchangeability under random permutations") {
    GasParams p = GasParams::make(3, 6, 1.0);
    Rng rng(92);
    std::vector<Point> ps;
    for (int i = 0; i < p.n_particles; ++i) ps.push_back(rng.uniform_in_ball(3, 2.0));
    double h0 = hamiltonian(p, conf(ps));
    for (int t = 0; t < 50; ++t) {
        std::vector<Point> q = ps;
        for (size_t k = q.size(); k > 1; --k)
            std::swap(q[k - 1], q[rng.uniform_index(k)]);
        double h1 = hamiltonian(p, conf(q));
        CHECK(std::abs(h1 - h0) <= 1e-12 * std::abs(h0));
    }
}

TEST_CASE("hamiltonian matches an independent brute-force summation") {
    GasParams p = GasParams::make(3, 10, 1.0);
    Rng rng(93);
    for (int t = 0; t < 20; ++t) {
        std::vector<Point> ps;
        for (int i = 0; i < p.n_particles; ++i) ps.push_back(rng.uniform_in_ball(3, 2.5));
        CHECK(hamiltonian(p, conf(ps)) ==
              doctest::Approx(brute_hamiltonian(p, ps)).epsilon(1e-11));
    }
}

TEST_CASE("nonnegativity for coulomb d>=3 with nonnegative potential and exterior") {
    GasParams p = GasParams::make(3, 6, 1.0);
    Rng rng(94);
    for (int t = 0; t < 100; ++t) {
        std::vector<Point> ps;
        for (int i = 0; i < p.n_particles; ++i) ps.push_back(rng.uniform_in_ball(3, 5.0));
        FrozenExterior mu;
        mu.add(rng.uniform_in_ball(3, 5.0), rng.uniform(0.0, 3.0));
        CHECK(conditional_hamiltonian(p, conf(ps), mu) >= 0.0);
    }
}

TEST_CASE("translation covariance with exterior translated alongside") {
    GasParams p = GasParams::make(3, 5, 1.0);
    p.potential = PotentialSpec::zero();
    Rng rng(95);
    std::vector<Point> ps;
    for (int i = 0; i < p.n_particles; ++i) ps.push_back(rng.uniform_in_ball(3, 2.0));
    FrozenExterior mu;
    mu.add({3, 1, 0}, 1.5);
    mu.add({0, -4, 2}, 0.5);
    double h0 = conditional_hamiltonian(p, conf(ps), mu);
    Point shift = {10.0, -7.0, 3.0};
    std::vector<Point> qs = ps;
    for (auto& q : qs)
        for (int a = 0; a < 3; ++a) q[a] += shift[a];
    FrozenExterior mu2;
    for (const auto& atom : mu.atoms) {
        Point x = atom.x;
        for (int a = 0; a < 3; ++a) x[a] += shift[a];
        mu2.add(x, atom.weight);
    }
    double h1 = conditional_hamiltonian(p, conf(qs), mu2);
    CHECK(std::abs(h1 - h0) <= 1e-12 * std::abs(h0));
}

TEST_CASE("configuration construction rejects malformed inputs") {
    CHECK_THROWS(conf({{0, 0, 0}, {0, 0, 0}}));
    CHECK_THROWS(conf({{0, 0, 0}, {1, 0}}));
    CHECK_THROWS(conf({{0.0, 0.0, std::nan("")}}));
}

TEST_CASE("gas params admissibility") {
    GasParams p = GasParams::make(3, 10, 1.0);
    CHECK_NOTHROW(p.validate());
    p.beta = 0.0;
    CHECK_THROWS(p.validate());  // delta <= beta fails
    p.beta = 1.0;
    p.delta = 0.0;
    CHECK_THROWS(p.validate());
    p = GasParams::make(3, 10, 1.0);
    p.potential = PotentialSpec::quadratic(10.0);  // Laplacian 60 > 1/delta
    CHECK_THROWS(p.validate());
}

TEST_CASE("interaction_at sums pair, potential, and atom terms") {
    GasParams p = GasParams::make(3, 3, 1.0);
    p.potential = PotentialSpec::quadratic(0.5);
    Configuration c = conf({{0, 0, 0}, {2, 0, 0}, {0, 4, 0}});
    FrozenExterior mu;
    mu.add({0, 0, 3}, 2.0);
    Point x = {1.0, 0.0, 0.0};
    // against particles 1, 2 (skip 0), plus W(x), plus the atom
    double expect = 1.0 / 1.0 + 1.0 / std::sqrt(17.0) + 0.5 + 2.0 / std::sqrt(10.0);
    CHECK(interaction_at(p, c, mu, x, 0) == doctest::Approx(expect).epsilon(1e-12));
    double expect2 = 1.0 / std::sqrt(17.0) + 0.5 + 2.0 / std::sqrt(10.0);
    CHECK(interaction_at(p, c, mu, x, 0, 1) == doctest::Approx(expect2).epsilon(1e-12));
}
