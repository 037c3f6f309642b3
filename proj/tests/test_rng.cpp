#include "doctest.h"

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "gaslab/rng.hpp"

using namespace gaslab;

namespace {

std::array<uint64_t, 4> block_at(std::array<uint64_t, 2> key, uint64_t ctr_low) {
    Philox4x64 p;
    p.key = key;
    p.ctr = {ctr_low, 0, 0, 0};
    return p.block();
}

}  // namespace

TEST_CASE("philox known-answer vectors, key (0,0)") {
    // numpy.random.Philox pre-increments its counter, so its k-th output
    // block equals our block at counter k.
    CHECK(block_at({0, 0}, 1) == std::array<uint64_t, 4>{213000021201967259ull,
                                                         4455796210202625458ull,
                                                         2055444239878205049ull,
                                                         10411612076246414556ull});
    CHECK(block_at({0, 0}, 2) == std::array<uint64_t, 4>{9267267987884836803ull,
                                                         5120919030223861725ull,
                                                         17460660323513034167ull,
                                                         18189711684604811196ull});
    CHECK(block_at({0, 0}, 3) == std::array<uint64_t, 4>{4682203132107789405ull,
                                                         3598048050090122770ull,
                                                         13128730522654199482ull,
                                                         2421405687460931810ull});
}

TEST_CASE("philox known-answer vectors, key (0xdeadbeef, 42)") {
    CHECK(block_at({0xdeadbeefull, 42}, 1) == std::array<uint64_t, 4>{13849946061811085509ull,
                                                                      15834686529217260750ull,
                                                                      17420012351413242566ull,
                                                                      14253794767262171042ull});
    CHECK(block_at({0xdeadbeefull, 42}, 2) == std::array<uint64_t, 4>{16145207693546437252ull,
                                                                      4926564512892387176ull,
                                                                      17828991234224389452ull,
                                                                      7238434347385709609ull});
    CHECK(block_at({0xdeadbeefull, 42}, 3) == std::array<uint64_t, 4>{5980955514179601593ull,
                                                                      14715221974422765181ull,
                                                                      927677288987476471ull,
                                                                      13814766094896999262ull});
}

TEST_CASE("rng streams are deterministic and replayable") {
    Rng a(12345, 7), b(12345, 7);
    for (int k = 0; k < 1000; ++k) CHECK(a.next_u64() == b.next_u64());

    Rng c(12345, 8);
    bool all_equal = true;
    Rng a2(12345, 7);
    for (int k = 0; k < 64; ++k) all_equal = all_equal && (a2.next_u64() == c.next_u64());
    CHECK(!all_equal);
}

TEST_CASE("derived child seeds are distinct and stable") {
    std::set<uint64_t> seen;
    for (uint64_t i = 0; i < 4096; ++i) seen.insert(Rng::derive(99, i));
    CHECK(seen.size() == 4096);
    CHECK(Rng::derive(99, 0) == Rng::derive(99, 0));
    CHECK(Rng::derive(99, 0) != Rng::derive(100, 0));
}

TEST_CASE("uniform01 range and equidistribution") {
    Rng r(2024);
    const int bins = 16;
    const int n = 1 << 18;
    std::vector<int> hist(bins, 0);
    for (int k = 0; k < n; ++k) {
        double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        hist[static_cast<size_t>(u * bins)]++;
    }
    double expected = static_cast<double>(n) / bins;
    double chi2 = 0.0;
    for (int h : hist) chi2 += (h - expected) * (h - expected) / expected;
    // df = 15; the 0.999 quantile is 37.7 and the seed is fixed
    CHECK(chi2 < 40.0);
}

TEST_CASE("uniform_index has no modulo bias across a coarse histogram") {
    Rng r(5150);
    const uint64_t m = 7;
    const int n = 1 << 18;
    std::vector<int> hist(m, 0);
    for (int k = 0; k < n; ++k) hist[r.uniform_index(m)]++;
    double expected = static_cast<double>(n) / static_cast<double>(m);
    double chi2 = 0.0;
    for (int h : hist) chi2 += (h - expected) * (h - expected) / expected;
    // df = 6; the 0.999 quantile is 22.5 and the seed is fixed
    CHECK(chi2 < 24.0);
}

TEST_CASE("normal deviates match gaussian moments") {
    Rng r(777);
    const int n = 1 << 20;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (int k = 0; k < n; ++k) {
        double x = r.normal();
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    double mean = s1 / n, var = s2 / n, kurt = s4 / n;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 6.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(kurt - 3.0) < 40.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("uniform_in_ball stays strictly inside and is centered") {
    Rng r(31337);
    const int d = 3, n = 200000;
    const double radius = 2.5;
    std::vector<double> mean(d, 0.0);
    double mean_r2 = 0.0;
    for (int k = 0; k < n; ++k) {
        auto x = r.uniform_in_ball(d, radius);
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
            mean[a] += x[a];
            r2 += x[a] * x[a];
        }
        CHECK(r2 < radius * radius);
        mean_r2 += r2;
    }
    for (int a = 0; a < d; ++a) CHECK(std::abs(mean[a] / n) < 0.02);
    // E|X|^2 = d/(d+2) r^2 for the uniform ball law
    double expect = d / (d + 2.0) * radius * radius;
    CHECK(mean_r2 / n == doctest::Approx(expect).epsilon(0.01));
}
