#ifndef GASLAB_RNG_HPP
#define GASLAB_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace gaslab {

// Philox 4x64 with 10 rounds. Counter-based: the stream is a pure function
// of (key, counter), so chains can be given independent streams by key and
// replayed exactly from a seed.
struct Philox4x64 {
    static constexpr uint64_t M0 = 0xD2E7470EE14C6C93ull;
    static constexpr uint64_t M1 = 0xCA5A826395121157ull;
    static constexpr uint64_t W0 = 0x9E3779B97F4A7C15ull;
    static constexpr uint64_t W1 = 0xBB67AE8584CAA73Bull;

    std::array<uint64_t, 2> key{0, 0};
    std::array<uint64_t, 4> ctr{0, 0, 0, 0};

    static void mulhilo(uint64_t a, uint64_t b, uint64_t& hi, uint64_t& lo) {
        unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
        hi = static_cast<uint64_t>(p >> 64);
        lo = static_cast<uint64_t>(p);
    }

    static std::array<uint64_t, 4> round(std::array<uint64_t, 4> c, std::array<uint64_t, 2> k) {
        uint64_t hi0, lo0, hi1, lo1;
        mulhilo(M0, c[0], hi0, lo0);
        mulhilo(M1, c[2], hi1, lo1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }

    std::array<uint64_t, 4> block() const {
        auto c = ctr;
        auto k = key;
        for (int r = 0; r < 9; ++r) {
            c = round(c, k);
            k[0] += W0;
            k[1] += W1;
        }
        return round(c, k);
    }

    void advance() {
        if (++ctr[0] != 0) return;
        if (++ctr[1] != 0) return;
        if (++ctr[2] != 0) return;
        ++ctr[3];
    }
};

// Seedable stream of doubles and integers on top of Philox. One instance per
// chain; (seed, stream) selects the key so streams never collide.
class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0) {
        eng_.key = {seed, stream};
    }

    uint64_t next_u64() {
        if (pos_ == 4) {
            buf_ = eng_.block();
            eng_.advance();
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // uniform integer in [0, n)
    uint64_t uniform_index(uint64_t n) {
        // rejection to kill modulo bias
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t x = next_u64();
            if (x >= threshold) return x % n;
        }
    }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        // Box-Muller on (0,1] uniforms
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = uniform01();
        double rad = std::sqrt(-2.0 * std::log(u1));
        double ang = 6.283185307179586476925286766559 * u2;
        cached_ = rad * std::sin(ang);
        have_cached_ = true;
        return rad * std::cos(ang);
    }

    // uniform point in the d-ball of given radius, by rejection from the cube
    std::vector<double> uniform_in_ball(int d, double radius) {
        std::vector<double> x(static_cast<size_t>(d));
        for (;;) {
            double r2 = 0.0;
            for (auto& xi : x) {
                xi = uniform(-1.0, 1.0);
                r2 += xi * xi;
            }
            if (r2 < 1.0) break;
        }
        for (auto& xi : x) xi *= radius;
        return x;
    }

    // derive a child seed; used for per-chain seeds from a master seed
    static uint64_t derive(uint64_t master, uint64_t index) {
        Philox4x64 p;
        p.key = {master, 0x67617320636861ull};  // fixed domain separator
        p.ctr = {index, 0, 0, 0};
        return p.block()[0];
    }

private:
    Philox4x64 eng_;
    std::array<uint64_t, 4> buf_{};
    int pos_ = 4;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace gaslab

#endif
