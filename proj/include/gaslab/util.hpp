#ifndef GASLAB_UTIL_HPP
#define GASLAB_UTIL_HPP

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaslab {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846264338327950288;

using Point = std::vector<double>;

inline double dist2(const Point& a, const Point& b) {
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

inline double norm2(const Point& a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return s;
}

// Kahan compensated accumulator, used on oracle/reference summation paths.
struct KahanSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// fixed 17-significant-digit decimal rendering used in every output file
inline std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// volume of the d-ball: pi^{d/2} / Gamma(d/2 + 1) * r^d
inline double ball_volume(int d, double radius) {
    double logv = 0.5 * d * std::log(kPi) - std::lgamma(0.5 * d + 1.0) + d * std::log(radius);
    return std::exp(logv);
}

// exact binomial coefficient for the de-indexing identities (M <= 62 fits u64)
inline double binomial(int m, int n) {
    if (n < 0 || n > m) return 0.0;
    if (n > m - n) n = m - n;
    double r = 1.0;
    for (int k = 1; k <= n; ++k) r = r * static_cast<double>(m - n + k) / static_cast<double>(k);
    return r;
}

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gaslab

#endif
