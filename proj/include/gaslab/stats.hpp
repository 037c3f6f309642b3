#ifndef GASLAB_STATS_HPP
#define GASLAB_STATS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gaslab {

// One scalar observable stream with streaming batch-means accumulation.
// Batch size is fixed up front (sqrt-of-planned-length rule) so chains with
// identical plans can pool batches deterministically.
class StreamStats {
public:
    StreamStats() = default;
    explicit StreamStats(std::int64_t batch_size);

    void add(double x);
    void merge(const StreamStats& other);  // pools moments, concatenates batches

    std::int64_t count() const { return n_; }
    std::int64_t batch_size() const { return batch_size_; }
    const std::vector<double>& batch_sums() const { return batch_sums_; }

    double mean() const;
    double variance() const;  // sample variance of the raw stream
    // batch-means standard error of the mean; falls back to the iid error
    // when fewer than two full batches exist, and never reports below it
    double se() const;
    double tau() const;          // integrated autocorrelation time, >= 0
    double n_effective() const;  // count / max(tau, 1)

private:
    std::int64_t batch_size_ = 1;
    std::int64_t n_ = 0;
    double sum_ = 0.0, sumsq_ = 0.0;
    double partial_ = 0.0;
    std::int64_t in_partial_ = 0;
    std::vector<double> batch_sums_;
};

// suggested number of full batches ~ sqrt(n): batch_size = n / floor(sqrt(n))
std::int64_t batch_size_for(std::int64_t planned_samples);

// weighted least squares fit of y = a + b x; returns (a, b, se_b)
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& var_y);

}  // namespace gaslab

#endif
