#include "gaslab/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace gaslab {

StreamStats::StreamStats(std::int64_t batch_size) : batch_size_(batch_size) {
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
}

void StreamStats::add(double x) {
    ++n_;
    sum_ += x;
    sumsq_ += x * x;
    partial_ += x;
    if (++in_partial_ == batch_size_) {
        batch_sums_.push_back(partial_);
        partial_ = 0.0;
        in_partial_ = 0;
    }
}

void StreamStats::merge(const StreamStats& other) {
    if (other.batch_size_ != batch_size_) throw std::invalid_argument("merging streams with different batch sizes");
    // other's trailing partial batch contributes to the moments but not to
    // the batch list
    n_ += other.n_;
    sum_ += other.sum_;
    sumsq_ += other.sumsq_;
    batch_sums_.insert(batch_sums_.end(), other.batch_sums_.begin(), other.batch_sums_.end());
}

double StreamStats::mean() const { return n_ > 0 ? sum_ / n_ : 0.0; }

double StreamStats::variance() const {
    if (n_ < 2) return 0.0;
    const double m = mean();
    const double v = (sumsq_ - n_ * m * m) / (n_ - 1.0);
    return v > 0.0 ? v : 0.0;
}

double StreamStats::se() const {
    if (n_ < 2) return 0.0;
    const double iid = std::sqrt(variance() / n_);
    const std::size_t k = batch_sums_.size();
    if (k < 2) return iid;
    const double m = mean();
    double acc = 0.0;
    for (double s : batch_sums_) {
        const double d = s / batch_size_ - m;
        acc += d * d;
    }
    const double bm = std::sqrt(acc / (k - 1.0) / k);
    return bm > iid ? bm : iid;
}

double StreamStats::tau() const {
    const double v = variance();
    if (v <= 0.0 || batch_sums_.size() < 2) return 1.0;
    const double m = mean();
    double acc = 0.0;
    for (double s : batch_sums_) {
        const double d = s / batch_size_ - m;
        acc += d * d;
    }
    const double bm_var = acc / (batch_sums_.size() - 1.0);
    const double t = batch_size_ * bm_var / v;
    return t > 1.0 ? t : 1.0;
}

double StreamStats::n_effective() const { return n_ / tau(); }

std::int64_t batch_size_for(std::int64_t planned_samples) {
    if (planned_samples < 4) return 1;
    const auto k = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(planned_samples))));
    return planned_samples / k;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& var_y) {
    if (x.size() != y.size() || x.size() != var_y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line needs matched inputs, >= 2 points");
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = var_y[i] > 0.0 ? 1.0 / var_y[i] : 1.0;
        sw += w;
        swx += w * x[i];
        swy += w * y[i];
        swxx += w * x[i] * x[i];
        swxy += w * x[i] * y[i];
    }
    const double det = sw * swxx - swx * swx;
    if (det <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = (sw * swxy - swx * swy) / det;
    f.intercept = (swxx * swy - swx * swxy) / det;
    f.slope_se = std::sqrt(sw / det);
    return f;
}

}  // namespace gaslab
