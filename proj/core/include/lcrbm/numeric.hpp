#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace lcrbm {

/// Logistic function, split at 0 so exp never overflows.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// log(1 + e^x) without overflow for large |x|.
inline double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

/// Turns logits into probabilities in place, max-subtracted.
inline void softmax_inplace(std::span<double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

inline double log_sum_exp(std::span<const double> logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    if (!std::isfinite(m)) return m;
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    return m + std::log(sum);
}

/// Streaming log-sum-exp accumulator for enumeration-sized sums.
class LogSumExp {
public:
    void add(double logit) {
        if (logit == -std::numeric_limits<double>::infinity()) return;
        if (logit <= max_) {
            sum_ += std::exp(logit - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - logit) + 1.0;
            max_ = logit;
        }
    }
    double value() const { return max_ + std::log(sum_); }
    bool empty() const { return sum_ == 0.0; }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

} // namespace lcrbm
