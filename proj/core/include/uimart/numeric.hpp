#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace uimart {

inline constexpr double kEulerGamma = 0.57721566490153286060651209;

/// Compensated (Neumaier) summation. Fold order is fixed by the caller, so
/// results depend only on the sequence of addends.
class NeumaierSum {
  public:
    void add(double x) noexcept {
        double const t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
    NeumaierSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

/// Sample mean and standard error of the mean (unbiased variance).
struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_and_se(std::span<const double> xs) noexcept {
    MeanSe out;
    if (xs.empty()) return out;
    double const n = static_cast<double>(xs.size());
    out.mean = compensated_sum(xs) / n;
    if (xs.size() < 2) return out;
    NeumaierSum ss;
    for (double x : xs) {
        double const d = x - out.mean;
        ss.add(d * d);
    }
    out.se = std::sqrt(ss.value() / (n - 1.0) / n);
    return out;
}

inline double standard_normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

}  // namespace uimart
