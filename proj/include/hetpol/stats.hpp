#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace hetpol {

/// Compensated summation (Neumaier's variant of Kahan).
class NeumaierSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Streaming log(sum_i exp(x_i)) with a running maximum.
class LogSumExp {
public:
    void add(double x) noexcept {
        if (x == -INFINITY) return;
        if (x <= max_) {
            acc_ += std::exp(x - max_);
        } else {
            acc_ = acc_ * std::exp(max_ - x) + 1.0;
            max_ = x;
        }
    }
    double value() const noexcept { return max_ == -INFINITY ? -INFINITY : max_ + std::log(acc_); }

private:
    double max_ = -INFINITY;
    double acc_ = 0.0;
};

struct SampleSummary {
    double mean = 0.0;
    double std_err = 0.0;  ///< standard error of the mean (0 for a single value)
    double stddev = 0.0;
    std::size_t count = 0;
};

SampleSummary summarize(std::span<const double> xs);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Wilson score interval for a binomial proportion at normal quantile z.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
};

LineFit least_squares_line(std::span<const double> x, std::span<const double> y);

/// Weighted least squares of y on the monomials 1, x, ..., x^degree.
struct PolyFit {
    std::vector<double> coef;    ///< coefficient of x^k
    std::vector<double> std_err;  ///< standard errors from the weighted normal equations
    double chi2 = 0.0;           ///< weighted residual sum of squares
    int dof = 0;
};

PolyFit weighted_polyfit(std::span<const double> x, std::span<const double> y, std::span<const double> w, int degree);

/// CDF of the chi-square law with `dof` degrees of freedom.
double chi2_cdf(double x, int dof);

/// Standard normal quantile.
double normal_quantile(double prob);

}  // namespace hetpol
