#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace stemnorm {

/// Neumaier-compensated scalar accumulator.
class CompensatedSum {
public:
    void add(double x) noexcept;
    [[nodiscard]] double value() const noexcept { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

/// Element-wise compensated accumulation of equal-length vectors.
class CompensatedVectorSum {
public:
    explicit CompensatedVectorSum(std::size_t size = 0);

    void add(std::span<const double> values);
    [[nodiscard]] std::size_t size() const noexcept { return sum_.size(); }
    [[nodiscard]] std::vector<double> value() const;

private:
    std::vector<double> sum_;
    std::vector<double> compensation_;
};

/// Runs body(i) for i in [0, count) on up to `workers` threads. Exceptions are
/// rethrown on the caller after all workers stop (the first one wins).
/// workers <= 1 runs inline in index order.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

/// Hardware concurrency, at least 1.
[[nodiscard]] std::size_t default_worker_count() noexcept;

/// Linear-interpolated percentile (numpy's default), q in [0, 100].
[[nodiscard]] double percentile(std::vector<double> values, double q);

}  // namespace stemnorm
