#include "stemnorm/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace stemnorm {

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        compensation_ += (sum_ - t) + x;
    } else {
        compensation_ += (x - t) + sum_;
    }
    sum_ = t;
}

CompensatedVectorSum::CompensatedVectorSum(std::size_t size)
    : sum_(size, 0.0), compensation_(size, 0.0) {}

void CompensatedVectorSum::add(std::span<const double> values) {
    if (sum_.empty() && compensation_.empty()) {
        sum_.assign(values.size(), 0.0);
        compensation_.assign(values.size(), 0.0);
    }
    if (values.size() != sum_.size()) {
        throw std::invalid_argument("CompensatedVectorSum: length mismatch");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = values[i];
        const double t = sum_[i] + x;
        if (std::abs(sum_[i]) >= std::abs(x)) {
            compensation_[i] += (sum_[i] - t) + x;
        } else {
            compensation_[i] += (x - t) + sum_[i];
        }
        sum_[i] = t;
    }
}

std::vector<double> CompensatedVectorSum::value() const {
    std::vector<double> out(sum_.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = sum_[i] + compensation_[i];
    }
    return out;
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                failed.store(true);
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const std::size_t n = std::min(workers, count);
        pool.reserve(n);
        for (std::size_t w = 0; w < n; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

std::size_t default_worker_count() noexcept {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw std::invalid_argument("percentile of an empty set");
    }
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
}

}  // namespace stemnorm
