#include "stemnorm/resample.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <numbers>

#include "stemnorm/error.hpp"

namespace stemnorm {
namespace {

constexpr std::int64_t kZeroCrossings = 16;

}  // namespace

std::vector<float> resample(std::span<const float> input, double from_rate, double to_rate) {
    const auto from = static_cast<std::int64_t>(std::llround(from_rate));
    const auto to = static_cast<std::int64_t>(std::llround(to_rate));
    if (from <= 0 || to <= 0 || std::abs(from_rate - static_cast<double>(from)) > 1e-9 ||
        std::abs(to_rate - static_cast<double>(to)) > 1e-9) {
        throw DataError("resampling requires positive integer sample rates");
    }
    if (from == to) {
        return {input.begin(), input.end()};
    }
    const std::int64_t g = std::gcd(from, to);
    const std::int64_t up = to / g;
    const std::int64_t down = from / g;
    const std::int64_t spacing = std::max(up, down);  // upsampled samples per sinc zero crossing
    const std::int64_t half = kZeroCrossings * spacing;

    // Kernel in the upsampled domain, gain `up` to compensate zero stuffing.
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    for (std::int64_t j = -half; j <= half; ++j) {
        const double x = static_cast<double>(j) / static_cast<double>(spacing);
        const double sinc = j == 0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        const double win = 0.5 + 0.5 * std::cos(std::numbers::pi * static_cast<double>(j) /
                                                static_cast<double>(half));
        kernel[static_cast<std::size_t>(j + half)] =
            sinc * win * static_cast<double>(up) / static_cast<double>(spacing);
    }

    const auto n_in = static_cast<std::int64_t>(input.size());
    const std::int64_t n_out = (n_in * up + down - 1) / down;
    std::vector<float> out(static_cast<std::size_t>(n_out));
    for (std::int64_t m = 0; m < n_out; ++m) {
        const std::int64_t center = m * down;
        const std::int64_t first = center - half;
        const std::int64_t n_lo = first >= 0 ? (first + up - 1) / up : -((-first) / up);
        const std::int64_t n_hi = (center + half) / up;
        double acc = 0.0;
        for (std::int64_t n = std::max<std::int64_t>(n_lo, 0); n <= std::min(n_hi, n_in - 1); ++n) {
            acc += static_cast<double>(input[static_cast<std::size_t>(n)]) *
                   kernel[static_cast<std::size_t>(center - n * up + half)];
        }
        out[static_cast<std::size_t>(m)] = static_cast<float>(acc);
    }
    return out;
}

StereoWaveform resample(const StereoWaveform& w, double to_rate) {
    return {resample(w.left, w.sample_rate, to_rate), resample(w.right, w.sample_rate, to_rate),
            to_rate};
}

}  // namespace stemnorm
