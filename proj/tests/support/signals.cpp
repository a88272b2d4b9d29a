#include "signals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace stemnorm::test {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<float> sine(double freq_hz, double amplitude, std::size_t n, double rate) {
    std::vector<float> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<float>(amplitude * std::sin(kTwoPi * freq_hz * static_cast<double>(i) / rate));
    }
    return out;
}

std::size_t samples(double seconds, double rate) { return static_cast<std::size_t>(std::lround(seconds * rate)); }

}  // namespace

StereoWaveform stereo_sine(double freq_hz, double amplitude, double seconds, double rate) {
    return StereoWaveform::from_mono(sine(freq_hz, amplitude, samples(seconds, rate), rate), rate);
}

StereoWaveform left_sine(double freq_hz, double amplitude, double seconds, double rate) {
    std::vector<float> l = sine(freq_hz, amplitude, samples(seconds, rate), rate);
    std::vector<float> r(l.size(), 0.0f);
    return {std::move(l), std::move(r), rate};
}

StereoWaveform white_noise(double seconds, double amplitude, std::uint64_t seed, double rate) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    const std::size_t n = samples(seconds, rate);
    StereoWaveform w = StereoWaveform::silence(n, rate);
    for (std::size_t i = 0; i < n; ++i) {
        w.left[i] = static_cast<float>(dist(gen));
        w.right[i] = static_cast<float>(dist(gen));
    }
    return w;
}

std::vector<double> gaussian_noise(std::size_t n, double stddev, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(0.0, stddev);
    std::vector<double> out(n);
    for (double& v : out) {
        v = dist(gen);
    }
    return out;
}

StereoWaveform linear_pan(const std::vector<double>& mono, double alpha, double rate) {
    StereoWaveform w = StereoWaveform::silence(mono.size(), rate);
    for (std::size_t i = 0; i < mono.size(); ++i) {
        w.left[i] = static_cast<float>((1.0 - alpha) * mono[i]);
        w.right[i] = static_cast<float>(alpha * mono[i]);
    }
    return w;
}

StereoWaveform click_train(std::size_t count, double spacing_s, double first_s, double amplitude, double seconds,
                           double rate) {
    StereoWaveform w = StereoWaveform::silence(samples(seconds, rate), rate);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = samples(first_s + static_cast<double>(k) * spacing_s, rate);
        if (i < w.size()) {
            w.left[i] = static_cast<float>(amplitude);
            w.right[i] = static_cast<float>(amplitude);
        }
    }
    return w;
}

StereoWaveform percussive_stem(std::uint64_t seed, double seconds, double spacing_s, double low_db, double high_db,
                               double rate) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> level(low_db, high_db);
    std::uniform_real_distribution<double> white(-1.0, 1.0);
    std::uniform_real_distribution<double> decay(0.03, 0.09);
    const std::size_t n = samples(seconds, rate);
    std::vector<double> left(n), right(n);
    for (std::size_t i = 0; i < n; ++i) {
        left[i] = 0.01 * white(gen);
        right[i] = 0.01 * white(gen);
    }
    for (double t = 0.1; t + 0.3 < seconds; t += spacing_s) {
        const double amp = std::pow(10.0, level(gen) / 20.0);
        const double tau = decay(gen);
        const std::size_t start = samples(t, rate);
        const std::size_t len = samples(0.3, rate);
        for (std::size_t j = 0; j < len && start + j < n; ++j) {
            const double env = amp * std::exp(-static_cast<double>(j) / rate / tau);
            left[start + j] += env * white(gen);
            right[start + j] += env * white(gen);
        }
    }
    StereoWaveform w = StereoWaveform::silence(n, rate);
    for (std::size_t i = 0; i < n; ++i) {
        w.left[i] = static_cast<float>(std::clamp(left[i], -1.0, 1.0));
        w.right[i] = static_cast<float>(std::clamp(right[i], -1.0, 1.0));
    }
    return w;
}

StereoWaveform decaying_noise(double rt60_s, double seconds, std::uint64_t seed, double rate) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    const std::size_t n = samples(seconds, rate);
    // Amplitude falls by 60 dB (a factor 1000) over rt60_s.
    const double k = std::log(1000.0) / rt60_s;
    StereoWaveform w = StereoWaveform::silence(n, rate);
    for (std::size_t i = 0; i < n; ++i) {
        const double env = 0.5 * std::exp(-k * static_cast<double>(i) / rate);
        w.left[i] = static_cast<float>(env * dist(gen));
        w.right[i] = static_cast<float>(env * dist(gen));
    }
    return w;
}

double max_abs_difference(const StereoWaveform& a, const StereoWaveform& b) {
    double m = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        m = std::max({m, std::abs(static_cast<double>(a.left[i]) - b.left[i]),
                      std::abs(static_cast<double>(a.right[i]) - b.right[i])});
    }
    return a.size() == b.size() ? m : std::numeric_limits<double>::infinity();
}

}  // namespace stemnorm::test
