#include "stemnorm/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stemnorm/fft.hpp"

namespace stemnorm {
namespace {

struct ShelfTerms {
    double a;
    double cos_w0;
    double alpha;
};

ShelfTerms shelf_terms(double sample_rate, double freq, double gain_db, double q) {
    const double w0 = 2.0 * std::numbers::pi * freq / sample_rate;
    return {std::pow(10.0, gain_db / 40.0), std::cos(w0), std::sin(w0) / (2.0 * q)};
}

Biquad normalize(double b0, double b1, double b2, double a0, double a1, double a2) {
    return {b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
}

template <typename T>
void run_biquad(const Biquad& s, std::span<T> x) {
    double z1 = 0.0;
    double z2 = 0.0;
    for (T& sample : x) {
        const double in = sample;
        const double out = s.b0 * in + z1;
        z1 = s.b1 * in - s.a1 * out + z2;
        z2 = s.b2 * in - s.a2 * out;
        sample = static_cast<T>(out);
    }
}

}  // namespace

std::complex<double> Biquad::response(double freq_hz, double sample_rate) const {
    const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / sample_rate);
    const std::complex<double> z2 = z1 * z1;
    return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

Biquad low_shelf(double sample_rate, double cutoff_hz, double gain_db, double q) {
    const auto [a, c, alpha] = shelf_terms(sample_rate, cutoff_hz, gain_db, q);
    const double sq = 2.0 * std::sqrt(a) * alpha;
    return normalize(a * ((a + 1) - (a - 1) * c + sq), 2 * a * ((a - 1) - (a + 1) * c),
                     a * ((a + 1) - (a - 1) * c - sq), (a + 1) + (a - 1) * c + sq,
                     -2 * ((a - 1) + (a + 1) * c), (a + 1) + (a - 1) * c - sq);
}

Biquad high_shelf(double sample_rate, double cutoff_hz, double gain_db, double q) {
    const auto [a, c, alpha] = shelf_terms(sample_rate, cutoff_hz, gain_db, q);
    const double sq = 2.0 * std::sqrt(a) * alpha;
    return normalize(a * ((a + 1) + (a - 1) * c + sq), -2 * a * ((a - 1) + (a + 1) * c),
                     a * ((a + 1) + (a - 1) * c - sq), (a + 1) - (a - 1) * c + sq,
                     2 * ((a - 1) - (a + 1) * c), (a + 1) - (a - 1) * c - sq);
}

Biquad peaking(double sample_rate, double center_hz, double gain_db, double q) {
    const auto [a, c, alpha] = shelf_terms(sample_rate, center_hz, gain_db, q);
    return normalize(1 + alpha * a, -2 * c, 1 - alpha * a, 1 + alpha / a, -2 * c, 1 - alpha / a);
}

void apply_biquad(const Biquad& section, std::span<double> signal) { run_biquad(section, signal); }
void apply_biquad(const Biquad& section, std::span<float> signal) { run_biquad(section, signal); }

std::vector<double> fft_convolve(std::span<const double> signal, std::span<const double> kernel) {
    if (signal.empty() || kernel.empty()) {
        return {};
    }
    const std::size_t out_len = signal.size() + kernel.size() - 1;
    std::vector<double> out(out_len, 0.0);
    if (kernel.size() <= 32 || signal.size() <= 32) {
        for (std::size_t i = 0; i < signal.size(); ++i) {
            for (std::size_t j = 0; j < kernel.size(); ++j) {
                out[i + j] += signal[i] * kernel[j];
            }
        }
        return out;
    }
    const std::size_t fft_size =
        std::max<std::size_t>(next_power_of_two(2 * kernel.size()), std::size_t{4096});
    const std::size_t block = fft_size - kernel.size() + 1;
    RealFft fft(fft_size);
    const std::size_t bins = fft.bins();

    std::vector<double> buffer(fft_size, 0.0);
    std::copy(kernel.begin(), kernel.end(), buffer.begin());
    std::vector<std::complex<double>> kernel_spectrum(bins);
    fft.forward(buffer, kernel_spectrum);

    std::vector<std::complex<double>> spectrum(bins);
    std::vector<double> segment(fft_size);
    for (std::size_t start = 0; start < signal.size(); start += block) {
        const std::size_t n = std::min(block, signal.size() - start);
        std::fill(buffer.begin(), buffer.end(), 0.0);
        std::copy_n(signal.begin() + static_cast<std::ptrdiff_t>(start), n, buffer.begin());
        fft.forward(buffer, spectrum);
        for (std::size_t k = 0; k < bins; ++k) {
            spectrum[k] *= kernel_spectrum[k];
        }
        fft.inverse(spectrum, segment);
        const std::size_t valid = std::min(fft_size, out_len - start);
        for (std::size_t i = 0; i < valid; ++i) {
            out[start + i] += segment[i];
        }
    }
    return out;
}

std::vector<double> fir_filter(std::span<const double> signal, std::span<const double> taps) {
    std::vector<double> full = fft_convolve(signal, taps);
    full.resize(signal.size());
    return full;
}

std::vector<double> filtfilt_fir(std::span<const double> signal, std::span<const double> taps) {
    const std::size_t n = signal.size();
    if (n == 0) {
        return {};
    }
    const std::size_t pad = std::min(taps.size(), n - 1);
    std::vector<double> padded;
    padded.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) {
        padded.push_back(signal[i]);
    }
    padded.insert(padded.end(), signal.begin(), signal.end());
    for (std::size_t i = 1; i <= pad; ++i) {
        padded.push_back(signal[n - 1 - i]);
    }

    std::vector<double> forward = fir_filter(padded, taps);
    std::reverse(forward.begin(), forward.end());
    std::vector<double> backward = fir_filter(forward, taps);
    std::reverse(backward.begin(), backward.end());
    return {backward.begin() + static_cast<std::ptrdiff_t>(pad),
            backward.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace stemnorm
