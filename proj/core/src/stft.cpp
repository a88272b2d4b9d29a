#include "stemnorm/stft.hpp"

#include <algorithm>
#include <cmath>

#include "stemnorm/error.hpp"
#include "stemnorm/window.hpp"

namespace stemnorm {

void validate(const StftParams& params) {
    if (!is_power_of_two(params.fft_size) || params.fft_size < 2) {
        throw DataError("STFT size must be a power of two, got " +
                        std::to_string(params.fft_size));
    }
    if (params.hop == 0 || params.hop > params.fft_size) {
        throw DataError("STFT hop must be in (0, fft_size]");
    }
}

std::size_t stft_frame_count(std::size_t length, std::size_t hop) noexcept {
    return length == 0 ? 0 : 1 + (length - 1) / hop;
}

StftAnalyzer::StftAnalyzer(std::span<const double> signal, const StftParams& params)
    : signal_(signal),
      params_(params),
      frames_(stft_frame_count(signal.size(), params.hop)),
      window_(hann_periodic(params.fft_size)),
      buffer_(params.fft_size),
      fft_(params.fft_size) {
    validate(params);
}

void StftAnalyzer::frame(std::size_t t, std::span<std::complex<double>> out) {
    const auto n = static_cast<std::ptrdiff_t>(params_.fft_size);
    const auto len = static_cast<std::ptrdiff_t>(signal_.size());
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(t * params_.hop) - n / 2;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t idx = start + i;
        const double x = (idx >= 0 && idx < len) ? signal_[static_cast<std::size_t>(idx)] : 0.0;
        buffer_[static_cast<std::size_t>(i)] = x * window_[static_cast<std::size_t>(i)];
    }
    fft_.forward(buffer_, out);
}

OverlapAdder::OverlapAdder(std::size_t signal_length, const StftParams& params)
    : length_(signal_length),
      params_(params),
      window_(hann_periodic(params.fft_size)),
      accum_(signal_length, 0.0),
      weight_(signal_length, 0.0),
      buffer_(params.fft_size),
      fft_(params.fft_size) {
    validate(params);
}

void OverlapAdder::add(std::size_t t, std::span<const std::complex<double>> spectrum) {
    fft_.inverse(spectrum, buffer_);
    const auto n = static_cast<std::ptrdiff_t>(params_.fft_size);
    const auto len = static_cast<std::ptrdiff_t>(length_);
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(t * params_.hop) - n / 2;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -start);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, len - start);
    for (std::ptrdiff_t i = lo; i < hi; ++i) {
        const auto idx = static_cast<std::size_t>(start + i);
        const double w = window_[static_cast<std::size_t>(i)];
        accum_[idx] += w * buffer_[static_cast<std::size_t>(i)];
        weight_[idx] += w * w;
    }
}

std::vector<double> OverlapAdder::finish() const {
    std::vector<double> out(length_, 0.0);
    for (std::size_t i = 0; i < length_; ++i) {
        if (weight_[i] > 1e-12) {
            out[i] = accum_[i] / weight_[i];
        }
    }
    return out;
}

Spectrogram stft(std::span<const double> signal, const StftParams& params, double sample_rate) {
    validate(params);
    if (signal.empty()) {
        throw DataError("empty signal");
    }
    StftAnalyzer analyzer(signal, params);
    Spectrogram s;
    s.fft_size = params.fft_size;
    s.hop = params.hop;
    s.frames = analyzer.frames();
    s.bins = analyzer.bins();
    s.signal_length = signal.size();
    s.sample_rate = sample_rate;
    s.magnitudes.resize(s.frames * s.bins);
    s.phases.resize(s.frames * s.bins);
    std::vector<std::complex<double>> spectrum(s.bins);
    for (std::size_t t = 0; t < s.frames; ++t) {
        analyzer.frame(t, spectrum);
        for (std::size_t k = 0; k < s.bins; ++k) {
            s.magnitudes[t * s.bins + k] = std::abs(spectrum[k]);
            s.phases[t * s.bins + k] = std::arg(spectrum[k]);
        }
    }
    return s;
}

Spectrogram stft(std::span<const float> signal, const StftParams& params, double sample_rate) {
    const std::vector<double> wide(signal.begin(), signal.end());
    return stft(std::span<const double>(wide), params, sample_rate);
}

std::vector<float> istft(const Spectrogram& s) {
    const StftParams params{s.fft_size, s.hop};
    validate(params);
    if (s.bins != s.fft_size / 2 + 1 || s.magnitudes.size() != s.frames * s.bins ||
        s.phases.size() != s.magnitudes.size() ||
        s.frames != stft_frame_count(s.signal_length, s.hop)) {
        throw DataError("spectrogram dimensions are inconsistent");
    }
    OverlapAdder synth(s.signal_length, params);
    std::vector<std::complex<double>> spectrum(s.bins);
    for (std::size_t t = 0; t < s.frames; ++t) {
        for (std::size_t k = 0; k < s.bins; ++k) {
            spectrum[k] = std::polar(s.magnitudes[t * s.bins + k], s.phases[t * s.bins + k]);
        }
        synth.add(t, spectrum);
    }
    const std::vector<double> wide = synth.finish();
    return {wide.begin(), wide.end()};
}

}  // namespace stemnorm
