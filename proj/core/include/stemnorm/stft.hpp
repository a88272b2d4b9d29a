#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "stemnorm/fft.hpp"

namespace stemnorm {

struct StftParams {
    std::size_t fft_size = 2048;
    std::size_t hop = 512;
};

/// Throws DataError unless fft_size is a power of two and 0 < hop <= fft_size.
void validate(const StftParams& params);

/// Frames produced for a signal of `length` samples: frame t is centered on
/// sample t*hop, the signal is zero-padded by fft_size/2 on both sides, and the
/// last frame is the last one whose center lies inside the signal.
[[nodiscard]] std::size_t stft_frame_count(std::size_t length, std::size_t hop) noexcept;

/// Magnitude/phase STFT of a single channel (Hann window). Row-major frames x bins.
struct Spectrogram {
    std::size_t fft_size = 0;
    std::size_t hop = 0;
    std::size_t frames = 0;
    std::size_t bins = 0;
    std::size_t signal_length = 0;
    double sample_rate = 0.0;
    std::vector<double> magnitudes;
    std::vector<double> phases;

    [[nodiscard]] std::span<double> magnitude_row(std::size_t frame) {
        return {magnitudes.data() + frame * bins, bins};
    }
    [[nodiscard]] std::span<const double> magnitude_row(std::size_t frame) const {
        return {magnitudes.data() + frame * bins, bins};
    }
    [[nodiscard]] std::span<const double> phase_row(std::size_t frame) const {
        return {phases.data() + frame * bins, bins};
    }
    [[nodiscard]] double magnitude(std::size_t frame, std::size_t bin) const {
        return magnitudes[frame * bins + bin];
    }
    [[nodiscard]] double bin_frequency(std::size_t bin) const {
        return static_cast<double>(bin) * sample_rate / static_cast<double>(fft_size);
    }
};

/// Throws DataError("empty signal") on empty input.
[[nodiscard]] Spectrogram stft(std::span<const float> signal, const StftParams& params,
                               double sample_rate);
[[nodiscard]] Spectrogram stft(std::span<const double> signal, const StftParams& params,
                               double sample_rate);

/// Weighted overlap-add inverse. Exact inverse of stft() for unmodified input.
[[nodiscard]] std::vector<float> istft(const Spectrogram& spectrogram);

/// Frame-at-a-time analysis for callers that cannot hold a full spectrogram.
class StftAnalyzer {
public:
    StftAnalyzer(std::span<const double> signal, const StftParams& params);

    [[nodiscard]] std::size_t frames() const noexcept { return frames_; }
    [[nodiscard]] std::size_t bins() const noexcept { return params_.fft_size / 2 + 1; }
    [[nodiscard]] const std::vector<double>& window() const noexcept { return window_; }

    /// Complex spectrum of frame t (bins() values).
    void frame(std::size_t t, std::span<std::complex<double>> out);

private:
    std::span<const double> signal_;
    StftParams params_;
    std::size_t frames_;
    std::vector<double> window_;
    std::vector<double> buffer_;
    RealFft fft_;
};

/// Weighted overlap-add synthesis matching StftAnalyzer framing.
class OverlapAdder {
public:
    OverlapAdder(std::size_t signal_length, const StftParams& params);

    void add(std::size_t t, std::span<const std::complex<double>> spectrum);

    /// Normalizes by the summed squared window and returns signal_length samples.
    [[nodiscard]] std::vector<double> finish() const;

private:
    std::size_t length_;
    StftParams params_;
    std::vector<double> window_;
    std::vector<double> accum_;
    std::vector<double> weight_;
    std::vector<double> buffer_;
    RealFft fft_;
};

}  // namespace stemnorm
