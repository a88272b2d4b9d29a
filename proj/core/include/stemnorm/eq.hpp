#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "stemnorm/audio.hpp"
#include "stemnorm/stft.hpp"

namespace stemnorm {

struct EqConfig {
    std::size_t fft_size = 65536;
    double hop_fraction = 0.25;
    std::size_t fir_taps = 1001;
    std::size_t savgol_window = 1025;  // bins
    std::size_t savgol_order = 2;
    double max_gain_db = 24.0;
    double magnitude_floor = 1e-10;

    [[nodiscard]] StftParams stft() const {
        return {fft_size, static_cast<std::size_t>(static_cast<double>(fft_size) * hop_fraction)};
    }
};

/// Long-term mean magnitude spectrum, floored so logarithms stay finite.
struct AverageSpectrum {
    std::vector<double> magnitude;
    std::size_t fft_size = 0;
    double sample_rate = 0.0;
    std::optional<StemType> stem_type;

    [[nodiscard]] std::size_t bins() const noexcept { return magnitude.size(); }
    [[nodiscard]] double bin_frequency(std::size_t bin) const {
        return static_cast<double>(bin) * sample_rate / static_cast<double>(fft_size);
    }
    bool operator==(const AverageSpectrum&) const = default;
};

/// STFT magnitudes averaged over frames and both channels.
/// Throws DataError when the stem is shorter than one analysis frame.
[[nodiscard]] AverageSpectrum stem_mean_spectrum(const StereoWaveform& w, const EqConfig& config = {});

/// Bin-wise arithmetic mean. Throws DataError on an empty list or mismatched shapes.
[[nodiscard]] AverageSpectrum corpus_average_spectrum(std::span<const AverageSpectrum> spectra);

/// Log-domain difference target/stem in dB, clamped to +/- max_gain_db and
/// Savitzky-Golay smoothed. This is the full (not square-rooted) correction.
/// Throws DataError if the difference is not finite.
[[nodiscard]] std::vector<double> eq_correction_db(const AverageSpectrum& stem,
                                                   const AverageSpectrum& target,
                                                   const EqConfig& config = {});

/// Linear-phase FIR of `taps` (odd) coefficients approximating the zero-phase
/// amplitude response `amplitude` sampled on the bins of an FFT of size
/// 2*(amplitude.size()-1): frequency sampling followed by a Hann window.
[[nodiscard]] std::vector<double> design_eq_fir(std::span<const double> amplitude, std::size_t taps);

/// Matches the stem's long-term spectrum to `target` with a zero-phase FIR.
/// Both channels receive the same filter and keep their length.
[[nodiscard]] StereoWaveform match_eq(const StereoWaveform& w, const AverageSpectrum& target,
                                      const EqConfig& config = {});

/// Largest absolute value of the smoothed dB difference measured/target over
/// [low_hz, high_hz]. Smoothing uses the config's Savitzky-Golay settings.
[[nodiscard]] double smoothed_spectrum_deviation_db(const AverageSpectrum& measured,
                                                    const AverageSpectrum& target, double low_hz,
                                                    double high_hz, const EqConfig& config = {});

}  // namespace stemnorm
