#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stemnorm/audio.hpp"
#include "stemnorm/stft.hpp"

namespace stemnorm {

/// How a panning coefficient alpha is recovered from the similarity psi
/// (linear law: left gain 1 - alpha, right gain alpha).
enum class PanGainEstimate {
    /// alpha = psi / 2 on the dominant side. Exact only at hard pan and center.
    half_similarity,
    /// Closed-form inverse of psi = 2a(1-a) / (a^2 + (1-a)^2). Recovers the
    /// pan coefficient of an amplitude-panned source exactly.
    exact_inverse,
};

struct PanningConfig {
    std::size_t fft_size = 2048;
    double hop_fraction = 0.5;
    double cutoff_hz = 16000.0;
    double transition_hz = 1000.0;  // correction fades out above the cutoff
    std::size_t savgol_window = 65;  // bins
    std::size_t savgol_order = 2;
    double max_gain_db = 12.0;
    double gain_floor = 1e-4;
    PanGainEstimate estimate = PanGainEstimate::exact_inverse;

    [[nodiscard]] StftParams stft() const {
        return {fft_size, static_cast<std::size_t>(static_cast<double>(fft_size) * hop_fraction)};
    }
};

/// Per-bin stereo analysis of one channel pair. Matrices are frames x bins, row-major.
/// side: +1 left-dominant, -1 right-dominant, 0 centered (psi within 1e-9 of 1).
struct PanningSpectrum {
    std::size_t frames = 0;
    std::size_t bins = 0;
    std::size_t fft_size = 0;
    std::vector<double> psi;
    std::vector<std::int8_t> side;
    std::vector<double> alpha;
    std::vector<double> gains_left;
    std::vector<double> gains_right;
};

/// Frame-mean similarity S per bin, Savitzky-Golay smoothed.
struct AveragePanning {
    std::vector<double> similarity;
    std::size_t fft_size = 0;
    std::optional<StemType> stem_type;
    bool operator==(const AveragePanning&) const = default;
};

struct BinPanning {
    double psi = 1.0;
    int side = 0;
    double alpha = 0.5;
};

/// Similarity, side and pan coefficient of one bin from channel magnitudes.
/// Two silent channels count as centered.
[[nodiscard]] BinPanning analyze_bin(double left_mag, double right_mag, PanGainEstimate estimate);

/// Pan coefficient implied by similarity `psi` on `side`.
[[nodiscard]] double alpha_from_similarity(double psi, int side, PanGainEstimate estimate);

/// Throws DataError when the spectrograms differ in shape.
[[nodiscard]] PanningSpectrum panning_spectrum(const Spectrogram& left, const Spectrogram& right,
                                               PanGainEstimate estimate = PanGainEstimate::exact_inverse);

/// Streaming mean of psi over any number of frames and stems.
class SimilarityAccumulator {
public:
    explicit SimilarityAccumulator(std::size_t fft_size);

    void add(const PanningSpectrum& spectrum);
    void add_frame(std::span<const double> psi_row);
    /// Analyzes a stem with the config's STFT and adds all of its frames.
    void add_waveform(const StereoWaveform& w, const PanningConfig& config);
    void merge(const SimilarityAccumulator& other);

    [[nodiscard]] std::size_t frames() const noexcept { return frames_; }
    [[nodiscard]] std::vector<double> raw_mean() const;
    /// Throws DataError when nothing was added.
    [[nodiscard]] AveragePanning finish(const PanningConfig& config,
                                        std::optional<StemType> type = std::nullopt) const;

private:
    std::size_t fft_size_;
    std::vector<double> sum_;
    std::vector<double> compensation_;
    std::size_t frames_ = 0;
};

/// Mean psi over every frame of every stem, smoothed. Throws DataError on empty input.
[[nodiscard]] AveragePanning corpus_average_similarity(std::span<const PanningSpectrum> spectra,
                                                       const PanningConfig& config = {});

/// Rescales magnitudes of one frame toward the target similarity in place.
/// Each bin's gains are raised to the power `weights[k]` (see correction_weights);
/// bins with weight 0 are untouched.
void repan_frame(std::span<double> left_mag, std::span<double> right_mag,
                 std::span<const double> target_similarity, std::span<const double> weights,
                 const PanningConfig& config);

/// Magnitude-only re-panning of a spectrogram pair; phases are not touched.
void repan_spectrogram(Spectrogram& left, Spectrogram& right, const AveragePanning& target,
                       const PanningConfig& config = {});

/// Re-pans every frame toward the target and resynthesizes with the original phases.
[[nodiscard]] StereoWaveform repan(const StereoWaveform& w, const AveragePanning& target,
                                   const PanningConfig& config = {});

/// Mean absolute difference between the stem's frame-mean psi and the target
/// similarity over bins below the cutoff.
[[nodiscard]] double similarity_deviation(const StereoWaveform& w, const AveragePanning& target,
                                          const PanningConfig& config = {});

/// First bin at or above cutoff_hz.
[[nodiscard]] std::size_t cutoff_bin(const PanningConfig& config, double sample_rate);

/// Per-bin strength of the re-panning correction: 1 below the cutoff, a
/// raised-cosine fade to 0 over transition_hz above it, 0 beyond.
[[nodiscard]] std::vector<double> correction_weights(const PanningConfig& config, double sample_rate);

}  // namespace stemnorm
