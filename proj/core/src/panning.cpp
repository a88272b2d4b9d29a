#include "stemnorm/panning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "stemnorm/error.hpp"
#include "stemnorm/levels.hpp"
#include "stemnorm/savgol.hpp"

namespace stemnorm {
namespace {

constexpr double kCenterTolerance = 1e-9;

std::vector<double> to_double(const std::vector<float>& x) { return {x.begin(), x.end()}; }

void split_polar(std::span<const std::complex<double>> spectrum, std::span<double> magnitude,
                 std::span<double> phase) {
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        magnitude[k] = std::abs(spectrum[k]);
        phase[k] = std::arg(spectrum[k]);
    }
}

}  // namespace

double alpha_from_similarity(double psi, int side, PanGainEstimate estimate) {
    if (side == 0) {
        return 0.5;
    }
    psi = std::clamp(psi, 0.0, 1.0);
    double weak_share = 0.0;  // fraction of the panned gain on the weaker channel
    if (estimate == PanGainEstimate::half_similarity) {
        weak_share = 0.5 * psi;
    } else {
        // psi = 2r / (1 + r^2) with r = weak/strong; this branch of the inverse is cancellation-free.
        const double ratio = psi / (1.0 + std::sqrt(std::max(0.0, 1.0 - psi * psi)));
        weak_share = ratio / (1.0 + ratio);
    }
    return side > 0 ? weak_share : 1.0 - weak_share;
}

BinPanning analyze_bin(double left_mag, double right_mag, PanGainEstimate estimate) {
    const double denom = left_mag * left_mag + right_mag * right_mag;
    if (!(denom > 0.0)) {
        return {};
    }
    BinPanning b;
    b.psi = std::clamp(2.0 * left_mag * right_mag / denom, 0.0, 1.0);
    if (1.0 - b.psi <= kCenterTolerance) {
        b.side = 0;
    } else {
        b.side = left_mag > right_mag ? 1 : -1;
    }
    b.alpha = alpha_from_similarity(b.psi, b.side, estimate);
    return b;
}

PanningSpectrum panning_spectrum(const Spectrogram& left, const Spectrogram& right,
                                 PanGainEstimate estimate) {
    if (left.frames != right.frames || left.bins != right.bins || left.fft_size != right.fft_size) {
        throw DataError("left and right spectrograms differ in shape");
    }
    PanningSpectrum p;
    p.frames = left.frames;
    p.bins = left.bins;
    p.fft_size = left.fft_size;
    const std::size_t n = p.frames * p.bins;
    p.psi.resize(n);
    p.side.resize(n);
    p.alpha.resize(n);
    p.gains_left.resize(n);
    p.gains_right.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const BinPanning b = analyze_bin(left.magnitudes[i], right.magnitudes[i], estimate);
        p.psi[i] = b.psi;
        p.side[i] = static_cast<std::int8_t>(b.side);
        p.alpha[i] = b.alpha;
        p.gains_left[i] = 1.0 - b.alpha;
        p.gains_right[i] = b.alpha;
    }
    return p;
}

SimilarityAccumulator::SimilarityAccumulator(std::size_t fft_size)
    : fft_size_(fft_size), sum_(fft_size / 2 + 1, 0.0), compensation_(fft_size / 2 + 1, 0.0) {}

void SimilarityAccumulator::add_frame(std::span<const double> psi_row) {
    if (psi_row.size() != sum_.size()) {
        throw DataError("panning frame has " + std::to_string(psi_row.size()) + " bins, expected " +
                        std::to_string(sum_.size()));
    }
    for (std::size_t k = 0; k < sum_.size(); ++k) {
        const double x = psi_row[k];
        const double t = sum_[k] + x;
        compensation_[k] += std::abs(sum_[k]) >= std::abs(x) ? (sum_[k] - t) + x : (x - t) + sum_[k];
        sum_[k] = t;
    }
    ++frames_;
}

void SimilarityAccumulator::add(const PanningSpectrum& spectrum) {
    if (spectrum.fft_size != fft_size_) {
        throw DataError("panning spectra use inconsistent FFT sizes");
    }
    for (std::size_t t = 0; t < spectrum.frames; ++t) {
        add_frame(std::span<const double>(spectrum.psi.data() + t * spectrum.bins, spectrum.bins));
    }
}

void SimilarityAccumulator::add_waveform(const StereoWaveform& w, const PanningConfig& config) {
    if (config.fft_size != fft_size_) {
        throw DataError("panning config FFT size differs from the accumulator's");
    }
    if (w.empty()) {
        return;
    }
    const std::vector<double> l = to_double(w.left);
    const std::vector<double> r = to_double(w.right);
    StftAnalyzer left(l, config.stft());
    StftAnalyzer right(r, config.stft());
    const std::size_t bins = left.bins();
    std::vector<std::complex<double>> sl(bins);
    std::vector<std::complex<double>> sr(bins);
    std::vector<double> psi(bins);
    for (std::size_t t = 0; t < left.frames(); ++t) {
        left.frame(t, sl);
        right.frame(t, sr);
        for (std::size_t k = 0; k < bins; ++k) {
            psi[k] = analyze_bin(std::abs(sl[k]), std::abs(sr[k]), config.estimate).psi;
        }
        add_frame(psi);
    }
}

void SimilarityAccumulator::merge(const SimilarityAccumulator& other) {
    if (other.fft_size_ != fft_size_) {
        throw DataError("cannot merge panning accumulators with different FFT sizes");
    }
    for (std::size_t k = 0; k < sum_.size(); ++k) {
        const double x = other.sum_[k] + other.compensation_[k];
        const double t = sum_[k] + x;
        compensation_[k] += std::abs(sum_[k]) >= std::abs(x) ? (sum_[k] - t) + x : (x - t) + sum_[k];
        sum_[k] = t;
    }
    frames_ += other.frames_;
}

std::vector<double> SimilarityAccumulator::raw_mean() const {
    if (frames_ == 0) {
        throw DataError("no panning frames to average");
    }
    std::vector<double> mean(sum_.size());
    for (std::size_t k = 0; k < mean.size(); ++k) {
        mean[k] = (sum_[k] + compensation_[k]) / static_cast<double>(frames_);
    }
    return mean;
}

AveragePanning SimilarityAccumulator::finish(const PanningConfig& config, std::optional<StemType> type) const {
    std::vector<double> smooth = savgol_filter(raw_mean(), config.savgol_window, config.savgol_order);
    for (double& s : smooth) {
        s = std::clamp(s, 0.0, 1.0);
    }
    return {std::move(smooth), fft_size_, type};
}

AveragePanning corpus_average_similarity(std::span<const PanningSpectrum> spectra,
                                         const PanningConfig& config) {
    if (spectra.empty()) {
        throw DataError("cannot average an empty set of panning spectra");
    }
    SimilarityAccumulator acc(spectra.front().fft_size);
    for (const PanningSpectrum& s : spectra) {
        acc.add(s);
    }
    return acc.finish(config);
}

std::size_t cutoff_bin(const PanningConfig& config, double sample_rate) {
    const double exact = config.cutoff_hz * static_cast<double>(config.fft_size) / sample_rate;
    return std::min(static_cast<std::size_t>(std::ceil(exact)), config.fft_size / 2 + 1);
}

std::vector<double> correction_weights(const PanningConfig& config, double sample_rate) {
    const std::size_t bins = config.fft_size / 2 + 1;
    const std::size_t cutoff = cutoff_bin(config, sample_rate);
    const auto fade = static_cast<std::size_t>(
        std::ceil(config.transition_hz * static_cast<double>(config.fft_size) / sample_rate));
    std::vector<double> weights(bins, 0.0);
    for (std::size_t k = 0; k < bins; ++k) {
        if (k < cutoff) {
            weights[k] = 1.0;
        } else if (k < cutoff + fade) {
            const double x = static_cast<double>(k - cutoff + 1) / static_cast<double>(fade + 1);
            weights[k] = 0.5 + 0.5 * std::cos(std::numbers::pi * x);
        }
    }
    return weights;
}

void repan_frame(std::span<double> left_mag, std::span<double> right_mag,
                 std::span<const double> target_similarity, std::span<const double> weights,
                 const PanningConfig& config) {
    const double max_gain = db_to_linear(config.max_gain_db);
    const double min_gain = 1.0 / max_gain;
    const auto ratio = [&](double target, double current) {
        const double g = current >= config.gain_floor ? target / current
                         : (target >= current ? max_gain : min_gain);
        return std::clamp(g, min_gain, max_gain);
    };
    const std::size_t limit = std::min({weights.size(), left_mag.size(), target_similarity.size()});
    for (std::size_t k = 0; k < limit; ++k) {
        if (weights[k] == 0.0) {
            continue;
        }
        const BinPanning b = analyze_bin(left_mag[k], right_mag[k], config.estimate);
        if (b.side == 0) {
            continue;
        }
        const double target_alpha = alpha_from_similarity(target_similarity[k], b.side, config.estimate);
        const double gl = ratio(1.0 - target_alpha, 1.0 - b.alpha);
        const double gr = ratio(target_alpha, b.alpha);
        left_mag[k] *= weights[k] == 1.0 ? gl : std::pow(gl, weights[k]);
        right_mag[k] *= weights[k] == 1.0 ? gr : std::pow(gr, weights[k]);
    }
}

void repan_spectrogram(Spectrogram& left, Spectrogram& right, const AveragePanning& target,
                       const PanningConfig& config) {
    if (left.frames != right.frames || left.bins != right.bins) {
        throw DataError("left and right spectrograms differ in shape");
    }
    if (target.similarity.size() != left.bins || target.fft_size != left.fft_size) {
        throw DataError("panning target does not match the analysis FFT size");
    }
    const std::vector<double> weights = correction_weights(config, left.sample_rate);
    for (std::size_t t = 0; t < left.frames; ++t) {
        repan_frame(left.magnitude_row(t), right.magnitude_row(t), target.similarity, weights, config);
    }
}

StereoWaveform repan(const StereoWaveform& w, const AveragePanning& target, const PanningConfig& config) {
    const StftParams params = config.stft();
    validate(params);
    if (target.fft_size != config.fft_size || target.similarity.size() != config.fft_size / 2 + 1) {
        throw DataError("panning target does not match the analysis FFT size");
    }
    if (w.empty() || peak_amplitude(w) == 0.0) {
        return w;
    }
    const std::vector<double> l = to_double(w.left);
    const std::vector<double> r = to_double(w.right);
    StftAnalyzer analyze_left(l, params);
    StftAnalyzer analyze_right(r, params);
    OverlapAdder synth_left(w.size(), params);
    OverlapAdder synth_right(w.size(), params);
    const std::size_t bins = analyze_left.bins();
    const std::vector<double> weights = correction_weights(config, w.sample_rate);

    std::vector<std::complex<double>> sl(bins);
    std::vector<std::complex<double>> sr(bins);
    std::vector<double> mag_l(bins), mag_r(bins), phase_l(bins), phase_r(bins);
    for (std::size_t t = 0; t < analyze_left.frames(); ++t) {
        analyze_left.frame(t, sl);
        analyze_right.frame(t, sr);
        split_polar(sl, mag_l, phase_l);
        split_polar(sr, mag_r, phase_r);
        repan_frame(mag_l, mag_r, target.similarity, weights, config);
        for (std::size_t k = 0; k < bins; ++k) {
            sl[k] = std::polar(mag_l[k], phase_l[k]);
            sr[k] = std::polar(mag_r[k], phase_r[k]);
        }
        synth_left.add(t, sl);
        synth_right.add(t, sr);
    }
    const std::vector<double> out_l = synth_left.finish();
    const std::vector<double> out_r = synth_right.finish();
    return {std::vector<float>(out_l.begin(), out_l.end()), std::vector<float>(out_r.begin(), out_r.end()),
            w.sample_rate};
}

double similarity_deviation(const StereoWaveform& w, const AveragePanning& target, const PanningConfig& config) {
    SimilarityAccumulator acc(config.fft_size);
    acc.add_waveform(w, config);
    const std::vector<double> mean = acc.raw_mean();
    const std::size_t limit = std::min(cutoff_bin(config, w.sample_rate), mean.size());
    if (limit == 0) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t k = 0; k < limit; ++k) {
        total += std::abs(mean[k] - target.similarity[k]);
    }
    return total / static_cast<double>(limit);
}

}  // namespace stemnorm
