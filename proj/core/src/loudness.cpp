#include "stemnorm/loudness.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "stemnorm/error.hpp"
#include "stemnorm/levels.hpp"
#include "stemnorm/numeric.hpp"

namespace stemnorm {
namespace {

constexpr double kBlockSeconds = 0.4;
constexpr std::size_t kStepsPerBlock = 4;  // 75% overlap
constexpr double kAbsoluteGate = -70.0;
constexpr double kRelativeGate = -10.0;
constexpr double kOffset = -0.691;

// Analog prototype of the K-weighting stages.
constexpr double kShelfFreq = 1681.974450955533;
constexpr double kShelfGainDb = 3.999843853973347;
constexpr double kShelfQ = 0.7071752369554196;
constexpr double kHighpassFreq = 38.13547087602444;
constexpr double kHighpassQ = 0.5003270373238773;

double block_loudness(double energy) { return kOffset + 10.0 * std::log10(energy); }

std::vector<double> filtered_subblock_energy(const std::vector<float>& channel, const KWeighting& k,
                                             std::size_t step, std::size_t subblocks) {
    std::vector<double> y(channel.begin(), channel.end());
    apply_biquad(k.shelf, std::span<double>(y));
    apply_biquad(k.highpass, std::span<double>(y));
    std::vector<double> energy(subblocks, 0.0);
    for (std::size_t s = 0; s < subblocks; ++s) {
        double acc = 0.0;
        for (std::size_t i = s * step; i < (s + 1) * step; ++i) {
            acc += y[i] * y[i];
        }
        energy[s] = acc;
    }
    return energy;
}

}  // namespace

KWeighting k_weighting(double sample_rate) {
    KWeighting kw;
    {
        const double k = std::tan(std::numbers::pi * kShelfFreq / sample_rate);
        const double vh = std::pow(10.0, kShelfGainDb / 20.0);
        const double vb = std::pow(vh, 0.4996667741545416);
        const double a0 = 1.0 + k / kShelfQ + k * k;
        kw.shelf = {(vh + vb * k / kShelfQ + k * k) / a0, 2.0 * (k * k - vh) / a0,
                    (vh - vb * k / kShelfQ + k * k) / a0, 2.0 * (k * k - 1.0) / a0,
                    (1.0 - k / kShelfQ + k * k) / a0};
    }
    {
        const double k = std::tan(std::numbers::pi * kHighpassFreq / sample_rate);
        const double a0 = 1.0 + k / kHighpassQ + k * k;
        kw.highpass = {1.0, -2.0, 1.0, 2.0 * (k * k - 1.0) / a0, (1.0 - k / kHighpassQ + k * k) / a0};
    }
    return kw;
}

LoudnessStats integrated_loudness(const StereoWaveform& w) {
    w.validate();
    const auto step = static_cast<std::size_t>(std::lround(kBlockSeconds / kStepsPerBlock * w.sample_rate));
    const std::size_t block = step * kStepsPerBlock;
    if (step == 0 || w.size() < block) {
        throw DataError("signal shorter than one 400 ms gating block");
    }
    const std::size_t subblocks = w.size() / step;
    const std::size_t blocks = subblocks - kStepsPerBlock + 1;
    const KWeighting kw = k_weighting(w.sample_rate);
    const std::vector<double> left = filtered_subblock_energy(w.left, kw, step, subblocks);
    const std::vector<double> right = filtered_subblock_energy(w.right, kw, step, subblocks);

    std::vector<double> energy(blocks);
    for (std::size_t j = 0; j < blocks; ++j) {
        double acc = 0.0;
        for (std::size_t s = j; s < j + kStepsPerBlock; ++s) {
            acc += left[s] + right[s];
        }
        energy[j] = acc / static_cast<double>(block);
    }

    CompensatedSum abs_sum;
    std::size_t abs_count = 0;
    for (double z : energy) {
        if (z > 0.0 && block_loudness(z) > kAbsoluteGate) {
            abs_sum.add(z);
            ++abs_count;
        }
    }
    if (abs_count == 0) {
        return {};
    }
    const double relative_gate =
        block_loudness(abs_sum.value() / static_cast<double>(abs_count)) + kRelativeGate;

    CompensatedSum gated_sum;
    std::size_t gated_count = 0;
    for (double z : energy) {
        if (z > 0.0) {
            const double l = block_loudness(z);
            if (l > kAbsoluteGate && l > relative_gate) {
                gated_sum.add(z);
                ++gated_count;
            }
        }
    }
    if (gated_count == 0) {
        return {};
    }
    return {block_loudness(gated_sum.value() / static_cast<double>(gated_count)), gated_count};
}

double average_stem_loudness(std::span<const LoudnessStats> stats, StemType type) {
    CompensatedSum sum;
    std::size_t n = 0;
    for (const LoudnessStats& s : stats) {
        if (s.integrated_lufs) {
            sum.add(*s.integrated_lufs);
            ++n;
        }
    }
    if (n == 0) {
        throw DataError("no measurable stems for type " + std::string(to_string(type)));
    }
    return sum.value() / static_cast<double>(n);
}

double average_stem_loudness(std::span<const StereoWaveform> stems, StemType type) {
    std::vector<LoudnessStats> stats;
    stats.reserve(stems.size());
    for (const StereoWaveform& w : stems) {
        stats.push_back(integrated_loudness(w));
    }
    return average_stem_loudness(stats, type);
}

LoudnessNormalized normalize_loudness(const StereoWaveform& w, double target_lufs, double max_gain_db) {
    const LoudnessStats before = integrated_loudness(w);
    if (before.silent()) {
        return {w, 0.0, true};
    }
    double gain_db = target_lufs - *before.integrated_lufs;
    if (gain_db > max_gain_db) {
        throw DataError("stem too quiet to normalize: needs " + std::to_string(gain_db) +
                        " dB of gain (limit " + std::to_string(max_gain_db) + " dB)");
    }
    if (std::abs(gain_db) < 1e-6) {
        return {w, 0.0, false};
    }
    StereoWaveform out = apply_gain(w, db_to_linear(gain_db));
    const LoudnessStats after = integrated_loudness(out);
    if (after.integrated_lufs && std::abs(*after.integrated_lufs - target_lufs) > 1e-3) {
        gain_db += target_lufs - *after.integrated_lufs;
        out = apply_gain(w, db_to_linear(gain_db));
    }
    return {std::move(out), gain_db, false};
}

}  // namespace stemnorm
