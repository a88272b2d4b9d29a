#pragma once

#include <span>
#include <vector>

#include "stemnorm/audio.hpp"

namespace stemnorm {

/// Rational-ratio polyphase resampler with a linear-phase Hann-windowed sinc
/// kernel. Output length is ceil(len * to / from).
[[nodiscard]] std::vector<float> resample(std::span<const float> input, double from_rate,
                                          double to_rate);

[[nodiscard]] StereoWaveform resample(const StereoWaveform& w, double to_rate);

}  // namespace stemnorm
