#pragma once

#include <cstdint>
#include <vector>

#include "stemnorm/audio.hpp"

namespace stemnorm::test {

/// Same sine in both channels.
[[nodiscard]] StereoWaveform stereo_sine(double freq_hz, double amplitude, double seconds,
                                         double rate = kDefaultSampleRate);

/// Sine in the left channel, silence in the right.
[[nodiscard]] StereoWaveform left_sine(double freq_hz, double amplitude, double seconds,
                                       double rate = kDefaultSampleRate);

/// Uniform white noise in [-amplitude, amplitude], independent per channel.
[[nodiscard]] StereoWaveform white_noise(double seconds, double amplitude, std::uint64_t seed,
                                         double rate = kDefaultSampleRate);

/// Gaussian white noise, one channel.
[[nodiscard]] std::vector<double> gaussian_noise(std::size_t n, double stddev, std::uint64_t seed);

/// A mono source placed with the linear panning law: left (1 - alpha), right alpha.
[[nodiscard]] StereoWaveform linear_pan(const std::vector<double>& mono, double alpha,
                                        double rate = kDefaultSampleRate);

/// `count` single-sample clicks of `amplitude` every `spacing_s`, the first at `first_s`.
[[nodiscard]] StereoWaveform click_train(std::size_t count, double spacing_s, double first_s, double amplitude,
                                         double seconds, double rate = kDefaultSampleRate);

/// Decaying noise hits (percussive), one every `spacing_s`, peak levels drawn in
/// [low_db, high_db], on top of a quieter sustained noise bed.
[[nodiscard]] StereoWaveform percussive_stem(std::uint64_t seed, double seconds, double spacing_s,
                                             double low_db, double high_db, double rate = kDefaultSampleRate);

/// Exponentially decaying stereo noise reaching -60 dB energy after rt60_s.
[[nodiscard]] StereoWaveform decaying_noise(double rt60_s, double seconds, std::uint64_t seed,
                                            double rate = kDefaultSampleRate);

[[nodiscard]] double max_abs_difference(const StereoWaveform& a, const StereoWaveform& b);

}  // namespace stemnorm::test
