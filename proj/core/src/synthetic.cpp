#include "stemnorm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "stemnorm/dataset.hpp"
#include "stemnorm/error.hpp"
#include "stemnorm/levels.hpp"
#include "stemnorm/random.hpp"
#include "stemnorm/wav.hpp"

namespace stemnorm {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Buffer {
    std::vector<double> left;
    std::vector<double> right;
    double rate;

    Buffer(std::size_t n, double r) : left(n, 0.0), right(n, 0.0), rate(r) {}

    // Adds a mono event at `start` with linear-law pan alpha.
    void add(std::size_t start, const std::vector<double>& mono, double alpha) {
        for (std::size_t i = 0; i < mono.size() && start + i < left.size(); ++i) {
            left[start + i] += (1.0 - alpha) * mono[i];
            right[start + i] += alpha * mono[i];
        }
    }

    [[nodiscard]] StereoWaveform to_waveform(double peak_db) const {
        double peak = 0.0;
        for (std::size_t i = 0; i < left.size(); ++i) {
            peak = std::max({peak, std::abs(left[i]), std::abs(right[i])});
        }
        const double gain = peak > 0.0 ? db_to_linear(peak_db) / peak : 0.0;
        StereoWaveform w;
        w.sample_rate = rate;
        w.left.resize(left.size());
        w.right.resize(right.size());
        for (std::size_t i = 0; i < left.size(); ++i) {
            w.left[i] = static_cast<float>(left[i] * gain);
            w.right[i] = static_cast<float>(right[i] * gain);
        }
        return w;
    }
};

std::vector<double> tone(double rate, double seconds, double f0, std::size_t harmonics, double tilt,
                         double attack_s, double decay_s, double vibrato_hz = 0.0, double vibrato_depth = 0.0) {
    const auto n = static_cast<std::size_t>(seconds * rate);
    std::vector<double> out(n);
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double f = f0 * (1.0 + vibrato_depth * std::sin(kTwoPi * vibrato_hz * t));
        phase += kTwoPi * f / rate;
        double s = 0.0;
        for (std::size_t h = 1; h <= harmonics; ++h) {
            if (f * static_cast<double>(h) >= 0.45 * rate) {
                break;
            }
            s += std::pow(static_cast<double>(h), -tilt) * std::sin(phase * static_cast<double>(h));
        }
        const double env = std::min(1.0, t / attack_s) * std::exp(-t / decay_s);
        out[i] = s * env;
    }
    return out;
}

std::vector<double> noise_burst(RandomStream& rng, double rate, double seconds, double decay_s, double brightness) {
    const auto n = static_cast<std::size_t>(seconds * rate);
    std::vector<double> out(n);
    double low = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double white = rng.uniform(-1.0, 1.0);
        low += 0.2 * (white - low);
        out[i] = (brightness * white + (1.0 - brightness) * low) * std::exp(-t / decay_s);
    }
    return out;
}

std::vector<double> kick(double rate) {
    const auto n = static_cast<std::size_t>(0.35 * rate);
    std::vector<double> out(n);
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double f = 50.0 + 90.0 * std::exp(-t / 0.03);
        phase += kTwoPi * f / rate;
        out[i] = std::sin(phase) * std::exp(-t / 0.12);
    }
    return out;
}

double note_hz(double base, int semitones) { return base * std::pow(2.0, semitones / 12.0); }

StereoWaveform make_drums(RandomStream& rng, std::size_t n, double rate, double beat) {
    Buffer b(n, rate);
    const std::vector<double> k = kick(rate);
    const double snare_pan = rng.uniform(0.4, 0.6);
    const double hat_pan = rng.uniform(0.2, 0.8);
    const double brightness = rng.uniform(0.5, 0.9);
    const auto beats = static_cast<std::size_t>(static_cast<double>(n) / rate / beat);
    for (std::size_t i = 0; i < beats; ++i) {
        const auto start = static_cast<std::size_t>(static_cast<double>(i) * beat * rate);
        if (i % 2 == 0) {
            b.add(start, k, 0.5);
        } else {
            std::vector<double> snare = noise_burst(rng, rate, 0.25, 0.06, brightness);
            b.add(start, snare, snare_pan);
        }
        for (int half = 0; half < 2; ++half) {
            const auto hat_start = start + static_cast<std::size_t>(half * 0.5 * beat * rate);
            std::vector<double> hat = noise_burst(rng, rate, 0.06, 0.015, 1.0);
            const double hat_gain = rng.uniform(0.15, 0.3);
            for (double& v : hat) {
                v *= hat_gain;
            }
            b.add(hat_start, hat, hat_pan);
        }
    }
    return b.to_waveform(rng.uniform(-9.0, -3.0));
}

StereoWaveform make_bass(RandomStream& rng, std::size_t n, double rate, double beat) {
    Buffer b(n, rate);
    const double root = rng.uniform(41.0, 55.0);
    const double tilt = rng.uniform(0.8, 1.6);
    const double alpha = rng.uniform(0.45, 0.55);
    const std::array<int, 5> scale{0, 3, 5, 7, 10};
    const auto beats = static_cast<std::size_t>(static_cast<double>(n) / rate / beat);
    for (std::size_t i = 0; i < beats; ++i) {
        const double f = note_hz(root, scale[rng.index(scale.size())]);
        const auto start = static_cast<std::size_t>(static_cast<double>(i) * beat * rate);
        b.add(start, tone(rate, beat, f, 12, tilt, 0.005, 0.35), alpha);
    }
    return b.to_waveform(rng.uniform(-10.0, -3.0));
}

StereoWaveform make_vocals(RandomStream& rng, std::size_t n, double rate, double beat) {
    Buffer b(n, rate);
    const double base = rng.uniform(180.0, 320.0);
    const double tilt = rng.uniform(1.0, 2.0);
    const double alpha = rng.uniform(0.4, 0.6);
    const std::array<int, 5> scale{0, 2, 4, 7, 9};
    const auto beats = static_cast<std::size_t>(static_cast<double>(n) / rate / beat);
    for (std::size_t i = 0; i < beats; ++i) {
        if ((i / 8) % 2 == 1 && i % 8 >= 6) {
            continue;  // breath between phrases
        }
        const double f = note_hz(base, scale[rng.index(scale.size())]);
        const auto start = static_cast<std::size_t>(static_cast<double>(i) * beat * rate);
        std::vector<double> syllable = tone(rate, beat * 0.95, f, 16, tilt, 0.03, 0.6, 5.0, 0.01);
        const std::vector<double> breath = noise_burst(rng, rate, 0.05, 0.02, 0.9);
        for (std::size_t j = 0; j < breath.size() && j < syllable.size(); ++j) {
            syllable[j] += 0.05 * breath[j];
        }
        b.add(start, syllable, alpha);
    }
    return b.to_waveform(rng.uniform(-8.0, -2.0));
}

StereoWaveform make_other(RandomStream& rng, std::size_t n, double rate, double beat) {
    Buffer b(n, rate);
    const double root = rng.uniform(110.0, 220.0);
    const double tilt = rng.uniform(0.7, 1.5);
    const std::array<std::array<int, 3>, 4> chords{{{0, 4, 7}, {5, 9, 12}, {7, 11, 14}, {-3, 0, 4}}};
    const std::array<double, 3> pans{rng.uniform(0.1, 0.35), rng.uniform(0.4, 0.6), rng.uniform(0.65, 0.9)};
    const double bar = 4.0 * beat;
    const auto bars = static_cast<std::size_t>(static_cast<double>(n) / rate / bar) + 1;
    for (std::size_t i = 0; i < bars; ++i) {
        const auto& chord = chords[rng.index(chords.size())];
        const auto start = static_cast<std::size_t>(static_cast<double>(i) * bar * rate);
        for (std::size_t v = 0; v < chord.size(); ++v) {
            b.add(start, tone(rate, bar, note_hz(root, chord[v]), 10, tilt, 0.01, 1.5), pans[v]);
        }
    }
    return b.to_waveform(rng.uniform(-10.0, -4.0));
}

}  // namespace

StemSet synthesize_song(const std::string& song_id, std::uint64_t seed, const SyntheticSongOptions& options) {
    if (!(options.duration_s > 0.0) || !(options.sample_rate > 0.0)) {
        throw DataError("synthetic song needs a positive duration and sample rate");
    }
    const auto n = static_cast<std::size_t>(std::lround(options.duration_s * options.sample_rate));
    RandomStream song_rng(derive_seed(seed, song_id, "tempo"));
    const double beat = 60.0 / song_rng.uniform(90.0, 130.0);
    StemSet set;
    set.song_id = song_id;
    for (StemType type : kAllStemTypes) {
        RandomStream rng(derive_seed(seed, song_id, to_string(type)));
        switch (type) {
            case StemType::vocals: set.stems[type] = make_vocals(rng, n, options.sample_rate, beat); break;
            case StemType::drums: set.stems[type] = make_drums(rng, n, options.sample_rate, beat); break;
            case StemType::bass: set.stems[type] = make_bass(rng, n, options.sample_rate, beat); break;
            case StemType::other: set.stems[type] = make_other(rng, n, options.sample_rate, beat); break;
        }
    }
    return set;
}

StereoWaveform synthetic_impulse_response(double rt60_s, double sample_rate, std::uint64_t seed, double length_s) {
    if (!(rt60_s > 0.0) || !(sample_rate > 0.0)) {
        throw DataError("impulse response needs a positive RT60 and sample rate");
    }
    const double seconds = length_s > 0.0 ? length_s : 1.5 * rt60_s;
    const auto n = static_cast<std::size_t>(std::lround(seconds * sample_rate));
    RandomStream rng(splitmix64(seed ^ 0x5bd1e995ULL));
    // 60 dB of amplitude decay over rt60: exp(-k * rt60) = 1e-3.
    const double k = std::log(1000.0) / rt60_s;
    StereoWaveform ir;
    ir.sample_rate = sample_rate;
    ir.left.resize(n);
    ir.right.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double env = 0.5 * std::exp(-k * static_cast<double>(i) / sample_rate);
        ir.left[i] = static_cast<float>(env * rng.uniform(-1.0, 1.0));
        ir.right[i] = static_cast<float>(env * rng.uniform(-1.0, 1.0));
    }
    return ir;
}

void write_synthetic_corpus(const std::filesystem::path& root, const SyntheticCorpusOptions& options) {
    std::filesystem::create_directories(root);
    for (std::size_t i = 0; i < options.songs; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "song_%03zu", i);
        StemSet song = synthesize_song(id, options.seed, options.song);
        const std::filesystem::path dir = root / "dataset" / id;
        write_song(dir, song);
        StereoWaveform mix = StereoWaveform::silence(song.stems.begin()->second.size(), options.song.sample_rate);
        for (const auto& [type, w] : song.stems) {
            for (std::size_t j = 0; j < w.size(); ++j) {
                mix.left[j] += w.left[j];
                mix.right[j] += w.right[j];
            }
        }
        write_audio(mixture_path(dir), mix);
    }
    if (options.impulse_responses) {
        const std::filesystem::path ir_dir = root / "impulse_responses";
        std::filesystem::create_directories(ir_dir);
        const std::array<double, 4> rts{1.1, 1.4, 2.5, 3.5};
        for (std::size_t i = 0; i < rts.size(); ++i) {
            char name[48];
            std::snprintf(name, sizeof name, "ir_%02zu_rt%.1f.wav", i, rts[i]);
            write_audio(ir_dir / name, synthetic_impulse_response(rts[i], options.song.sample_rate, options.seed + i));
        }
    }
}

}  // namespace stemnorm
