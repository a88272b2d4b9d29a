#include "stemnorm/wav.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "stemnorm/error.hpp"
#include "stemnorm/resample.hpp"

namespace stemnorm {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;
constexpr const char* kSupported = "supported formats: PCM 16-bit, PCM 24-bit, IEEE float 32-bit";

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
    }
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
    out.insert(out.end(), tag, tag + 4);
}

struct FormatChunk {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t block_align = 0;
    std::uint16_t bits = 0;
};

float decode_sample(const std::uint8_t* p, const FormatChunk& fmt) {
    if (fmt.format == kFormatFloat) {
        const std::uint32_t bits = read_u32(p);
        return std::bit_cast<float>(bits);
    }
    if (fmt.bits == 16) {
        const auto v = static_cast<std::int16_t>(read_u16(p));
        return static_cast<float>(v) / 32768.0F;
    }
    // 24-bit, sign-extended through the top byte.
    std::int32_t v = static_cast<std::int32_t>(p[0]) | (static_cast<std::int32_t>(p[1]) << 8) |
                     (static_cast<std::int32_t>(p[2]) << 16);
    if ((v & 0x800000) != 0) {
        v -= 0x1000000;
    }
    return static_cast<float>(static_cast<double>(v) / 8388608.0);
}

}  // namespace

StereoWaveform read_audio(const std::filesystem::path& path, const ReadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open audio file " + path.string());
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    const auto fail = [&](const std::string& why) -> DataError {
        return DataError(path.string() + ": " + why);
    };
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw fail(std::string("not a RIFF/WAVE file; ") + kSupported);
    }

    std::optional<FormatChunk> fmt;
    const std::uint8_t* data = nullptr;
    std::size_t data_size = 0;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint8_t* chunk = bytes.data() + pos;
        const std::uint32_t size = read_u32(chunk + 4);
        const std::size_t body = pos + 8;
        const std::size_t available = bytes.size() - body;
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (size < 16 || size > available) {
                throw fail("truncated fmt chunk");
            }
            FormatChunk f;
            f.format = read_u16(chunk + 8);
            f.channels = read_u16(chunk + 10);
            f.sample_rate = read_u32(chunk + 12);
            f.block_align = read_u16(chunk + 20);
            f.bits = read_u16(chunk + 22);
            if (f.format == kFormatExtensible) {
                if (size < 40) {
                    throw fail("truncated WAVE_FORMAT_EXTENSIBLE header");
                }
                f.format = read_u16(chunk + 8 + 24);
            }
            fmt = f;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = chunk + 8;
            // Tolerate writers that leave a placeholder size on streamed files.
            data_size = std::min<std::size_t>(size, available);
        }
        pos = body + size + (size & 1U);
    }
    if (!fmt) {
        throw fail("missing fmt chunk");
    }
    if (data == nullptr) {
        throw fail("missing data chunk");
    }
    const bool pcm_ok = fmt->format == kFormatPcm && (fmt->bits == 16 || fmt->bits == 24);
    const bool float_ok = fmt->format == kFormatFloat && fmt->bits == 32;
    if (!pcm_ok && !float_ok) {
        throw fail("unsupported codec (format tag " + std::to_string(fmt->format) + ", " +
                   std::to_string(fmt->bits) + " bits); " + kSupported);
    }
    if (fmt->channels != 1 && fmt->channels != 2) {
        throw fail("unsupported channel count " + std::to_string(fmt->channels) +
                   "; mono and stereo are supported");
    }
    const std::size_t bytes_per_sample = fmt->bits / 8U;
    const std::size_t frame_bytes = bytes_per_sample * fmt->channels;
    if (fmt->sample_rate == 0) {
        throw fail("sample rate is zero");
    }
    const std::size_t frames = data_size / frame_bytes;

    StereoWaveform w;
    w.sample_rate = static_cast<double>(fmt->sample_rate);
    w.left.resize(frames);
    w.right.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        const std::uint8_t* p = data + i * frame_bytes;
        w.left[i] = decode_sample(p, *fmt);
        w.right[i] = fmt->channels == 2 ? decode_sample(p + bytes_per_sample, *fmt) : w.left[i];
    }
    w.validate();

    if (options.session_rate && *options.session_rate != w.sample_rate) {
        if (!options.resample) {
            throw fail("sample-rate mismatch: file is " + std::to_string(fmt->sample_rate) +
                       " Hz, session is " +
                       std::to_string(static_cast<long>(*options.session_rate)) +
                       " Hz (enable resampling to convert)");
        }
        w = resample(w, *options.session_rate);
    }
    return w;
}

void write_audio(const std::filesystem::path& path, const StereoWaveform& w,
                 WavSampleFormat format) {
    w.validate();
    const std::uint16_t bits = format == WavSampleFormat::pcm16 ? 16 : format == WavSampleFormat::pcm24 ? 24 : 32;
    const std::uint16_t tag = format == WavSampleFormat::float32 ? kFormatFloat : kFormatPcm;
    const std::uint16_t channels = 2;
    const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
    const auto rate = static_cast<std::uint32_t>(std::lround(w.sample_rate));
    const std::uint64_t data_bytes = static_cast<std::uint64_t>(w.size()) * block_align;
    if (data_bytes > 0xFFFFFFFFULL - 44) {
        throw DataError("audio too long for a RIFF/WAVE file");
    }

    std::vector<std::uint8_t> out;
    out.reserve(44 + data_bytes);
    put_tag(out, "RIFF");
    put_u32(out, static_cast<std::uint32_t>(36 + data_bytes));
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, tag);
    put_u16(out, channels);
    put_u32(out, rate);
    put_u32(out, rate * block_align);
    put_u16(out, block_align);
    put_u16(out, bits);
    put_tag(out, "data");
    put_u32(out, static_cast<std::uint32_t>(data_bytes));

    const auto encode = [&](float x) {
        if (format == WavSampleFormat::float32) {
            put_u32(out, std::bit_cast<std::uint32_t>(x));
            return;
        }
        const double clipped = std::clamp(static_cast<double>(x), -1.0, 1.0);
        if (format == WavSampleFormat::pcm16) {
            const long v = std::clamp(std::lround(clipped * 32768.0), -32768L, 32767L);
            put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
        } else {
            const long v = std::clamp(std::lround(clipped * 8388608.0), -8388608L, 8388607L);
            const auto u = static_cast<std::uint32_t>(v);
            out.push_back(static_cast<std::uint8_t>(u & 0xFF));
            out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
            out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
        }
    };
    for (std::size_t i = 0; i < w.size(); ++i) {
        encode(w.left[i]);
        encode(w.right[i]);
    }

    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw DataError("cannot write audio file " + path.string());
    }
    file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!file) {
        throw DataError("short write to " + path.string());
    }
}

WavSampleFormat wav_format_from_bits(int bits) {
    switch (bits) {
        case 16: return WavSampleFormat::pcm16;
        case 24: return WavSampleFormat::pcm24;
        case 32: return WavSampleFormat::float32;
        default: throw DataError("unsupported output bit depth " + std::to_string(bits) + "; use 16, 24 or 32 (float)");
    }
}

}  // namespace stemnorm
