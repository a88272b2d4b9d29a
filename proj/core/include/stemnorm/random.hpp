#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace stemnorm {

/// 64-bit FNV-1a over raw bytes, continuing from `hash`.
[[nodiscard]] constexpr std::uint64_t fnv1a(std::string_view bytes,
                                            std::uint64_t hash = 0xcbf29ce484222325ULL) noexcept {
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of an independent stream for one (song, stem) pair.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view song_id,
                                               std::string_view stem) noexcept {
    std::array<char, 8> bytes{};
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        bytes[i] = static_cast<char>((seed >> (8 * i)) & 0xffU);
    }
    std::uint64_t h = fnv1a({bytes.data(), bytes.size()});
    h = fnv1a(song_id, h);
    h = fnv1a(std::string_view("\0", 1), h);
    h = fnv1a(stem, h);
    return splitmix64(h);
}

/// Mersenne Twister with explicit uniform mappings so draws are identical
/// across standard library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 bits of resolution.
    [[nodiscard]] double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    [[nodiscard]] double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform index in [0, n). n must be positive.
    [[nodiscard]] std::size_t index(std::size_t n) {
        const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace stemnorm
