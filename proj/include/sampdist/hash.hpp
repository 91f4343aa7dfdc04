#pragma once

// Seed derivation for weighted sampling: maps (key, instance, mode, seed)
// to a uniform value u in (0,1] via XXH64.  Coordinated mode hashes the key
// alone so every instance sees the same u; independent mode prepends the
// instance id as an 8-byte little-endian prefix.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace sampdist {

enum class Mode { independent, coordinated };

inline const char* mode_name(Mode m) {
    return m == Mode::independent ? "independent" : "coordinated";
}

namespace xxh {

inline constexpr std::uint64_t P1 = 0x9E3779B185EBCA87ULL;
inline constexpr std::uint64_t P2 = 0xC2B2AE3D27D4EB4FULL;
inline constexpr std::uint64_t P3 = 0x165667B19E3779F9ULL;
inline constexpr std::uint64_t P4 = 0x85EBCA77C2B2AE63ULL;
inline constexpr std::uint64_t P5 = 0x27D4EB2F165667C5ULL;

inline std::uint64_t bswap64(std::uint64_t v) {
    v = ((v & 0x00FF00FF00FF00FFULL) << 8) | ((v >> 8) & 0x00FF00FF00FF00FFULL);
    v = ((v & 0x0000FFFF0000FFFFULL) << 16) | ((v >> 16) & 0x0000FFFF0000FFFFULL);
    return (v << 32) | (v >> 32);
}

inline std::uint64_t read64(const unsigned char* p) {
    std::uint64_t v;
    std::memcpy(&v, p, 8);
    if constexpr (std::endian::native == std::endian::big) v = bswap64(v);
    return v;
}

inline std::uint32_t read32(const unsigned char* p) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    if constexpr (std::endian::native == std::endian::big)
        v = (v >> 24) | ((v >> 8) & 0xFF00u) | ((v << 8) & 0xFF0000u) | (v << 24);
    return v;
}

inline std::uint64_t round1(std::uint64_t acc, std::uint64_t lane) {
    return std::rotl(acc + lane * P2, 31) * P1;
}

inline std::uint64_t merge_round(std::uint64_t h, std::uint64_t acc) {
    return (h ^ round1(0, acc)) * P1 + P4;
}

// XXH64 one-shot, byte-identical to the reference implementation.
inline std::uint64_t xxh64(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    const unsigned char* end = p + len;
    std::uint64_t h;
    if (len >= 32) {
        std::uint64_t v1 = seed + P1 + P2;
        std::uint64_t v2 = seed + P2;
        std::uint64_t v3 = seed;
        std::uint64_t v4 = seed - P1;
        do {
            v1 = round1(v1, read64(p)); p += 8;
            v2 = round1(v2, read64(p)); p += 8;
            v3 = round1(v3, read64(p)); p += 8;
            v4 = round1(v4, read64(p)); p += 8;
        } while (p + 32 <= end);
        h = std::rotl(v1, 1) + std::rotl(v2, 7) + std::rotl(v3, 12) + std::rotl(v4, 18);
        h = merge_round(h, v1);
        h = merge_round(h, v2);
        h = merge_round(h, v3);
        h = merge_round(h, v4);
    } else {
        h = seed + P5;
    }
    h += static_cast<std::uint64_t>(len);
    while (p + 8 <= end) {
        h ^= round1(0, read64(p));
        h = std::rotl(h, 27) * P1 + P4;
        p += 8;
    }
    if (p + 4 <= end) {
        h ^= static_cast<std::uint64_t>(read32(p)) * P1;
        h = std::rotl(h, 23) * P2 + P3;
        p += 4;
    }
    while (p < end) {
        h ^= static_cast<std::uint64_t>(*p) * P5;
        h = std::rotl(h, 11) * P1;
        ++p;
    }
    h ^= h >> 33;
    h *= P2;
    h ^= h >> 29;
    h *= P3;
    h ^= h >> 32;
    return h;
}

} // namespace xxh

struct HashConfig {
    std::uint64_t global_seed = 0;
    Mode mode = Mode::coordinated;

    friend bool operator==(const HashConfig&, const HashConfig&) = default;
};

inline constexpr const char* kHashName = "xxh64";
inline constexpr const char* kHashVersion = "1";

// u = (h + 1) / 2^64, strictly in (0,1]: u = 0 would force inclusion of
// zero-valued entries and break estimator preconditions.
inline double seed_from_hash(std::uint64_t h) {
    return std::ldexp(static_cast<double>(h) + 1.0, -64);
}

inline double seed_for(const HashConfig& cfg, std::string_view key, std::uint32_t instance) {
    std::uint64_t h;
    if (cfg.mode == Mode::coordinated) {
        h = xxh::xxh64(key.data(), key.size(), cfg.global_seed);
    } else {
        unsigned char buf[8];
        std::uint64_t id = instance;
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((id >> (8 * i)) & 0xFF);
        if (key.size() <= 248) {
            unsigned char msg[256];
            std::memcpy(msg, buf, 8);
            std::memcpy(msg + 8, key.data(), key.size());
            h = xxh::xxh64(msg, key.size() + 8, cfg.global_seed);
        } else {
            std::string msg(reinterpret_cast<const char*>(buf), 8);
            msg.append(key);
            h = xxh::xxh64(msg.data(), msg.size(), cfg.global_seed);
        }
    }
    return seed_from_hash(h);
}

} // namespace sampdist
