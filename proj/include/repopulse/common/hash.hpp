#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace repopulse {

/// FNV-1a, 64 bit. Stable across builds and platforms.
[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

[[nodiscard]] inline std::string to_hex(std::uint64_t v, int digits = 16) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(static_cast<std::size_t>(digits), '0');
    for (int i = digits - 1; i >= 0 && v != 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace repopulse
