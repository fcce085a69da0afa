#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ddx {

// FNV-1a over bytes; used for content fingerprints (not security).
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v);

inline std::string content_hash(std::string_view bytes) {
    return "fnv1a:" + hex64(fnv1a64(bytes));
}

} // namespace ddx
