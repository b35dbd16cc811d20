#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace fedunlearn {

// Streaming FNV-1a (64-bit). Multi-byte values are fed little-endian so the
// digest does not depend on host byte order.
struct Fnv1a64 {
    std::uint64_t state = 14695981039346656037ULL;

    void byte(unsigned char b) {
        state ^= b;
        state *= 1099511628211ULL;
    }
    void bytes(const void* p, std::size_t n) {
        const unsigned char* q = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) byte(q[i]);
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) byte(static_cast<unsigned char>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    std::uint64_t digest() const { return state; }
};

} // namespace fedunlearn
