#pragma once

#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

namespace graphscale {

using VertexId = std::uint32_t;
using Label = std::uint64_t;

// Unreached / uninitialized 32-bit label value.
inline constexpr std::uint32_t kInf32 = std::numeric_limits<std::uint32_t>::max();

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal consistency violation (partitioning or pipeline bug, not user error).
struct ModelError : std::logic_error {
    using std::logic_error::logic_error;
};

inline bool is_pow2(std::uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }

inline std::uint32_t log2_exact(std::uint64_t x) {
    if (!is_pow2(x)) throw ConfigError("value must be a power of two: " + std::to_string(x));
    std::uint32_t b = 0;
    while ((x >> b) != 1) ++b;
    return b;
}

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return b == 0 ? 0 : (a + b - 1) / b; }

inline std::uint64_t double_bits(double d) {
    std::uint64_t u;
    std::memcpy(&u, &d, sizeof(u));
    return u;
}

inline double bits_double(std::uint64_t u) {
    double d;
    std::memcpy(&d, &u, sizeof(d));
    return d;
}

inline std::uint32_t float_bits(float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, sizeof(u));
    return u;
}

inline float bits_float(std::uint32_t u) {
    float f;
    std::memcpy(&f, &u, sizeof(f));
    return f;
}

} // namespace graphscale
