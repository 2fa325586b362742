#ifndef CARAM_SUPERFASTHASH_HPP
#define CARAM_SUPERFASTHASH_HPP

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace caram {

// Paul Hsieh's SuperFastHash. Tail bytes are widened through signed char
// before they enter the mix, and 16-bit loads are little-endian; both are
// part of the published algorithm and affect the output, so they are kept
// bit-exact here regardless of host char signedness.
uint32_t superfasthash(const uint8_t* data, size_t len) noexcept;

inline uint32_t superfasthash(std::string_view s) noexcept {
    return superfasthash(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

}  // namespace caram

#endif
