#include "caram/superfasthash.hpp"

namespace caram {

namespace {

inline uint32_t get16(const uint8_t* p) noexcept {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8);
}

// The reference reads the trailing bytes as (signed) char, so a byte with
// the high bit set contributes a sign-extended value.
inline uint32_t sext8(uint8_t b) noexcept {
    return static_cast<uint32_t>(static_cast<int32_t>(static_cast<int8_t>(b)));
}

}  // namespace

uint32_t superfasthash(const uint8_t* data, size_t len) noexcept {
    if (data == nullptr || len == 0) return 0;

    uint32_t hash = static_cast<uint32_t>(len);
    size_t rem = len & 3u;
    len >>= 2;

    for (; len > 0; len--) {
        hash += get16(data);
        uint32_t tmp = (get16(data + 2) << 11) ^ hash;
        hash = (hash << 16) ^ tmp;
        data += 4;
        hash += hash >> 11;
    }

    switch (rem) {
        case 3:
            hash += get16(data);
            hash ^= hash << 16;
            hash ^= sext8(data[2]) << 18;
            hash += hash >> 11;
            break;
        case 2:
            hash += get16(data);
            hash ^= hash << 11;
            hash += hash >> 17;
            break;
        case 1:
            hash += sext8(data[0]);
            hash ^= hash << 10;
            hash += hash >> 1;
            break;
    }

    hash ^= hash << 3;
    hash += hash >> 5;
    hash ^= hash << 4;
    hash += hash >> 17;
    hash ^= hash << 25;
    hash += hash >> 6;

    return hash;
}

}  // namespace caram
