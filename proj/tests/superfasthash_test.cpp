#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "caram/superfasthash.hpp"

using caram::superfasthash;

// Independent transcription of Paul Hsieh's published routine, kept
// deliberately separate from the library version so the two can only
// agree by both being right. 16-bit loads are little-endian; the 1- and
// 3-byte tails go through signed char like the original's (signed char)
// cast on a default-signed platform.
static uint32_t reference_sfh(const std::vector<uint8_t>& data) {
    uint32_t len = static_cast<uint32_t>(data.size());
    uint32_t hash = len;
    if (len == 0) return 0;
    const uint8_t* p = data.data();
    auto get16 = [](const uint8_t* q) -> uint32_t {
        return static_cast<uint32_t>(q[0]) | (static_cast<uint32_t>(q[1]) << 8);
    };
    uint32_t rem = len & 3;
    for (uint32_t i = 0; i < len / 4; i++) {
        hash += get16(p);
        uint32_t tmp = (get16(p + 2) << 11) ^ hash;
        hash = (hash << 16) ^ tmp;
        p += 4;
        hash += hash >> 11;
    }
    switch (rem) {
        case 3:
            hash += get16(p);
            hash ^= hash << 16;
            hash ^= static_cast<uint32_t>(static_cast<int8_t>(p[2])) << 18;
            hash += hash >> 11;
            break;
        case 2:
            hash += get16(p);
            hash ^= hash << 11;
            hash += hash >> 17;
            break;
        case 1:
            hash += static_cast<uint32_t>(static_cast<int8_t>(p[0]));
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

TEST_CASE("frozen string goldens") {
    CHECK(superfasthash("") == 0x00000000u);
    CHECK(superfasthash("a") == 0x115ea782u);
    CHECK(superfasthash("ab") == 0x516b8b44u);
    CHECK(superfasthash("abc") == 0xd2be198au);
    CHECK(superfasthash("abcd") == 0xdad8b8dbu);
    CHECK(superfasthash("hello world") == 0xa68c6882u);
    CHECK(superfasthash("The quick brown fox jumps over the lazy dog") == 0x05bf7ce3u);
}

TEST_CASE("high-bit tails use signed widening") {
    // 0xff as the 1-byte tail enters the mix as -1; for a length-1 input
    // that cancels the length seed and the avalanche of 0 stays 0.
    std::vector<uint8_t> ff{0xff};
    CHECK(superfasthash(ff.data(), ff.size()) == 0x00000000u);
    std::vector<uint8_t> mixed{0x01, 0x02, 0xff};
    CHECK(superfasthash(mixed.data(), mixed.size()) == 0x994a9cb8u);
}

TEST_CASE("frozen 256-byte line goldens") {
    std::vector<uint8_t> ramp(256);
    for (size_t i = 0; i < ramp.size(); i++) ramp[i] = static_cast<uint8_t>(i);
    CHECK(superfasthash(ramp.data(), ramp.size()) == 0xe4eef917u);
    std::vector<uint8_t> zeros(256, 0);
    CHECK(superfasthash(zeros.data(), zeros.size()) == 0xbc3fb0f0u);
}

TEST_CASE("matches the reference transcription on random buffers") {
    std::mt19937 rng(20240813u);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int round = 0; round < 1000; round++) {
        size_t len = static_cast<size_t>(rng() % 301);
        std::vector<uint8_t> buf(len);
        for (auto& b : buf) b = static_cast<uint8_t>(byte(rng));
        CAPTURE(round);
        CAPTURE(len);
        REQUIRE(superfasthash(buf.data(), buf.size()) == reference_sfh(buf));
    }
}

TEST_CASE("every length and alignment up to 67 bytes agrees") {
    std::vector<uint8_t> base(80);
    for (size_t i = 0; i < base.size(); i++) base[i] = static_cast<uint8_t>(i * 37 + 11);
    for (size_t len = 0; len <= 67; len++) {
        std::vector<uint8_t> buf(base.begin(), base.begin() + static_cast<long>(len));
        CAPTURE(len);
        REQUIRE(superfasthash(buf.data(), buf.size()) == reference_sfh(buf));
    }
}
