#ifndef CARAM_TYPES_HPP
#define CARAM_TYPES_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

namespace caram {

// Address and fingerprint widths follow the metadata entry layout:
// 4B logical line address, 4B physical line address, 4B fingerprint.
using Lla = uint32_t;
using Pla = uint32_t;
using Lfp = uint32_t;
using Cycle = uint64_t;

inline constexpr uint32_t kLineBytes = 256;
inline constexpr uint32_t kBlockBytes = 4096;
inline constexpr uint32_t kLinesPerBlock = kBlockBytes / kLineBytes;  // 16

enum class IoOp : uint8_t { Read = 0, Write = 1 };

using LineData = std::array<uint8_t, kLineBytes>;
// Payloads are shared so requests stay cheap to copy; only synthetic
// traces generated with payloads carry one.
using LinePayload = std::shared_ptr<const LineData>;

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user input: malformed config, infeasible spec, out-of-range value.
struct ValidationError : SimError {
    using SimError::SimError;
};

// Malformed trace or snapshot stream.
struct FormatError : SimError {
    using SimError::SimError;
};

// Memory exhausted and eviction could not free enough space.
struct CapacityError : SimError {
    using SimError::SimError;
};

// Internal contract breach (caller bug or engine bug), not bad input.
struct InvariantError : SimError {
    using SimError::SimError;
};

}  // namespace caram

#endif
