#ifndef CARAM_TRACE_HPP
#define CARAM_TRACE_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "caram/types.hpp"

namespace caram::trace {

// One 4KB-block I/O taken from a trace. block_hash is the content
// fingerprint of the whole block (for FIU input, the leading 4 bytes of
// the per-block MD5 column).
struct TraceRecord {
    uint64_t timestamp_ns = 0;
    uint32_t device_id = 0;
    uint64_t block_lba = 0;
    uint32_t block_count = 1;
    IoOp op = IoOp::Read;
    uint32_t block_hash = 0;

    bool operator==(const TraceRecord&) const = default;
};

// One line-granularity request as consumed by the controller.
struct LineRequest {
    Cycle arrival_cycle = 0;
    Lla lla = 0;
    IoOp op = IoOp::Read;
    Lfp lfp = 0;
    LinePayload payload;  // null unless the trace carries contents
};

struct ParseStats {
    uint64_t input_lines = 0;    // text lines seen (FIU only)
    uint64_t skipped_lines = 0;  // malformed text lines (FIU only)
    uint64_t records = 0;        // records produced
};

// Text parser for the FIU block-trace layout:
//   timestamp pid process lba size_bytes op(W|R) major minor md5
// A record spanning N blocks is split into N single-block TraceRecords
// sharing the block hash. Lines that fail to parse are skipped and
// counted; if more than 1% of input lines are malformed the whole parse
// fails with the line number of the first bad line.
std::vector<TraceRecord> parse_fiu(std::istream& in, ParseStats* stats = nullptr);

// Reads a trace file. FIU text may be gzip-compressed (detected by magic),
// the native format never is.
enum class TraceFormat { Fiu, Native };
std::vector<TraceRecord> load_trace(const std::string& path, TraceFormat format,
                                    ParseStats* stats = nullptr);

// Native binary trace codec. parse(serialize(v)) == v for any record
// vector, including block_count > 1; no normalization is applied.
std::string serialize_native(std::span<const TraceRecord> records);
std::vector<TraceRecord> parse_native(std::string_view bytes, ParseStats* stats = nullptr);
void save_native(const std::string& path, std::span<const TraceRecord> records);

struct ExpandOptions {
    // Fingerprinting a line before writing costs hash_cycles_per_line,
    // added to the write's arrival (the device ops start after the hash).
    Cycle hash_cycles_per_line = 256;
    // Trace timestamps are nanoseconds; controller time is cycles.
    double cycles_per_ns = 1.0;
};

// Splits block records into per-line requests: block_count * 16 lines,
// consecutive llas, every line of one block carrying the block hash as
// its fingerprint.
std::vector<LineRequest> expand_to_lines(std::span<const TraceRecord> records,
                                         const ExpandOptions& opt = {});

struct SyntheticSpec {
    uint64_t total_lines = 0;        // reads + writes emitted
    double unique_fraction = 1.0;    // distinct fingerprints / writes
    double read_fraction = 0.0;
    uint64_t address_space_lines = 0;
    uint64_t rng_seed = 1;
    bool with_payload = false;

    void validate() const;  // throws ValidationError
};

// Deterministic synthetic workload. Guarantees, given writes
// W = total - round(read_fraction * total), U = ceil(unique_fraction * W),
// A = min(address_space_lines, W):
//   - exactly U distinct fingerprint values among the W writes;
//   - when A >= U (+1 if overwrites are needed), exactly A distinct
//     write addresses and no fingerprint ever loses its last holder, so
//     a deduplicating store writes exactly U lines and keeps U live;
//   - reads target previously written addresses;
//   - identical spec -> identical request sequence.
// With payloads enabled every fingerprint is the hash of its payload and
// the U contents are generated to have U distinct hashes.
std::vector<LineRequest> generate_synthetic(const SyntheticSpec& spec);

// Removes idle time: every request arrives at cycle zero so the
// controller issues them back to back, preserving order and mix.
void stress_mode_transform(std::vector<LineRequest>& requests);

// Workload shape measured from a trace (block granularity).
struct TraceSummary {
    uint64_t read_blocks = 0;
    uint64_t write_blocks = 0;
    uint64_t unique_read_hashes = 0;
    uint64_t unique_write_hashes = 0;
};
TraceSummary summarize(std::span<const TraceRecord> records);

// Line-granularity counts, used to check generated workloads.
struct LineSummary {
    uint64_t reads = 0;
    uint64_t writes = 0;
    uint64_t distinct_write_lfps = 0;
    uint64_t distinct_write_llas = 0;
};
LineSummary summarize_lines(std::span<const LineRequest> requests);

}  // namespace caram::trace

#endif
