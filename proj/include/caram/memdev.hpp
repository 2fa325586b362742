#ifndef CARAM_MEMDEV_HPP
#define CARAM_MEMDEV_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "caram/types.hpp"

namespace caram::mem {

enum class DeviceClass : uint8_t { Dram, Pcm };

struct DeviceTiming {
    std::string name;
    DeviceClass device_class = DeviceClass::Dram;

    uint32_t num_rows = 0;
    uint32_t device_width_bits = 0;
    Cycle t_ras = 0;
    Cycle t_rcd = 0;
    Cycle t_rc = 0;
    Cycle t_rp = 0;

    // Writes take this multiple of the read burst occupancy.
    double write_multiplier = 1.0;

    // 256B line over a 64-bit channel: 32 transfers.
    Cycle burst_cycles_per_line = 32;
    // Metadata entries move in a short burst.
    Cycle metadata_burst_cycles = 8;

    uint32_t banks_per_rank = 8;
    uint32_t ranks = 1;
    uint32_t lines_per_row = 32;  // 8KB rows at the 256B line size

    uint64_t lines_total() const {
        return static_cast<uint64_t>(ranks) * banks_per_rank * num_rows * lines_per_row;
    }
    uint64_t bytes_total() const { return lines_total() * kLineBytes; }

    void validate() const;  // throws ValidationError

    // Same per-bank timing resized to hold the given capacity: whole
    // multiples of the rank size grow ranks, smaller capacities trim the
    // row count instead. The capacity must be a whole number of rows per
    // bank either way.
    DeviceTiming scaled_to_bytes(uint64_t bytes) const;
};

struct TimingPreset {
    DeviceTiming dram;
    DeviceTiming pcm;
};

// Named presets: "table1" carries the evaluation parameters this model
// is calibrated against (loaded verbatim, including the DRAM row's
// counterintuitive cycle counts), "realistic" a conventional set.
TimingPreset timing_preset(const std::string& name);
std::vector<std::string> timing_preset_names();

struct LineLocation {
    uint32_t rank, bank, row, column;
};

enum class AccessKind : uint8_t {
    LineRead,
    LineWrite,
    CompareRead,  // read timing, tracked separately
    MetadataRead,
    MetadataWrite,
};

// One serviced access, for the event log.
struct DeviceOp {
    AccessKind kind;
    Pla line_index;  // device-local
    Cycle issue;     // when the controller presented it
    Cycle start;     // when the bank took it
    Cycle complete;
    bool row_hit;
    uint8_t activations;  // 0 or 1
    uint8_t precharges;   // 0 or 1
};

struct ChannelCounters {
    uint64_t line_reads = 0;
    uint64_t line_writes = 0;
    uint64_t compare_reads = 0;
    uint64_t metadata_reads = 0;
    uint64_t metadata_writes = 0;
    uint64_t activations = 0;
    uint64_t precharges = 0;
    uint64_t row_hits = 0;
    uint64_t row_misses = 0;
    uint64_t busy_cycles = 0;  // bank-occupancy cycles, summed over banks
};

// Cycle-level model of one memory channel with open-row banks. Each
// access occupies its bank exclusively: row hits pay the data burst,
// misses add activation (and precharge when another row is open), and
// tRC spaces consecutive activations. The channel keeps per-bank state
// only; ordering across banks is the caller's concern.
class ChannelModel {
public:
    explicit ChannelModel(DeviceTiming timing, bool keep_event_log = false);

    // Services one access no earlier than `issue`, returns its op record.
    DeviceOp service(AccessKind kind, Pla line_index, Cycle issue);

    // When the bank holding this line could next start an access.
    Cycle bank_free_at(Pla line_index) const;

    LineLocation decode(Pla line_index) const;
    Pla encode(const LineLocation& loc) const;

    const DeviceTiming& timing() const { return timing_; }
    const ChannelCounters& counters() const { return counters_; }
    const std::vector<DeviceOp>& event_log() const { return event_log_; }

    // Line writes per row, indexed by global row id; the wear-leveling
    // evidence for write-limited parts.
    const std::vector<uint32_t>& row_write_counts() const { return row_writes_; }

private:
    struct BankState {
        Cycle busy_until = 0;
        Cycle last_activate = 0;
        bool activated_once = false;
        std::optional<uint32_t> open_row;
    };

    DeviceTiming timing_;
    std::vector<BankState> banks_;
    std::vector<uint32_t> row_writes_;
    ChannelCounters counters_;
    std::vector<DeviceOp> event_log_;
    bool keep_event_log_;

    Cycle burst_for(AccessKind kind) const;
};

// Free-line bookkeeping over a contiguous index range, handing lines out
// in granule-sized units (1 line, or 16 for page frames). Successive
// allocations rotate across rows so writes spread evenly; row_stride sets
// the rotation step. Pass the device's rows-per-bank so back-to-back
// allocations land in different banks and drains overlap instead of
// queueing behind one bank. The stride is nudged up to the next value
// coprime with the row count, so the walk still visits every row.
class RegionAllocator {
public:
    RegionAllocator(uint64_t total_lines, uint32_t lines_per_row, uint32_t granule_lines,
                    uint64_t row_stride = 1);

    std::optional<Pla> allocate();
    void free(Pla first_line);
    bool is_allocated(Pla first_line) const;

    uint64_t total_lines() const { return total_lines_; }
    uint64_t live_lines() const { return live_granules_ * granule_; }
    uint64_t free_granules() const { return total_granules_ - live_granules_; }

private:
    uint64_t total_lines_;
    uint32_t granule_;
    uint32_t lines_per_row_;
    uint32_t granules_per_row_;
    uint64_t total_granules_;
    uint64_t live_granules_ = 0;
    uint64_t row_cursor_ = 0;
    uint64_t row_stride_ = 1;
    std::vector<uint64_t> row_free_mask_;  // bit set = granule free
    std::vector<uint64_t> row_free_count_;
};

}  // namespace caram::mem

#endif
