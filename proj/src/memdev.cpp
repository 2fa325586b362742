#include "caram/memdev.hpp"

#include <bit>
#include <cmath>
#include <numeric>

namespace caram::mem {

void DeviceTiming::validate() const {
    if (num_rows == 0 || device_width_bits == 0 || banks_per_rank == 0 || ranks == 0 ||
        lines_per_row == 0) {
        throw ValidationError("device geometry fields must be positive: " + name);
    }
    if (t_ras == 0 || t_rcd == 0 || t_rc == 0 || t_rp == 0 || burst_cycles_per_line == 0 ||
        metadata_burst_cycles == 0) {
        throw ValidationError("device timing fields must be at least 1 cycle: " + name);
    }
    // t_rc >= t_ras + t_rp is deliberately not required; the calibrated
    // parameter set violates it and is used verbatim.
    if (write_multiplier < 1.0) {
        throw ValidationError("write_multiplier must be at least 1: " + name);
    }
}

DeviceTiming DeviceTiming::scaled_to_bytes(uint64_t bytes) const {
    DeviceTiming t = *this;
    const uint64_t row_bytes = static_cast<uint64_t>(lines_per_row) * kLineBytes;
    const uint64_t bank_rows = static_cast<uint64_t>(banks_per_rank) * row_bytes;
    if (bytes == 0 || bytes % bank_rows != 0) {
        throw ValidationError(name + ": capacity must be a multiple of " +
                              std::to_string(bank_rows) + " bytes (one row per bank)");
    }
    // Small capacities shrink the row count of a single rank; larger ones
    // keep the full row count and add ranks.
    t.ranks = 1;
    uint64_t rank_bytes = t.bytes_total();
    if (bytes % rank_bytes == 0) {
        uint64_t ranks = bytes / rank_bytes;
        if (ranks > 0xffffffffu) throw ValidationError(name + ": capacity too large");
        t.ranks = static_cast<uint32_t>(ranks);
        return t;
    }
    if (bytes < rank_bytes) {
        t.num_rows = static_cast<uint32_t>(bytes / bank_rows);
        return t;
    }
    throw ValidationError(name + ": capacity above one rank must be a multiple of the " +
                          std::to_string(rank_bytes) + "-byte rank size");
}

TimingPreset timing_preset(const std::string& name) {
    DeviceTiming dram;
    dram.device_class = DeviceClass::Dram;
    dram.num_rows = 8192;
    dram.device_width_bits = 16;
    dram.write_multiplier = 1.0;

    DeviceTiming pcm;
    pcm.device_class = DeviceClass::Pcm;
    pcm.num_rows = 32768;
    pcm.device_width_bits = 8;
    pcm.write_multiplier = 4.0;

    if (name == "table1") {
        dram.name = "table1-dram";
        dram.t_ras = 36;
        dram.t_rcd = 22;
        dram.t_rc = 96;
        dram.t_rp = 60;
        pcm.name = "table1-pcm";
        pcm.t_ras = 15;
        pcm.t_rcd = 5;
        pcm.t_rc = 20;
        pcm.t_rp = 5;
    } else if (name == "realistic") {
        // Conventional magnitudes (DRAM fast, PCM slow); same geometry
        // as table1 so capacities stay compatible.
        dram.name = "realistic-dram";
        dram.t_ras = 32;
        dram.t_rcd = 14;
        dram.t_rc = 46;
        dram.t_rp = 14;
        pcm.name = "realistic-pcm";
        pcm.t_ras = 120;
        pcm.t_rcd = 55;
        pcm.t_rc = 180;
        pcm.t_rp = 60;
        pcm.write_multiplier = 8.0;
    } else {
        throw ValidationError("unknown timing preset '" + name + "' (have: table1, realistic)");
    }
    dram.validate();
    pcm.validate();
    return TimingPreset{dram, pcm};
}

std::vector<std::string> timing_preset_names() { return {"table1", "realistic"}; }

ChannelModel::ChannelModel(DeviceTiming timing, bool keep_event_log)
    : timing_(std::move(timing)), keep_event_log_(keep_event_log) {
    timing_.validate();
    banks_.resize(static_cast<size_t>(timing_.ranks) * timing_.banks_per_rank);
    row_writes_.assign(banks_.size() * timing_.num_rows, 0);
}

LineLocation ChannelModel::decode(Pla line_index) const {
    if (line_index >= timing_.lines_total()) {
        throw InvariantError(timing_.name + ": line index out of range");
    }
    LineLocation loc;
    loc.column = line_index % timing_.lines_per_row;
    uint64_t row_linear = line_index / timing_.lines_per_row;
    loc.row = static_cast<uint32_t>(row_linear % timing_.num_rows);
    uint64_t bank_linear = row_linear / timing_.num_rows;
    loc.bank = static_cast<uint32_t>(bank_linear % timing_.banks_per_rank);
    loc.rank = static_cast<uint32_t>(bank_linear / timing_.banks_per_rank);
    return loc;
}

Pla ChannelModel::encode(const LineLocation& loc) const {
    uint64_t bank_linear = static_cast<uint64_t>(loc.rank) * timing_.banks_per_rank + loc.bank;
    uint64_t row_linear = bank_linear * timing_.num_rows + loc.row;
    return static_cast<Pla>(row_linear * timing_.lines_per_row + loc.column);
}

Cycle ChannelModel::burst_for(AccessKind kind) const {
    switch (kind) {
        case AccessKind::LineRead:
        case AccessKind::CompareRead:
            return timing_.burst_cycles_per_line;
        case AccessKind::LineWrite:
            return static_cast<Cycle>(std::llround(
                static_cast<double>(timing_.burst_cycles_per_line) * timing_.write_multiplier));
        case AccessKind::MetadataRead:
            return timing_.metadata_burst_cycles;
        case AccessKind::MetadataWrite:
            return static_cast<Cycle>(std::llround(
                static_cast<double>(timing_.metadata_burst_cycles) * timing_.write_multiplier));
    }
    throw InvariantError("bad access kind");
}

Cycle ChannelModel::bank_free_at(Pla line_index) const {
    LineLocation loc = decode(line_index);
    return banks_[static_cast<size_t>(loc.rank) * timing_.banks_per_rank + loc.bank].busy_until;
}

DeviceOp ChannelModel::service(AccessKind kind, Pla line_index, Cycle issue) {
    LineLocation loc = decode(line_index);
    size_t bank_id = static_cast<size_t>(loc.rank) * timing_.banks_per_rank + loc.bank;
    BankState& bank = banks_[bank_id];

    Cycle start = std::max(issue, bank.busy_until);
    Cycle data_start = 0;
    bool row_hit = false;
    uint8_t activations = 0;
    uint8_t precharges = 0;

    if (bank.open_row.has_value() && *bank.open_row == loc.row) {
        row_hit = true;
        data_start = start;
    } else if (!bank.open_row.has_value()) {
        Cycle act = start;
        if (bank.activated_once) act = std::max(act, bank.last_activate + timing_.t_rc);
        data_start = act + timing_.t_rcd;
        bank.last_activate = act;
        bank.activated_once = true;
        activations = 1;
    } else {
        // The open row must have been active for t_ras before precharge,
        // and the new activate must respect t_rc.
        Cycle pre = start;
        if (bank.activated_once) pre = std::max(pre, bank.last_activate + timing_.t_ras);
        Cycle act = pre + timing_.t_rp;
        if (bank.activated_once) act = std::max(act, bank.last_activate + timing_.t_rc);
        data_start = act + timing_.t_rcd;
        bank.last_activate = act;
        bank.activated_once = true;
        activations = 1;
        precharges = 1;
    }

    Cycle complete = data_start + burst_for(kind);
    bank.open_row = loc.row;
    bank.busy_until = complete;

    switch (kind) {
        case AccessKind::LineRead: counters_.line_reads++; break;
        case AccessKind::LineWrite: counters_.line_writes++; break;
        case AccessKind::CompareRead: counters_.compare_reads++; break;
        case AccessKind::MetadataRead: counters_.metadata_reads++; break;
        case AccessKind::MetadataWrite: counters_.metadata_writes++; break;
    }
    counters_.activations += activations;
    counters_.precharges += precharges;
    if (row_hit) {
        counters_.row_hits++;
    } else {
        counters_.row_misses++;
    }
    counters_.busy_cycles += complete - start;
    if (kind == AccessKind::LineWrite) {
        row_writes_[bank_id * timing_.num_rows + loc.row]++;
    }

    DeviceOp op{kind, line_index, issue, start, complete, row_hit, activations, precharges};
    if (keep_event_log_) event_log_.push_back(op);
    return op;
}

RegionAllocator::RegionAllocator(uint64_t total_lines, uint32_t lines_per_row,
                                 uint32_t granule_lines, uint64_t row_stride)
    : total_lines_(total_lines), granule_(granule_lines), lines_per_row_(lines_per_row) {
    if (granule_lines == 0 || lines_per_row == 0 || lines_per_row % granule_lines != 0) {
        throw ValidationError("allocation granule must divide the row size");
    }
    granules_per_row_ = lines_per_row / granule_lines;
    if (granules_per_row_ > 64) {
        throw ValidationError("row free mask limited to 64 granules per row");
    }
    if (total_lines == 0 || total_lines % granule_lines != 0) {
        throw ValidationError("region size must be a positive multiple of the granule");
    }
    total_granules_ = total_lines / granule_lines;
    uint64_t lines_per_row64 = lines_per_row;
    uint64_t rows = (total_lines + lines_per_row64 - 1) / lines_per_row64;
    row_free_mask_.resize(rows);
    row_free_count_.resize(rows);
    for (uint64_t r = 0; r < rows; r++) {
        uint64_t first_line = r * lines_per_row64;
        uint64_t lines_here = std::min<uint64_t>(lines_per_row64, total_lines - first_line);
        uint32_t granules_here = static_cast<uint32_t>(lines_here / granule_lines);
        row_free_mask_[r] =
            granules_here == 64 ? ~0ull : ((1ull << granules_here) - 1);
        row_free_count_[r] = granules_here;
    }
    row_stride_ = std::max<uint64_t>(1, row_stride % rows == 0 ? 1 : row_stride % rows);
    while (std::gcd(row_stride_, rows) != 1) row_stride_++;
}

std::optional<Pla> RegionAllocator::allocate() {
    uint64_t rows = row_free_mask_.size();
    for (uint64_t scanned = 0; scanned < rows; scanned++) {
        uint64_t r = (row_cursor_ + scanned * row_stride_) % rows;
        if (row_free_count_[r] == 0) continue;
        uint32_t bit = static_cast<uint32_t>(std::countr_zero(row_free_mask_[r]));
        row_free_mask_[r] &= row_free_mask_[r] - 1;
        row_free_count_[r]--;
        live_granules_++;
        row_cursor_ = (r + row_stride_) % rows;  // next allocation strides on
        return static_cast<Pla>(r * lines_per_row_ + static_cast<uint64_t>(bit) * granule_);
    }
    return std::nullopt;
}

void RegionAllocator::free(Pla first_line) {
    if (first_line % granule_ != 0 || first_line >= total_lines_) {
        throw InvariantError("freeing a misaligned or out-of-range line");
    }
    uint64_t r = first_line / lines_per_row_;
    uint32_t bit = (first_line % lines_per_row_) / granule_;
    uint64_t mask = 1ull << bit;
    if (row_free_mask_[r] & mask) throw InvariantError("double free of a line");
    row_free_mask_[r] |= mask;
    row_free_count_[r]++;
    live_granules_--;
}

bool RegionAllocator::is_allocated(Pla first_line) const {
    if (first_line % granule_ != 0 || first_line >= total_lines_) return false;
    uint64_t r = first_line / lines_per_row_;
    uint32_t bit = (first_line % lines_per_row_) / granule_;
    return (row_free_mask_[r] & (1ull << bit)) == 0;
}

}  // namespace caram::mem
