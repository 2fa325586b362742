#ifndef CARAM_CONTROLLER_HPP
#define CARAM_CONTROLLER_HPP

#include <cstdint>
#include <deque>
#include <list>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "caram/dedup.hpp"
#include "caram/energy.hpp"
#include "caram/memdev.hpp"
#include "caram/trace.hpp"
#include "caram/types.hpp"

namespace caram::ctrl {

enum class ArchKind : uint8_t { PureDram, PurePcm, Hybrid, Caram };

std::string arch_kind_name(ArchKind k);

enum class MetadataPort : uint8_t { Contending, Separate };
enum class EvictionPolicy : uint8_t { Lru, Clock };

struct ArchitectureConfig {
    std::string name;
    ArchKind kind = ArchKind::Hybrid;
    uint64_t dram_bytes = 0;
    uint64_t pcm_bytes = 0;
    // Staging for PCM-bound writes, carved from DRAM. Only meaningful
    // when both devices exist.
    uint64_t write_buffer_bytes = 0;
    double buffer_hi_watermark = 0.9;
    double buffer_lo_watermark = 0.1;
    // Dedup index region, carved from DRAM; 0 = sized automatically for
    // the full dram+pcm capacity.
    uint64_t metadata_region_bytes = 0;
    MetadataPort metadata_port = MetadataPort::Contending;
    EvictionPolicy eviction = EvictionPolicy::Lru;
    uint32_t queue_depth = 64;
    Cycle hot_epoch_cycles = 1'000'000;
    uint32_t hot_write_threshold = 2;  // 0 disables heat routing
    Cycle swap_cycles = 10'000;

    uint64_t total_bytes() const { return dram_bytes + pcm_bytes; }
    // Fills in the automatic metadata size, checks region fit and row
    // alignment against the given timings. Throws ValidationError.
    void finalize(const mem::TimingPreset& timing);
};

// Named architectures. The full-size set ("pure-dram", "pure-pcm",
// "hybrid", "caram") follows the equal-cost comparison sizing; the
// "cal-" variants are shrunk so million-line synthetic runs exercise
// a meaningful fraction of the space.
ArchitectureConfig arch_preset(const std::string& name);
std::vector<std::string> arch_preset_names();

// Page residency with a pluggable victim policy. The cache has no size
// limit of its own; the owner evicts when allocation fails.
class PageCache {
public:
    explicit PageCache(EvictionPolicy policy);

    bool resident(uint64_t page) const;
    void touch(uint64_t page);   // record a use; inserts if absent
    void erase(uint64_t page);
    // Least-attractive resident page under the policy, never `exclude`.
    std::optional<uint64_t> pick_victim(std::optional<uint64_t> exclude);
    size_t size() const { return lru_pos_.size() + clock_pos_.size(); }

private:
    EvictionPolicy policy_;
    // LRU: list front is the coldest page.
    std::list<uint64_t> lru_;
    std::unordered_map<uint64_t, std::list<uint64_t>::iterator> lru_pos_;
    // CLOCK: ring slots with reference bits; erased pages leave
    // tombstones that compaction sweeps out.
    struct ClockSlot {
        uint64_t page;
        bool referenced;
        bool dead;
    };
    std::vector<ClockSlot> ring_;
    std::unordered_map<uint64_t, size_t> clock_pos_;
    size_t hand_ = 0;
    size_t dead_slots_ = 0;
    void compact_ring();
};

struct BufferStats {
    uint64_t lines_enqueued = 0;
    uint64_t lines_drained = 0;  // episode and flush drains together
    uint64_t drain_episodes = 0;
    uint64_t full_stalls = 0;
    uint64_t pre_flush_occupancy_lines = 0;  // staged lines when the trace ended
    uint64_t final_occupancy_lines = 0;      // after the closing flush
};

struct EvictionStats {
    uint64_t pages_evicted = 0;
    uint64_t llas_evicted = 0;
    uint64_t read_misses = 0;
    Cycle swap_cycles_charged = 0;
};

struct WearSummary {
    uint64_t rows = 0;
    uint32_t min_writes = 0;
    uint32_t max_writes = 0;
    double mean_writes = 0.0;
};

struct RunConfig {
    ArchitectureConfig arch;
    mem::TimingPreset timing;
    energy::EnergyConstants energy;
    bool stress_mode = false;     // ignore arrival gaps: issue back to back
    bool keep_event_log = false;  // per-op records; large traces should not
    bool charge_metadata = true;  // count the index region as occupied space
};

struct RunResult {
    std::string arch_name;
    ArchKind kind = ArchKind::Hybrid;
    Cycle total_cycles = 0;
    uint64_t read_requests = 0;
    uint64_t write_requests = 0;

    dedup::DedupStats dedup;       // zeros for non-dedup architectures
    uint64_t device_line_writes = 0;  // writes landing in mapped space
    uint64_t live_lines = 0;
    uint64_t metadata_bytes = 0;   // charged metadata region (0 if not charged)
    uint64_t usable_bytes = 0;     // capacity minus carve-outs
    uint64_t capacity_bytes = 0;
    double occupation_ratio = 0.0;
    double bandwidth_bytes_per_cycle = 0.0;

    mem::ChannelCounters dram;
    mem::ChannelCounters pcm;
    mem::ChannelCounters metadata_port;  // used when the port is separate
    uint64_t dram_banks = 0;
    uint64_t pcm_banks = 0;

    BufferStats buffer;
    EvictionStats evictions;
    WearSummary pcm_wear;
    energy::EnergyBreakdown energy;

    RunConfig config;
};

// Drives one trace through one architecture. Requests are admitted in
// order with at most queue_depth in flight; each request's device
// operations run as a dependency chain across the channels.
class Controller {
public:
    explicit Controller(RunConfig config);

    void process(const trace::LineRequest& req);
    void finish();  // flush the write buffer; call once, after the trace

    RunResult result() const;

    const mem::ChannelModel* dram_channel() const { return dram_ ? &*dram_ : nullptr; }
    const mem::ChannelModel* pcm_channel() const { return pcm_ ? &*pcm_ : nullptr; }
    const dedup::DedupEngine* engine() const { return engine_ ? &*engine_ : nullptr; }
    const BufferStats& buffer_stats() const { return buffer_stats_; }

private:
    struct BufferedLine {
        Pla dest_pla;  // global address the line will drain to
        uint64_t slot;
        Cycle enqueued_at;
    };

    RunConfig cfg_;
    std::optional<mem::ChannelModel> dram_;
    std::optional<mem::ChannelModel> pcm_;
    std::optional<dedup::DedupEngine> engine_;
    std::optional<mem::RegionAllocator> dram_alloc_;  // mapped region
    std::optional<mem::RegionAllocator> pcm_alloc_;
    PageCache cache_;

    // DRAM-local line index bounds of the carved regions.
    uint64_t meta_lines_ = 0;
    uint64_t amt_lines_ = 0;  // leading slice of the metadata region
    uint64_t buffer_base_ = 0;
    uint64_t buffer_lines_ = 0;
    uint64_t mapped_base_ = 0;   // DRAM mapped region start
    uint64_t dram_lines_ = 0;    // global PLA boundary: >= means PCM

    // Write buffer state. A staged line is readable from its slot until
    // its drain completes; kNeverDrained marks entries not yet scheduled.
    static constexpr Cycle kNeverDrained = ~Cycle{0};
    std::deque<BufferedLine> pending_;
    std::vector<uint64_t> free_slots_;  // LIFO of reusable slot ids
    uint64_t next_fresh_slot_ = 0;
    std::priority_queue<std::pair<Cycle, uint64_t>, std::vector<std::pair<Cycle, uint64_t>>,
                        std::greater<>>
        draining_;  // (completion, slot)
    std::unordered_map<Pla, Cycle> buffer_resident_;  // dest -> drain completion
    std::unordered_map<Pla, uint64_t> slot_of_;       // dest -> buffer slot
    uint64_t buffered_live_ = 0;  // pending + scheduled, occupying slots

    // Hot-page detection (shared address space, page granularity).
    struct PageHeat {
        Cycle epoch = 0;
        uint32_t writes = 0;
    };
    std::unordered_map<uint64_t, PageHeat> heat_;
    std::unordered_map<uint64_t, uint16_t> caram_page_mask_;  // mapped llas per page
    std::unordered_map<uint64_t, Pla> frame_of_page_;         // non-dedup placement

    std::vector<Cycle> completion_ring_;
    size_t ring_next_ = 0;

    mem::ChannelCounters port_counters_;
    BufferStats buffer_stats_;
    EvictionStats evict_stats_;
    uint64_t device_line_writes_ = 0;
    uint64_t read_requests_ = 0;
    uint64_t write_requests_ = 0;
    Cycle makespan_ = 0;
    bool finished_ = false;

    bool is_dram_pla(Pla pla) const { return pla < dram_lines_; }
    mem::ChannelModel& channel_of(Pla pla);
    Pla device_local(Pla pla) const;
    Cycle book(mem::ChannelModel& ch, mem::AccessKind kind, Pla local_line, Cycle issue);
    Cycle book_metadata(const dedup::MemOp& op, Cycle issue);
    Cycle drain_one(Cycle issue);                   // oldest pending line
    Cycle maybe_drain_episode(Cycle now);
    Cycle enqueue_buffered_write(Pla dest, Cycle now);
    Cycle write_line(Pla dest, Cycle now);          // routes direct vs buffered
    Cycle read_line(Pla pla, Cycle now, bool compare);
    bool page_is_hot(uint64_t page, Cycle now);
    void note_page_write(uint64_t page, Cycle now);
    std::optional<Pla> allocate_line(bool prefer_dram);
    std::optional<Pla> allocate_frame(bool prefer_dram);
    Cycle evict_for_space(uint64_t current_page, Cycle now);
    void free_line(Pla pla);
    Cycle process_write(const trace::LineRequest& req, Cycle admit);
    Cycle process_read(const trace::LineRequest& req, Cycle admit);
    void bump_makespan(Cycle c) {
        if (c > makespan_) makespan_ = c;
    }
};

// Convenience: construct, replay, finish, report.
RunResult simulate(const RunConfig& config, const std::vector<trace::LineRequest>& requests);

}  // namespace caram::ctrl

#endif
