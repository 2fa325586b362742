#include "caram/controller.hpp"

#include <algorithm>
#include <cmath>

namespace caram::ctrl {

std::string arch_kind_name(ArchKind k) {
    switch (k) {
        case ArchKind::PureDram: return "pure-dram";
        case ArchKind::PurePcm: return "pure-pcm";
        case ArchKind::Hybrid: return "hybrid";
        case ArchKind::Caram: return "caram";
    }
    return "?";
}

void ArchitectureConfig::finalize(const mem::TimingPreset& timing) {
    const bool wants_dram = kind != ArchKind::PurePcm;
    const bool wants_pcm = kind != ArchKind::PureDram;
    if (wants_dram != (dram_bytes > 0) || wants_pcm != (pcm_bytes > 0)) {
        throw ValidationError(name + ": capacities do not match the architecture kind");
    }
    if (kind != ArchKind::Caram && metadata_region_bytes != 0) {
        throw ValidationError(name + ": only the dedup architecture carries a metadata region");
    }
    if (write_buffer_bytes != 0 && (dram_bytes == 0 || pcm_bytes == 0)) {
        throw ValidationError(name + ": the write buffer stages PCM writes in DRAM; it needs both devices");
    }
    if (kind == ArchKind::Caram) {
        if (metadata_region_bytes == 0) {
            metadata_region_bytes = dedup::metadata_budget(total_bytes()).total_bytes();
        }
        // The region must index every line the mapped space can hold.
        const uint64_t carved = write_buffer_bytes + metadata_region_bytes;
        if (carved >= total_bytes()) {
            throw ValidationError(name + ": carved regions leave no mapped space");
        }
        auto budget = dedup::metadata_budget(total_bytes() - carved);
        if (metadata_region_bytes < budget.total_bytes()) {
            throw ValidationError(name + ": metadata region smaller than the index budget (" +
                                  std::to_string(budget.total_bytes()) + " bytes for " +
                                  std::to_string(total_bytes() - carved) + " usable bytes)");
        }
    }
    if (!(buffer_lo_watermark >= 0.0 && buffer_lo_watermark < buffer_hi_watermark &&
          buffer_hi_watermark <= 1.0)) {
        throw ValidationError(name + ": watermarks need 0 <= lo < hi <= 1");
    }
    if (queue_depth == 0) throw ValidationError(name + ": queue_depth must be positive");
    if (hot_epoch_cycles == 0) throw ValidationError(name + ": hot_epoch_cycles must be positive");
    // hot_write_threshold 0 = heat routing disabled.

    const uint64_t row_bytes =
        static_cast<uint64_t>(timing.dram.lines_per_row) * kLineBytes;
    if (metadata_region_bytes % row_bytes != 0 || write_buffer_bytes % row_bytes != 0) {
        throw ValidationError(name + ": carved DRAM regions must be whole rows (" +
                              std::to_string(row_bytes) + " bytes)");
    }
    if (dram_bytes > 0 && metadata_region_bytes + write_buffer_bytes >= dram_bytes) {
        throw ValidationError(name +
                              ": buffer and metadata regions must leave mapped DRAM space");
    }
    // Constructing the scaled devices validates the capacities.
    if (dram_bytes > 0) timing.dram.scaled_to_bytes(dram_bytes).validate();
    if (pcm_bytes > 0) timing.pcm.scaled_to_bytes(pcm_bytes).validate();
}

namespace {
constexpr uint64_t kMiB = 1024ull * 1024ull;
constexpr uint64_t kGiB = 1024ull * kMiB;
}  // namespace

ArchitectureConfig arch_preset(const std::string& name) {
    ArchitectureConfig a;
    a.name = name;
    // Equal-cost sizings: one DRAM byte buys four PCM bytes.
    if (name == "pure-dram") {
        a.kind = ArchKind::PureDram;
        a.dram_bytes = 4 * kGiB;
    } else if (name == "pure-pcm") {
        a.kind = ArchKind::PurePcm;
        a.pcm_bytes = 16 * kGiB;
    } else if (name == "hybrid") {
        a.kind = ArchKind::Hybrid;
        a.dram_bytes = 2 * kGiB;
        a.pcm_bytes = 8 * kGiB;
        a.write_buffer_bytes = 256 * kMiB;
    } else if (name == "caram") {
        a.kind = ArchKind::Caram;
        a.dram_bytes = 2 * kGiB;
        a.pcm_bytes = 8 * kGiB;
        a.write_buffer_bytes = 256 * kMiB;
    } else if (name == "cal-pure-dram") {
        a.kind = ArchKind::PureDram;
        a.dram_bytes = 128 * kMiB;
    } else if (name == "cal-pure-pcm") {
        a.kind = ArchKind::PurePcm;
        a.pcm_bytes = 512 * kMiB;
    } else if (name == "cal-hybrid" || name == "cal-caram") {
        a.kind = name == "cal-caram" ? ArchKind::Caram : ArchKind::Hybrid;
        a.dram_bytes = 64 * kMiB;
        a.pcm_bytes = 256 * kMiB;
        a.write_buffer_bytes = 8 * kMiB;
        // Synthetic calibration traces touch every line of their compact
        // address range, so with heat routing on most allocations would
        // drift into DRAM and placement would depend on request pacing.
        // The cal parts pin allocation to the PCM-first path instead.
        a.hot_write_threshold = 0;
        if (a.kind == ArchKind::Caram) {
            // The shrunk devices would otherwise spend most of their
            // makespan on index traffic that the full-size parts absorb.
            a.metadata_port = MetadataPort::Separate;
        }
    } else {
        throw ValidationError("unknown architecture preset '" + name + "'");
    }
    return a;
}

std::vector<std::string> arch_preset_names() {
    return {"pure-dram", "pure-pcm",     "hybrid",       "caram",
            "cal-pure-dram", "cal-pure-pcm", "cal-hybrid", "cal-caram"};
}

// ---------------------------------------------------------------- PageCache

PageCache::PageCache(EvictionPolicy policy) : policy_(policy) {}

bool PageCache::resident(uint64_t page) const {
    return policy_ == EvictionPolicy::Lru ? lru_pos_.count(page) > 0
                                          : clock_pos_.count(page) > 0;
}

void PageCache::touch(uint64_t page) {
    if (policy_ == EvictionPolicy::Lru) {
        auto it = lru_pos_.find(page);
        if (it != lru_pos_.end()) lru_.erase(it->second);
        lru_.push_back(page);
        lru_pos_[page] = std::prev(lru_.end());
        return;
    }
    auto it = clock_pos_.find(page);
    if (it != clock_pos_.end()) {
        ring_[it->second].referenced = true;
        return;
    }
    ring_.push_back({page, true, false});
    clock_pos_[page] = ring_.size() - 1;
}

void PageCache::erase(uint64_t page) {
    if (policy_ == EvictionPolicy::Lru) {
        auto it = lru_pos_.find(page);
        if (it == lru_pos_.end()) return;
        lru_.erase(it->second);
        lru_pos_.erase(it);
        return;
    }
    auto it = clock_pos_.find(page);
    if (it == clock_pos_.end()) return;
    ring_[it->second].dead = true;
    dead_slots_++;
    clock_pos_.erase(it);
    if (dead_slots_ * 2 > ring_.size()) compact_ring();
}

void PageCache::compact_ring() {
    std::vector<ClockSlot> fresh;
    fresh.reserve(ring_.size() - dead_slots_);
    size_t new_hand = 0;
    for (size_t i = 0; i < ring_.size(); i++) {
        // Keep the hand pointing at the same survivor.
        if (i == hand_) new_hand = fresh.size();
        if (!ring_[i].dead) {
            clock_pos_[ring_[i].page] = fresh.size();
            fresh.push_back(ring_[i]);
        }
    }
    ring_ = std::move(fresh);
    hand_ = ring_.empty() ? 0 : new_hand % ring_.size();
    dead_slots_ = 0;
}

std::optional<uint64_t> PageCache::pick_victim(std::optional<uint64_t> exclude) {
    if (policy_ == EvictionPolicy::Lru) {
        for (uint64_t page : lru_) {
            if (exclude.has_value() && page == *exclude) continue;
            return page;
        }
        return std::nullopt;
    }
    if (clock_pos_.empty()) return std::nullopt;
    if (clock_pos_.size() == 1 && exclude.has_value() &&
        clock_pos_.count(*exclude) > 0) {
        return std::nullopt;
    }
    // Two sweeps bound the search: the first pass clears reference bits.
    for (size_t step = 0; step < 2 * ring_.size(); step++) {
        ClockSlot& slot = ring_[hand_];
        hand_ = (hand_ + 1) % ring_.size();
        if (slot.dead) continue;
        if (exclude.has_value() && slot.page == *exclude) continue;
        if (slot.referenced) {
            slot.referenced = false;
            continue;
        }
        return slot.page;
    }
    return std::nullopt;
}

// --------------------------------------------------------------- Controller

Controller::Controller(RunConfig config) : cfg_(std::move(config)), cache_(cfg_.arch.eviction) {
    cfg_.arch.finalize(cfg_.timing);
    cfg_.energy.validate();
    const ArchitectureConfig& a = cfg_.arch;

    if (a.dram_bytes > 0) {
        dram_.emplace(cfg_.timing.dram.scaled_to_bytes(a.dram_bytes), cfg_.keep_event_log);
    }
    if (a.pcm_bytes > 0) {
        pcm_.emplace(cfg_.timing.pcm.scaled_to_bytes(a.pcm_bytes), cfg_.keep_event_log);
    }
    dram_lines_ = a.dram_bytes / kLineBytes;
    meta_lines_ = a.metadata_region_bytes / kLineBytes;
    buffer_base_ = meta_lines_;
    buffer_lines_ = a.write_buffer_bytes / kLineBytes;
    mapped_base_ = meta_lines_ + buffer_lines_;

    if (a.kind == ArchKind::Caram) {
        // Address map and fingerprint index split the region in their
        // 8:10 per-line cost ratio.
        amt_lines_ = std::max<uint64_t>(1, meta_lines_ * 8 / 18);
        engine_.emplace(dedup::metadata_budget(a.total_bytes()));
    }

    const uint32_t lpr = cfg_.timing.dram.lines_per_row;
    const uint32_t granule = a.kind == ArchKind::Caram ? 1 : kLinesPerBlock;
    // Stride the wear rotation by one bank of rows so back-to-back
    // allocations (and the drains that follow them) spread across banks.
    if (dram_lines_ > mapped_base_) {
        dram_alloc_.emplace(dram_lines_ - mapped_base_, lpr, granule,
                            cfg_.timing.dram.scaled_to_bytes(a.dram_bytes).num_rows);
    }
    if (a.pcm_bytes > 0) {
        pcm_alloc_.emplace(a.pcm_bytes / kLineBytes, cfg_.timing.pcm.lines_per_row, granule,
                           cfg_.timing.pcm.scaled_to_bytes(a.pcm_bytes).num_rows);
    }
    completion_ring_.assign(a.queue_depth, 0);
}

mem::ChannelModel& Controller::channel_of(Pla pla) {
    if (is_dram_pla(pla)) return *dram_;
    return *pcm_;
}

Pla Controller::device_local(Pla pla) const {
    return is_dram_pla(pla) ? pla : pla - static_cast<Pla>(dram_lines_);
}

Cycle Controller::book(mem::ChannelModel& ch, mem::AccessKind kind, Pla local_line,
                       Cycle issue) {
    mem::DeviceOp op = ch.service(kind, local_line, issue);
    bump_makespan(op.complete);
    return op.complete;
}

Cycle Controller::book_metadata(const dedup::MemOp& op, Cycle issue) {
    const bool is_read = op.kind == dedup::MemOpKind::MetadataRead;
    if (cfg_.arch.metadata_port == MetadataPort::Separate) {
        // Dedicated index path: fixed transfer latency, no bank contention.
        if (is_read) {
            port_counters_.metadata_reads++;
        } else {
            port_counters_.metadata_writes++;
        }
        Cycle done = issue + cfg_.timing.dram.metadata_burst_cycles;
        bump_makespan(done);
        return done;
    }
    // Contending: the entry lives in the carved DRAM region. Address map
    // entries pack 32 per line so neighbouring pages share rows; the
    // fingerprint index is keyed by hash and lands anywhere.
    uint64_t line;
    if (op.table == dedup::MetaTable::Amt) {
        line = (op.meta_key / 32) % amt_lines_;
    } else {
        uint64_t lfi_lines = meta_lines_ - amt_lines_;
        line = amt_lines_ + op.meta_key % lfi_lines;
    }
    return book(*dram_, is_read ? mem::AccessKind::MetadataRead : mem::AccessKind::MetadataWrite,
                static_cast<Pla>(line), issue);
}

Cycle Controller::read_line(Pla pla, Cycle now, bool compare) {
    const mem::AccessKind kind =
        compare ? mem::AccessKind::CompareRead : mem::AccessKind::LineRead;
    if (!is_dram_pla(pla) && buffer_lines_ > 0) {
        auto it = buffer_resident_.find(pla);
        if (it != buffer_resident_.end()) {
            if (now < it->second) {
                // Still staged: serve from the buffer slot.
                uint64_t slot = slot_of_.at(pla);
                return book(*dram_, kind, static_cast<Pla>(buffer_base_ + slot), now);
            }
            buffer_resident_.erase(it);
            slot_of_.erase(pla);
        }
    }
    return book(channel_of(pla), kind, device_local(pla), now);
}

Cycle Controller::write_line(Pla dest, Cycle now) {
    if (is_dram_pla(dest)) {
        return book(*dram_, mem::AccessKind::LineWrite, device_local(dest), now);
    }
    if (buffer_lines_ > 0) {
        return enqueue_buffered_write(dest, now);
    }
    return book(*pcm_, mem::AccessKind::LineWrite, device_local(dest), now);
}

Cycle Controller::enqueue_buffered_write(Pla dest, Cycle now) {
    // Reclaim slots whose drain has already finished.
    while (!draining_.empty() && draining_.top().first <= now) {
        free_slots_.push_back(draining_.top().second);
        draining_.pop();
        buffered_live_--;
    }
    uint64_t slot;
    if (!free_slots_.empty()) {
        slot = free_slots_.back();
        free_slots_.pop_back();
    } else if (next_fresh_slot_ < buffer_lines_) {
        slot = next_fresh_slot_++;
    } else {
        if (draining_.empty()) {
            // Nothing in flight to wait for; the drain scheduler has
            // fallen behind the watermark logic.
            throw InvariantError("write buffer full with no drain in flight");
        }
        buffer_stats_.full_stalls++;
        auto [done, freed] = draining_.top();
        draining_.pop();
        buffered_live_--;
        slot = freed;
        now = std::max(now, done);
    }

    Cycle done = book(*dram_, mem::AccessKind::LineWrite,
                      static_cast<Pla>(buffer_base_ + slot), now);
    pending_.push_back({dest, slot, done});
    buffered_live_++;
    buffer_resident_[dest] = kNeverDrained;
    slot_of_[dest] = slot;
    buffer_stats_.lines_enqueued++;

    const double hi = cfg_.arch.buffer_hi_watermark * static_cast<double>(buffer_lines_);
    const double lo = cfg_.arch.buffer_lo_watermark * static_cast<double>(buffer_lines_);
    if (static_cast<double>(pending_.size()) >= hi) {
        buffer_stats_.drain_episodes++;
        while (static_cast<double>(pending_.size()) > lo) drain_one(done);
    }
    return done;
}

Cycle Controller::drain_one(Cycle issue) {
    BufferedLine entry = pending_.front();
    pending_.pop_front();
    Cycle read_done = book(*dram_, mem::AccessKind::LineRead,
                           static_cast<Pla>(buffer_base_ + entry.slot), issue);
    Cycle write_done =
        book(*pcm_, mem::AccessKind::LineWrite, device_local(entry.dest_pla), read_done);
    draining_.push({write_done, entry.slot});
    // The copy leaves the buffer once the device write lands; until then
    // reads keep hitting the slot.
    auto it = buffer_resident_.find(entry.dest_pla);
    if (it != buffer_resident_.end() && it->second == kNeverDrained &&
        slot_of_.at(entry.dest_pla) == entry.slot) {
        it->second = write_done;
    }
    buffer_stats_.lines_drained++;
    return write_done;
}

void Controller::note_page_write(uint64_t page, Cycle now) {
    Cycle epoch = now / cfg_.arch.hot_epoch_cycles;
    PageHeat& h = heat_[page];
    if (h.epoch != epoch) {
        h.epoch = epoch;
        h.writes = 0;
    }
    h.writes++;
}

bool Controller::page_is_hot(uint64_t page, Cycle now) {
    if (cfg_.arch.kind == ArchKind::PureDram || cfg_.arch.kind == ArchKind::PurePcm ||
        cfg_.arch.hot_write_threshold == 0) {
        return false;
    }
    auto it = heat_.find(page);
    if (it == heat_.end()) return false;
    return it->second.epoch == now / cfg_.arch.hot_epoch_cycles &&
           it->second.writes >= cfg_.arch.hot_write_threshold;
}

std::optional<Pla> Controller::allocate_line(bool prefer_dram) {
    auto from_dram = [this]() -> std::optional<Pla> {
        if (!dram_alloc_) return std::nullopt;
        auto local = dram_alloc_->allocate();
        if (!local) return std::nullopt;
        return static_cast<Pla>(mapped_base_ + *local);
    };
    auto from_pcm = [this]() -> std::optional<Pla> {
        if (!pcm_alloc_) return std::nullopt;
        auto local = pcm_alloc_->allocate();
        if (!local) return std::nullopt;
        return static_cast<Pla>(dram_lines_ + *local);
    };
    if (prefer_dram) {
        if (auto p = from_dram()) return p;
        return from_pcm();
    }
    if (auto p = from_pcm()) return p;
    return from_dram();
}

std::optional<Pla> Controller::allocate_frame(bool prefer_dram) {
    return allocate_line(prefer_dram);  // same routing; granule set at construction
}

void Controller::free_line(Pla pla) {
    if (is_dram_pla(pla)) {
        dram_alloc_->free(pla - static_cast<Pla>(mapped_base_));
    } else {
        pcm_alloc_->free(pla - static_cast<Pla>(dram_lines_));
    }
}

Cycle Controller::evict_for_space(uint64_t current_page, Cycle now) {
    auto victim = cache_.pick_victim(current_page);
    if (!victim.has_value()) {
        throw CapacityError(cfg_.arch.name + ": working set exceeds usable capacity");
    }
    if (cfg_.arch.kind == ArchKind::Caram) {
        uint16_t mask = caram_page_mask_.at(*victim);
        std::vector<Lla> llas;
        for (uint32_t i = 0; i < kLinesPerBlock; i++) {
            if (mask & (1u << i)) llas.push_back(static_cast<Lla>(*victim * kLinesPerBlock + i));
        }
        dedup::EvictOutcome out = engine_->evict_lines(llas);
        for (const dedup::MemOp& op : out.ops) {
            switch (op.kind) {
                case dedup::MemOpKind::MetadataRead:
                case dedup::MemOpKind::MetadataWrite:
                    now = book_metadata(op, now);
                    break;
                case dedup::MemOpKind::LineFree:
                    free_line(op.pla);
                    break;
                default:
                    throw InvariantError("unexpected device op during eviction");
            }
        }
        evict_stats_.llas_evicted += llas.size();
        caram_page_mask_.erase(*victim);
    } else {
        Pla frame = frame_of_page_.at(*victim);
        free_line(frame);
        frame_of_page_.erase(*victim);
    }
    cache_.erase(*victim);
    heat_.erase(*victim);
    now += cfg_.arch.swap_cycles;  // write the page back to storage
    bump_makespan(now);
    evict_stats_.pages_evicted++;
    evict_stats_.swap_cycles_charged += cfg_.arch.swap_cycles;
    return now;
}

Cycle Controller::process_write(const trace::LineRequest& req, Cycle admit) {
    const uint64_t page = req.lla / kLinesPerBlock;
    note_page_write(page, admit);
    cache_.touch(page);
    Cycle t = admit;

    if (cfg_.arch.kind == ArchKind::Caram) {
        const bool hot = page_is_hot(page, admit);
        dedup::WriteOutcome outcome;
        for (;;) {
            try {
                outcome = engine_->process_write(
                    req.lla, req.lfp, req.payload,
                    [this, hot]() { return allocate_line(hot); });
                break;
            } catch (const CapacityError&) {
                t = evict_for_space(page, t);
            }
        }
        caram_page_mask_[page] |= static_cast<uint16_t>(1u << (req.lla % kLinesPerBlock));
        for (const dedup::MemOp& op : outcome.ops) {
            switch (op.kind) {
                case dedup::MemOpKind::MetadataRead:
                case dedup::MemOpKind::MetadataWrite:
                    t = book_metadata(op, t);
                    break;
                case dedup::MemOpKind::CompareRead:
                    t = read_line(op.pla, t, true);
                    break;
                case dedup::MemOpKind::LineWrite:
                    t = write_line(op.pla, t);
                    device_line_writes_++;
                    break;
                case dedup::MemOpKind::LineRead:
                    t = read_line(op.pla, t, false);
                    break;
                case dedup::MemOpKind::LineFree:
                    free_line(op.pla);
                    break;
            }
        }
        return t;
    }

    auto it = frame_of_page_.find(page);
    if (it == frame_of_page_.end()) {
        const bool hot = page_is_hot(page, admit);
        std::optional<Pla> frame;
        for (;;) {
            frame = allocate_frame(hot);
            if (frame.has_value()) break;
            t = evict_for_space(page, t);
        }
        it = frame_of_page_.emplace(page, *frame).first;
    }
    Pla pla = it->second + static_cast<Pla>(req.lla % kLinesPerBlock);
    t = write_line(pla, t);
    device_line_writes_++;
    return t;
}

Cycle Controller::process_read(const trace::LineRequest& req, Cycle admit) {
    const uint64_t page = req.lla / kLinesPerBlock;
    Cycle t = admit;
    if (cfg_.arch.kind == ArchKind::Caram) {
        dedup::ReadOutcome out = engine_->process_read(req.lla);
        for (const dedup::MemOp& op : out.ops) {
            switch (op.kind) {
                case dedup::MemOpKind::MetadataRead:
                    t = book_metadata(op, t);
                    break;
                case dedup::MemOpKind::LineRead:
                    t = read_line(op.pla, t, false);
                    break;
                default:
                    throw InvariantError("unexpected device op during read");
            }
        }
        if (!out.pla.has_value()) {
            evict_stats_.read_misses++;
            t += cfg_.arch.swap_cycles;  // fetched from storage, not installed
            bump_makespan(t);
        } else if (cache_.resident(page)) {
            cache_.touch(page);
        }
        return t;
    }
    auto it = frame_of_page_.find(page);
    if (it == frame_of_page_.end()) {
        evict_stats_.read_misses++;
        t += cfg_.arch.swap_cycles;
        bump_makespan(t);
        return t;
    }
    Pla pla = it->second + static_cast<Pla>(req.lla % kLinesPerBlock);
    t = read_line(pla, t, false);
    cache_.touch(page);
    return t;
}

void Controller::process(const trace::LineRequest& req) {
    if (finished_) throw InvariantError("controller already finished");
    const Cycle arrival = cfg_.stress_mode ? 0 : req.arrival_cycle;
    const Cycle admit = std::max(arrival, completion_ring_[ring_next_]);
    Cycle completion;
    if (req.op == IoOp::Write) {
        write_requests_++;
        completion = process_write(req, admit);
    } else {
        read_requests_++;
        completion = process_read(req, admit);
    }
    completion_ring_[ring_next_] = completion;
    ring_next_ = (ring_next_ + 1) % completion_ring_.size();
}

void Controller::finish() {
    if (finished_) return;
    buffer_stats_.pre_flush_occupancy_lines = pending_.size();
    Cycle t = makespan_;
    while (!pending_.empty()) drain_one(t);
    buffer_stats_.final_occupancy_lines = pending_.size();
    finished_ = true;
}

RunResult Controller::result() const {
    if (!finished_) throw InvariantError("result requested before finish()");
    RunResult r;
    r.arch_name = cfg_.arch.name;
    r.kind = cfg_.arch.kind;
    r.total_cycles = makespan_;
    r.read_requests = read_requests_;
    r.write_requests = write_requests_;
    if (engine_) r.dedup = engine_->stats();
    r.device_line_writes = device_line_writes_;

    uint64_t live = 0;
    if (dram_alloc_) live += dram_alloc_->live_lines();
    if (pcm_alloc_) live += pcm_alloc_->live_lines();
    r.live_lines = live;
    r.metadata_bytes = cfg_.charge_metadata ? cfg_.arch.metadata_region_bytes : 0;
    uint64_t usable_lines = 0;
    if (dram_alloc_) usable_lines += dram_alloc_->total_lines();
    if (pcm_alloc_) usable_lines += pcm_alloc_->total_lines();
    r.usable_bytes = usable_lines * kLineBytes;
    r.capacity_bytes = cfg_.arch.total_bytes();
    const uint64_t occupied = live * kLineBytes + r.metadata_bytes;
    if (occupied > r.capacity_bytes) {
        throw InvariantError(cfg_.arch.name + ": occupied bytes exceed capacity");
    }
    r.occupation_ratio =
        static_cast<double>(occupied) / static_cast<double>(r.capacity_bytes);
    const uint64_t requests = read_requests_ + write_requests_;
    r.bandwidth_bytes_per_cycle =
        makespan_ == 0 ? 0.0
                       : static_cast<double>(requests) * kLineBytes /
                             static_cast<double>(makespan_);

    if (dram_) {
        r.dram = dram_->counters();
        r.dram_banks = static_cast<uint64_t>(dram_->timing().ranks) *
                       dram_->timing().banks_per_rank;
    }
    if (pcm_) {
        r.pcm = pcm_->counters();
        r.pcm_banks =
            static_cast<uint64_t>(pcm_->timing().ranks) * pcm_->timing().banks_per_rank;
    }
    r.metadata_port = port_counters_;
    r.buffer = buffer_stats_;
    r.evictions = evict_stats_;

    if (pcm_) {
        const auto& wear = pcm_->row_write_counts();
        WearSummary w;
        w.rows = wear.size();
        uint32_t mn = wear.empty() ? 0 : wear[0];
        uint32_t mx = mn;
        uint64_t sum = 0;
        for (uint32_t c : wear) {
            mn = std::min(mn, c);
            mx = std::max(mx, c);
            sum += c;
        }
        w.min_writes = mn;
        w.max_writes = mx;
        w.mean_writes = wear.empty() ? 0.0
                                     : static_cast<double>(sum) / static_cast<double>(wear.size());
        r.pcm_wear = w;
    }

    energy::DeviceActivity dram_act;
    if (dram_) {
        dram_act = energy::activity_from_counters(dram_->counters(), dram_->timing(),
                                                  cfg_.arch.dram_bytes);
    } else {
        dram_act.capacity_bytes = 0;
    }
    // The separate index port is still battery-backed DRAM; its traffic
    // costs the same energy wherever it is wired.
    dram_act.metadata_reads += port_counters_.metadata_reads;
    dram_act.metadata_writes += port_counters_.metadata_writes;
    if (!dram_) dram_act.refreshes = true;
    energy::DeviceActivity pcm_act;
    if (pcm_) {
        pcm_act = energy::activity_from_counters(pcm_->counters(), pcm_->timing(),
                                                 cfg_.arch.pcm_bytes);
    } else {
        pcm_act.capacity_bytes = 0;
    }
    r.energy = energy::total_energy(dram_act, pcm_act, cfg_.energy, makespan_);
    r.config = cfg_;
    return r;
}

RunResult simulate(const RunConfig& config, const std::vector<trace::LineRequest>& requests) {
    Controller c(config);
    for (const auto& req : requests) c.process(req);
    c.finish();
    return c.result();
}

}  // namespace caram::ctrl
