#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "caram/controller.hpp"

using namespace caram;
using namespace caram::ctrl;

namespace {

trace::LineRequest write_req(Lla lla, Lfp lfp = 0) {
    trace::LineRequest r;
    r.lla = lla;
    r.op = IoOp::Write;
    r.lfp = lfp;
    return r;
}

trace::LineRequest read_req(Lla lla) {
    trace::LineRequest r;
    r.lla = lla;
    r.op = IoOp::Read;
    return r;
}

constexpr uint64_t kKiB = 1024;
constexpr uint64_t kMiB = 1024 * kKiB;

ArchitectureConfig tiny_hybrid() {
    ArchitectureConfig a;
    a.name = "tiny-hybrid";
    a.kind = ArchKind::Hybrid;
    a.dram_bytes = 1 * kMiB;
    a.pcm_bytes = 1 * kMiB;
    a.write_buffer_bytes = 16 * kKiB;  // 64 line slots
    a.hot_write_threshold = 0;
    return a;
}

ArchitectureConfig tiny_caram() {
    ArchitectureConfig a;
    a.name = "tiny-caram";
    a.kind = ArchKind::Caram;
    a.dram_bytes = 2 * kMiB;
    a.pcm_bytes = 2 * kMiB;
    a.write_buffer_bytes = 64 * kKiB;
    a.hot_write_threshold = 0;
    return a;
}

RunConfig stress_config(ArchitectureConfig a) {
    RunConfig cfg;
    cfg.arch = std::move(a);
    cfg.timing = mem::timing_preset("table1");
    cfg.energy = energy::energy_preset("default");
    cfg.stress_mode = true;
    return cfg;
}

}  // namespace

TEST_CASE("lru cache evicts the coldest page and honours the exclusion") {
    PageCache c(EvictionPolicy::Lru);
    c.touch(1);
    c.touch(2);
    c.touch(3);
    CHECK(c.size() == 3);
    CHECK(c.resident(2));
    CHECK(*c.pick_victim(std::nullopt) == 1);

    c.touch(1);  // now 2 is coldest
    CHECK(*c.pick_victim(std::nullopt) == 2);
    CHECK(*c.pick_victim(2) == 3);

    c.erase(2);
    CHECK(!c.resident(2));
    CHECK(*c.pick_victim(std::nullopt) == 3);
    c.erase(3);
    c.erase(1);
    CHECK(!c.pick_victim(std::nullopt).has_value());
}

TEST_CASE("clock cache gives recently touched pages a second chance") {
    PageCache c(EvictionPolicy::Clock);
    c.touch(1);
    c.touch(2);
    c.touch(3);
    // First sweep clears every reference bit, then the oldest slot wins.
    CHECK(*c.pick_victim(std::nullopt) == 1);
    c.erase(1);

    c.touch(2);  // re-referenced: survives the next sweep
    CHECK(*c.pick_victim(std::nullopt) == 3);

    c.erase(3);
    CHECK(*c.pick_victim(std::nullopt) == 2);
    CHECK(!c.pick_victim(2).has_value());  // only the excluded page remains
}

TEST_CASE("named architectures carry their published sizings") {
    auto names = arch_preset_names();
    REQUIRE(names.size() == 8);
    for (const auto& n : names) {
        CHECK_NOTHROW(arch_preset(n));
    }
    CHECK_THROWS_AS(arch_preset("quantum"), ValidationError);

    ArchitectureConfig caram = arch_preset("caram");
    CHECK(caram.kind == ArchKind::Caram);
    CHECK(caram.dram_bytes == 2048 * kMiB);
    CHECK(caram.pcm_bytes == 8192 * kMiB);
    CHECK(caram.write_buffer_bytes == 256 * kMiB);

    ArchitectureConfig pd = arch_preset("pure-dram");
    CHECK(pd.dram_bytes == 4096 * kMiB);
    CHECK(pd.pcm_bytes == 0);
    CHECK(arch_preset("pure-pcm").pcm_bytes == 16384 * kMiB);

    ArchitectureConfig cal = arch_preset("cal-caram");
    CHECK(cal.dram_bytes == 64 * kMiB);
    CHECK(cal.pcm_bytes == 256 * kMiB);
    CHECK(cal.write_buffer_bytes == 8 * kMiB);
    CHECK(cal.hot_write_threshold == 0);
    CHECK(cal.metadata_port == MetadataPort::Separate);
    CHECK(arch_preset("cal-hybrid").metadata_port == MetadataPort::Contending);
}

TEST_CASE("architecture validation rejects inconsistent shapes") {
    mem::TimingPreset t = mem::timing_preset("table1");

    ArchitectureConfig a = arch_preset("pure-dram");
    a.pcm_bytes = 64 * kMiB;
    CHECK_THROWS_AS(a.finalize(t), ValidationError);

    a = arch_preset("hybrid");
    a.metadata_region_bytes = 8 * kMiB;  // only dedup carries an index
    CHECK_THROWS_AS(a.finalize(t), ValidationError);

    a = arch_preset("pure-pcm");
    a.write_buffer_bytes = 8 * kMiB;  // staging needs a dram side
    CHECK_THROWS_AS(a.finalize(t), ValidationError);

    a = tiny_caram();
    a.metadata_region_bytes = 8 * kKiB;  // one row, far below the index budget
    CHECK_THROWS_AS(a.finalize(t), ValidationError);

    a = tiny_hybrid();
    a.buffer_lo_watermark = 0.9;
    a.buffer_hi_watermark = 0.1;
    CHECK_THROWS_AS(a.finalize(t), ValidationError);

    a = tiny_hybrid();
    a.write_buffer_bytes = 3 * kKiB;  // not whole 8 KiB rows
    CHECK_THROWS_AS(a.finalize(t), ValidationError);

    a = tiny_hybrid();
    a.queue_depth = 0;
    CHECK_THROWS_AS(a.finalize(t), ValidationError);

    a = tiny_hybrid();
    a.write_buffer_bytes = a.dram_bytes;  // no mapped dram left
    CHECK_THROWS_AS(a.finalize(t), ValidationError);

    // Auto-sized metadata region fills in and passes.
    a = tiny_caram();
    a.finalize(t);
    CHECK(a.metadata_region_bytes > 0);
    CHECK(a.metadata_region_bytes % (8 * kKiB) == 0);
}

TEST_CASE("write buffer drains between the watermarks") {
    // 64 slots, hi 0.9, lo 0.1: the 58th staged line crosses 57.6 and one
    // episode drains down to 6 pending.
    Controller ctrl(stress_config(tiny_hybrid()));
    for (uint32_t i = 0; i < 58; i++) {
        ctrl.process(write_req(i * kLinesPerBlock));
    }
    const BufferStats& mid = ctrl.buffer_stats();
    CHECK(mid.drain_episodes == 1);
    CHECK(mid.lines_enqueued == 58);
    CHECK(mid.lines_drained == 52);

    for (uint32_t i = 58; i < 100; i++) {
        ctrl.process(write_req(i * kLinesPerBlock));
    }
    ctrl.finish();
    RunResult r = ctrl.result();
    CHECK(r.buffer.drain_episodes == 1);
    CHECK(r.buffer.lines_enqueued == 100);
    CHECK(r.buffer.pre_flush_occupancy_lines == 48);
    CHECK(r.buffer.lines_drained == 100);
    CHECK(r.buffer.final_occupancy_lines == 0);
    // Every staged line eventually landed in the slow device.
    CHECK(r.pcm.line_writes == 100);
    CHECK(r.device_line_writes == 100);
}

TEST_CASE("a full buffer stalls on the oldest in-flight drain") {
    ArchitectureConfig a = tiny_hybrid();
    a.write_buffer_bytes = 8 * kKiB;  // 32 slots
    a.buffer_hi_watermark = 1.0;
    a.buffer_lo_watermark = 0.01;
    Controller ctrl(stress_config(a));
    for (uint32_t i = 0; i < 64; i++) {
        ctrl.process(write_req(i * kLinesPerBlock));
    }
    ctrl.finish();
    RunResult r = ctrl.result();
    CHECK(r.buffer.full_stalls > 0);
    CHECK(r.buffer.lines_drained == 64);
}

TEST_CASE("staged lines are read back from the buffer, not the slow device") {
    Controller ctrl(stress_config(tiny_hybrid()));
    ctrl.process(write_req(5));
    ctrl.process(read_req(5));
    ctrl.finish();
    RunResult r = ctrl.result();
    // The line still sat in its slot: the request read is a dram access,
    // and the closing flush reads the slot once more on its way out.
    CHECK(r.pcm.line_reads == 0);
    CHECK(r.dram.line_reads == 2);
    CHECK(r.pcm.line_writes == 1);
}

TEST_CASE("pure architectures run on a single channel") {
    std::vector<trace::LineRequest> reqs;
    for (uint32_t i = 0; i < 200; i++) reqs.push_back(write_req(i));
    for (uint32_t i = 0; i < 200; i++) reqs.push_back(read_req(i));

    RunResult pcm = simulate(stress_config(arch_preset("cal-pure-pcm")), reqs);
    CHECK(pcm.kind == ArchKind::PurePcm);
    CHECK(pcm.dram_banks == 0);
    CHECK(pcm.dram.line_writes == 0);
    CHECK(pcm.pcm.line_writes == 200);
    CHECK(pcm.pcm.line_reads == 200);
    CHECK(pcm.buffer.lines_enqueued == 0);
    CHECK(pcm.dedup.new_lines == 0);
    CHECK(pcm.device_line_writes == 200);

    RunResult dram = simulate(stress_config(arch_preset("cal-pure-dram")), reqs);
    CHECK(dram.pcm_banks == 0);
    CHECK(dram.dram.line_writes == 200);
    CHECK(dram.pcm.line_writes == 0);
    CHECK(dram.occupation_ratio > 0.0);
}

TEST_CASE("duplicate content stages nothing new") {
    Controller ctrl(stress_config(tiny_caram()));
    ctrl.process(write_req(0, 0x42));   // fresh line, staged for pcm
    ctrl.process(write_req(16, 0x42));  // same content elsewhere: shared
    ctrl.process(write_req(0, 0x42));   // exact duplicate: dropped
    ctrl.finish();
    RunResult r = ctrl.result();
    CHECK(r.buffer.lines_enqueued == 1);
    CHECK(r.device_line_writes == 1);
    CHECK(r.dedup.new_lines == 1);
    CHECK(r.dedup.shared == 1);
    CHECK(r.dedup.dropped == 1);
    CHECK(r.pcm.line_writes == 1);
    CHECK(r.live_lines == 1);
}

TEST_CASE("rewritten pages cross the heat threshold and move to dram") {
    ArchitectureConfig a = tiny_caram();
    a.hot_write_threshold = 2;
    RunConfig cfg = stress_config(a);
    const Pla dram_lines = static_cast<Pla>(cfg.arch.dram_bytes / kLineBytes);

    Controller ctrl(cfg);
    ctrl.process(write_req(0, 1));  // first write: page still cold, lands in pcm
    ctrl.process(write_req(1, 2));  // second write makes the page hot
    ctrl.process(write_req(2, 3));
    ctrl.finish();

    const dedup::DedupEngine* eng = ctrl.engine();
    REQUIRE(eng != nullptr);
    CHECK(*eng->lookup(0) >= dram_lines);
    CHECK(*eng->lookup(1) < dram_lines);
    CHECK(*eng->lookup(2) < dram_lines);
}

TEST_CASE("overcommitted dedup store evicts pages and keeps its invariants") {
    for (EvictionPolicy policy : {EvictionPolicy::Lru, EvictionPolicy::Clock}) {
        ArchitectureConfig a = tiny_caram();
        a.eviction = policy;
        RunConfig cfg = stress_config(a);
        Controller ctrl(cfg);
        // Distinct contents well past the mapped line capacity (~16k).
        const uint32_t n = 24000;
        for (uint32_t i = 0; i < n; i++) {
            ctrl.process(write_req(i, 0x10000 + i));
        }
        ctrl.finish();
        RunResult r = ctrl.result();
        CHECK(r.evictions.pages_evicted > 0);
        CHECK(r.evictions.llas_evicted > 0);
        CHECK(r.evictions.swap_cycles_charged ==
              r.evictions.pages_evicted * cfg.arch.swap_cycles);
        CHECK(r.live_lines * kLineBytes <= r.usable_bytes);
        CHECK(r.dedup.evicted_llas == r.evictions.llas_evicted);
        std::string why;
        REQUIRE(ctrl.engine() != nullptr);
        CHECK_MESSAGE(ctrl.engine()->check_invariants(&why), why);
    }
}

TEST_CASE("reads of unmapped addresses charge the swap path") {
    Controller ctrl(stress_config(tiny_caram()));
    ctrl.process(read_req(999));
    ctrl.process(write_req(5, 7));
    ctrl.process(read_req(5));
    ctrl.finish();
    RunResult r = ctrl.result();
    CHECK(r.evictions.read_misses == 1);
    CHECK(r.dedup.reads_missed == 1);
    CHECK(r.dedup.reads_hit == 1);
    // The miss is not installed: a second miss charges again.
    Controller again(stress_config(tiny_caram()));
    again.process(read_req(999));
    again.process(read_req(999));
    again.finish();
    CHECK(again.result().evictions.read_misses == 2);
}

TEST_CASE("deeper queues overlap independent requests") {
    std::vector<trace::LineRequest> reqs;
    for (uint32_t i = 0; i < 2000; i++) reqs.push_back(write_req(i));

    RunConfig serial = stress_config(arch_preset("cal-pure-pcm"));
    serial.arch.queue_depth = 1;
    RunConfig deep = stress_config(arch_preset("cal-pure-pcm"));
    deep.arch.queue_depth = 64;

    RunResult rs = simulate(serial, reqs);
    RunResult rd = simulate(deep, reqs);
    CHECK(rd.total_cycles < rs.total_cycles);
    CHECK(rd.pcm.line_writes == rs.pcm.line_writes);
}

TEST_CASE("metadata traffic moves off the data channels through a separate port") {
    std::vector<trace::LineRequest> reqs;
    for (uint32_t i = 0; i < 500; i++) reqs.push_back(write_req(i, i % 50));

    ArchitectureConfig sep = tiny_caram();
    sep.metadata_port = MetadataPort::Separate;
    RunResult with_port = simulate(stress_config(sep), reqs);
    CHECK(with_port.metadata_port.metadata_reads > 0);
    CHECK(with_port.metadata_port.metadata_writes > 0);
    CHECK(with_port.dram.metadata_reads == 0);
    CHECK(with_port.dram.metadata_writes == 0);

    ArchitectureConfig cont = tiny_caram();
    cont.metadata_port = MetadataPort::Contending;
    RunResult inline_port = simulate(stress_config(cont), reqs);
    CHECK(inline_port.dram.metadata_reads > 0);
    CHECK(inline_port.dram.metadata_writes > 0);
    CHECK(inline_port.metadata_port.metadata_reads == 0);

    // Same decisions either way; only the booking target moves.
    CHECK(with_port.dedup.new_lines == inline_port.dedup.new_lines);
    CHECK(with_port.dedup.shared == inline_port.dedup.shared);
    CHECK(with_port.device_line_writes == inline_port.device_line_writes);
}

TEST_CASE("run accounting ties capacity, carve-outs, and occupancy together") {
    ArchitectureConfig a = tiny_caram();
    RunConfig cfg = stress_config(a);
    std::vector<trace::LineRequest> reqs;
    for (uint32_t i = 0; i < 1000; i++) reqs.push_back(write_req(i, 0x9000 + i));
    RunResult r = simulate(cfg, reqs);

    CHECK(r.capacity_bytes == 4 * kMiB);
    CHECK(r.metadata_bytes == r.config.arch.metadata_region_bytes);
    CHECK(r.usable_bytes ==
          r.capacity_bytes - r.metadata_bytes - r.config.arch.write_buffer_bytes);
    CHECK(r.live_lines == 1000);
    CHECK(r.occupation_ratio ==
          doctest::Approx(static_cast<double>(r.live_lines * kLineBytes + r.metadata_bytes) /
                          static_cast<double>(r.capacity_bytes)));
    CHECK(r.write_requests == 1000);
    CHECK(r.read_requests == 0);
    CHECK(r.total_cycles > 0);
    CHECK(r.bandwidth_bytes_per_cycle > 0.0);
    CHECK(r.energy.total_pj() > 0.0);
    CHECK(r.pcm_wear.rows > 0);
    CHECK(r.pcm_wear.max_writes >= r.pcm_wear.min_writes);

    RunConfig uncharged = cfg;
    uncharged.charge_metadata = false;
    RunResult r2 = simulate(uncharged, reqs);
    CHECK(r2.metadata_bytes == 0);
    CHECK(r2.occupation_ratio < r.occupation_ratio);
}

TEST_CASE("stress mode strips arrival pacing") {
    std::vector<trace::LineRequest> reqs;
    for (uint32_t i = 0; i < 100; i++) {
        trace::LineRequest q = write_req(i);
        q.arrival_cycle = static_cast<Cycle>(i) * 1'000'000;  // sparse arrivals
        reqs.push_back(q);
    }
    RunConfig paced = stress_config(arch_preset("cal-pure-pcm"));
    paced.stress_mode = false;
    RunConfig stressed = stress_config(arch_preset("cal-pure-pcm"));

    RunResult slow = simulate(paced, reqs);
    RunResult fast = simulate(stressed, reqs);
    CHECK(slow.total_cycles >= 99'000'000);
    CHECK(fast.total_cycles < 1'000'000);
}
