#include "caram/metrics.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace caram::metrics {

using ordered_json = nlohmann::ordered_json;

double space_occupation_ratio(uint64_t live_bytes, uint64_t metadata_bytes,
                              uint64_t capacity_bytes) {
    if (capacity_bytes == 0) throw ValidationError("occupation ratio over zero capacity");
    const uint64_t occupied = live_bytes + metadata_bytes;
    if (occupied > capacity_bytes) {
        throw InvariantError("occupied bytes exceed capacity: " + std::to_string(occupied) +
                             " > " + std::to_string(capacity_bytes));
    }
    return static_cast<double>(occupied) / static_cast<double>(capacity_bytes);
}

double bandwidth_bytes_per_cycle(uint64_t serviced_line_requests, Cycle total_cycles) {
    if (total_cycles == 0) return 0.0;
    return static_cast<double>(serviced_line_requests) * kLineBytes /
           static_cast<double>(total_cycles);
}

std::map<std::string, double> normalize_occupation(const std::vector<ctrl::RunResult>& runs) {
    const ctrl::RunResult* baseline = nullptr;
    for (const auto& r : runs) {
        if (r.kind == ctrl::ArchKind::PureDram) baseline = &r;
    }
    if (!baseline) throw ValidationError("normalization needs a pure-dram run");
    if (baseline->occupation_ratio <= 0.0) {
        throw ValidationError("pure-dram occupation is zero; nothing to normalize against");
    }
    std::map<std::string, double> out;
    for (const auto& r : runs) {
        out[r.arch_name] = r.occupation_ratio / baseline->occupation_ratio;
    }
    return out;
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "0";
    return std::string(buf, end);
}

ctrl::ArchKind kind_from_name(const std::string& s) {
    if (s == "pure-dram") return ctrl::ArchKind::PureDram;
    if (s == "pure-pcm") return ctrl::ArchKind::PurePcm;
    if (s == "hybrid") return ctrl::ArchKind::Hybrid;
    if (s == "caram") return ctrl::ArchKind::Caram;
    throw FormatError("unknown architecture kind: " + s);
}

std::string port_name(ctrl::MetadataPort p) {
    return p == ctrl::MetadataPort::Separate ? "separate" : "contending";
}

ctrl::MetadataPort port_from_name(const std::string& s) {
    if (s == "separate") return ctrl::MetadataPort::Separate;
    if (s == "contending") return ctrl::MetadataPort::Contending;
    throw FormatError("unknown metadata port: " + s);
}

std::string eviction_name(ctrl::EvictionPolicy p) {
    return p == ctrl::EvictionPolicy::Clock ? "clock" : "lru";
}

ctrl::EvictionPolicy eviction_from_name(const std::string& s) {
    if (s == "clock") return ctrl::EvictionPolicy::Clock;
    if (s == "lru") return ctrl::EvictionPolicy::Lru;
    throw FormatError("unknown eviction policy: " + s);
}

std::string device_class_name(mem::DeviceClass c) {
    return c == mem::DeviceClass::Pcm ? "pcm" : "dram";
}

mem::DeviceClass device_class_from_name(const std::string& s) {
    if (s == "pcm") return mem::DeviceClass::Pcm;
    if (s == "dram") return mem::DeviceClass::Dram;
    throw FormatError("unknown device class: " + s);
}

ordered_json counters_json(const mem::ChannelCounters& c, uint64_t banks, Cycle cycles) {
    ordered_json j;
    j["line_reads"] = c.line_reads;
    j["line_writes"] = c.line_writes;
    j["compare_reads"] = c.compare_reads;
    j["metadata_reads"] = c.metadata_reads;
    j["metadata_writes"] = c.metadata_writes;
    j["activations"] = c.activations;
    j["precharges"] = c.precharges;
    j["row_hits"] = c.row_hits;
    j["row_misses"] = c.row_misses;
    j["busy_cycles"] = c.busy_cycles;
    j["banks"] = banks;
    // Derived: every bank-cycle is either busy or idle.
    j["idle_cycles"] = banks * cycles - c.busy_cycles;
    return j;
}

mem::ChannelCounters counters_from_json(const ordered_json& j) {
    mem::ChannelCounters c;
    c.line_reads = j.at("line_reads").get<uint64_t>();
    c.line_writes = j.at("line_writes").get<uint64_t>();
    c.compare_reads = j.at("compare_reads").get<uint64_t>();
    c.metadata_reads = j.at("metadata_reads").get<uint64_t>();
    c.metadata_writes = j.at("metadata_writes").get<uint64_t>();
    c.activations = j.at("activations").get<uint64_t>();
    c.precharges = j.at("precharges").get<uint64_t>();
    c.row_hits = j.at("row_hits").get<uint64_t>();
    c.row_misses = j.at("row_misses").get<uint64_t>();
    c.busy_cycles = j.at("busy_cycles").get<uint64_t>();
    return c;
}

ordered_json device_energy_json(const energy::DeviceEnergyBreakdown& e) {
    ordered_json j;
    j["read_pj"] = e.read_pj;
    j["write_pj"] = e.write_pj;
    j["compare_pj"] = e.compare_pj;
    j["metadata_pj"] = e.metadata_pj;
    j["activate_pj"] = e.activate_pj;
    j["idle_pj"] = e.idle_pj;
    j["refresh_pj"] = e.refresh_pj;
    j["dynamic_pj"] = e.dynamic_pj();
    j["background_pj"] = e.background_pj();
    j["total_pj"] = e.total_pj();
    return j;
}

energy::DeviceEnergyBreakdown device_energy_from_json(const ordered_json& j) {
    energy::DeviceEnergyBreakdown e;
    e.read_pj = j.at("read_pj").get<double>();
    e.write_pj = j.at("write_pj").get<double>();
    e.compare_pj = j.at("compare_pj").get<double>();
    e.metadata_pj = j.at("metadata_pj").get<double>();
    e.activate_pj = j.at("activate_pj").get<double>();
    e.idle_pj = j.at("idle_pj").get<double>();
    e.refresh_pj = j.at("refresh_pj").get<double>();
    return e;
}

ordered_json device_constants_json(const energy::DeviceEnergy& d) {
    ordered_json j;
    j["read_pj_per_line"] = d.read_pj_per_line;
    j["write_pj_per_line"] = d.write_pj_per_line;
    j["activate_pj"] = d.activate_pj;
    j["metadata_fraction"] = d.metadata_fraction;
    j["idle_mw_per_gb"] = d.idle_mw_per_gb;
    j["refresh_mw_per_gb"] = d.refresh_mw_per_gb;
    return j;
}

energy::DeviceEnergy device_constants_from_json(const ordered_json& j) {
    energy::DeviceEnergy d;
    d.read_pj_per_line = j.at("read_pj_per_line").get<double>();
    d.write_pj_per_line = j.at("write_pj_per_line").get<double>();
    d.activate_pj = j.at("activate_pj").get<double>();
    d.metadata_fraction = j.at("metadata_fraction").get<double>();
    d.idle_mw_per_gb = j.at("idle_mw_per_gb").get<double>();
    d.refresh_mw_per_gb = j.at("refresh_mw_per_gb").get<double>();
    return d;
}

ordered_json timing_json(const mem::DeviceTiming& t) {
    ordered_json j;
    j["name"] = t.name;
    j["device_class"] = device_class_name(t.device_class);
    j["num_rows"] = t.num_rows;
    j["device_width_bits"] = t.device_width_bits;
    j["t_ras"] = t.t_ras;
    j["t_rcd"] = t.t_rcd;
    j["t_rc"] = t.t_rc;
    j["t_rp"] = t.t_rp;
    j["write_multiplier"] = t.write_multiplier;
    j["burst_cycles_per_line"] = t.burst_cycles_per_line;
    j["metadata_burst_cycles"] = t.metadata_burst_cycles;
    j["banks_per_rank"] = t.banks_per_rank;
    j["ranks"] = t.ranks;
    j["lines_per_row"] = t.lines_per_row;
    return j;
}

mem::DeviceTiming timing_from_json(const ordered_json& j) {
    mem::DeviceTiming t;
    t.name = j.at("name").get<std::string>();
    t.device_class = device_class_from_name(j.at("device_class").get<std::string>());
    t.num_rows = j.at("num_rows").get<uint32_t>();
    t.device_width_bits = j.at("device_width_bits").get<uint32_t>();
    t.t_ras = j.at("t_ras").get<Cycle>();
    t.t_rcd = j.at("t_rcd").get<Cycle>();
    t.t_rc = j.at("t_rc").get<Cycle>();
    t.t_rp = j.at("t_rp").get<Cycle>();
    t.write_multiplier = j.at("write_multiplier").get<double>();
    t.burst_cycles_per_line = j.at("burst_cycles_per_line").get<Cycle>();
    t.metadata_burst_cycles = j.at("metadata_burst_cycles").get<Cycle>();
    t.banks_per_rank = j.at("banks_per_rank").get<uint32_t>();
    t.ranks = j.at("ranks").get<uint32_t>();
    t.lines_per_row = j.at("lines_per_row").get<uint32_t>();
    return t;
}

ordered_json config_json(const ctrl::RunConfig& c) {
    ordered_json arch;
    arch["name"] = c.arch.name;
    arch["kind"] = arch_kind_name(c.arch.kind);
    arch["dram_bytes"] = c.arch.dram_bytes;
    arch["pcm_bytes"] = c.arch.pcm_bytes;
    arch["write_buffer_bytes"] = c.arch.write_buffer_bytes;
    arch["buffer_hi_watermark"] = c.arch.buffer_hi_watermark;
    arch["buffer_lo_watermark"] = c.arch.buffer_lo_watermark;
    arch["metadata_region_bytes"] = c.arch.metadata_region_bytes;
    arch["metadata_port"] = port_name(c.arch.metadata_port);
    arch["eviction"] = eviction_name(c.arch.eviction);
    arch["queue_depth"] = c.arch.queue_depth;
    arch["hot_epoch_cycles"] = c.arch.hot_epoch_cycles;
    arch["hot_write_threshold"] = c.arch.hot_write_threshold;
    arch["swap_cycles"] = c.arch.swap_cycles;

    ordered_json energy_j;
    energy_j["name"] = c.energy.name;
    energy_j["dram"] = device_constants_json(c.energy.dram);
    energy_j["pcm"] = device_constants_json(c.energy.pcm);
    energy_j["clock_mhz"] = c.energy.clock_mhz;

    ordered_json j;
    j["arch"] = arch;
    j["timing"] = {{"dram", timing_json(c.timing.dram)}, {"pcm", timing_json(c.timing.pcm)}};
    j["energy"] = energy_j;
    j["stress_mode"] = c.stress_mode;
    j["keep_event_log"] = c.keep_event_log;
    j["charge_metadata"] = c.charge_metadata;
    return j;
}

ctrl::RunConfig config_from_json(const ordered_json& j) {
    ctrl::RunConfig c;
    const auto& arch = j.at("arch");
    c.arch.name = arch.at("name").get<std::string>();
    c.arch.kind = kind_from_name(arch.at("kind").get<std::string>());
    c.arch.dram_bytes = arch.at("dram_bytes").get<uint64_t>();
    c.arch.pcm_bytes = arch.at("pcm_bytes").get<uint64_t>();
    c.arch.write_buffer_bytes = arch.at("write_buffer_bytes").get<uint64_t>();
    c.arch.buffer_hi_watermark = arch.at("buffer_hi_watermark").get<double>();
    c.arch.buffer_lo_watermark = arch.at("buffer_lo_watermark").get<double>();
    c.arch.metadata_region_bytes = arch.at("metadata_region_bytes").get<uint64_t>();
    c.arch.metadata_port = port_from_name(arch.at("metadata_port").get<std::string>());
    c.arch.eviction = eviction_from_name(arch.at("eviction").get<std::string>());
    c.arch.queue_depth = arch.at("queue_depth").get<uint32_t>();
    c.arch.hot_epoch_cycles = arch.at("hot_epoch_cycles").get<Cycle>();
    c.arch.hot_write_threshold = arch.at("hot_write_threshold").get<uint32_t>();
    c.arch.swap_cycles = arch.at("swap_cycles").get<Cycle>();
    c.timing.dram = timing_from_json(j.at("timing").at("dram"));
    c.timing.pcm = timing_from_json(j.at("timing").at("pcm"));
    const auto& en = j.at("energy");
    c.energy.name = en.at("name").get<std::string>();
    c.energy.dram = device_constants_from_json(en.at("dram"));
    c.energy.pcm = device_constants_from_json(en.at("pcm"));
    c.energy.clock_mhz = en.at("clock_mhz").get<double>();
    c.stress_mode = j.at("stress_mode").get<bool>();
    c.keep_event_log = j.at("keep_event_log").get<bool>();
    c.charge_metadata = j.at("charge_metadata").get<bool>();
    return c;
}

}  // namespace

std::string to_json(const ctrl::RunResult& r) {
    ordered_json j;
    j["schema"] = "report_v1";
    j["arch"] = {{"name", r.arch_name}, {"kind", arch_kind_name(r.kind)}};

    ordered_json run;
    run["total_cycles"] = r.total_cycles;
    run["seconds"] = r.energy.seconds;
    run["read_requests"] = r.read_requests;
    run["write_requests"] = r.write_requests;
    j["run"] = run;

    ordered_json space;
    space["live_lines"] = r.live_lines;
    space["live_bytes"] = r.live_lines * kLineBytes;
    space["metadata_bytes"] = r.metadata_bytes;
    space["usable_bytes"] = r.usable_bytes;
    space["capacity_bytes"] = r.capacity_bytes;
    space["occupation_ratio"] = r.occupation_ratio;
    j["space"] = space;

    ordered_json perf;
    perf["bandwidth_bytes_per_cycle"] = r.bandwidth_bytes_per_cycle;
    const uint64_t requests = r.read_requests + r.write_requests;
    perf["requests_per_kilocycle"] =
        r.total_cycles == 0
            ? 0.0
            : 1000.0 * static_cast<double>(requests) / static_cast<double>(r.total_cycles);
    j["performance"] = perf;

    ordered_json dd;
    dd["dropped"] = r.dedup.dropped;
    dd["shared"] = r.dedup.shared;
    dd["updated"] = r.dedup.updated;
    dd["new_lines"] = r.dedup.new_lines;
    dd["hash_collisions"] = r.dedup.hash_collisions;
    dd["refcount_overflows"] = r.dedup.refcount_overflows;
    dd["evicted_llas"] = r.dedup.evicted_llas;
    dd["reads_hit"] = r.dedup.reads_hit;
    dd["reads_missed"] = r.dedup.reads_missed;
    dd["device_line_writes"] = r.device_line_writes;
    j["dedup"] = dd;

    ordered_json devices;
    devices["dram"] = counters_json(r.dram, r.dram_banks, r.total_cycles);
    devices["pcm"] = counters_json(r.pcm, r.pcm_banks, r.total_cycles);
    devices["metadata_port"] = counters_json(r.metadata_port, 0, 0);
    j["devices"] = devices;

    ordered_json buf;
    buf["lines_enqueued"] = r.buffer.lines_enqueued;
    buf["lines_drained"] = r.buffer.lines_drained;
    buf["drain_episodes"] = r.buffer.drain_episodes;
    buf["full_stalls"] = r.buffer.full_stalls;
    buf["pre_flush_occupancy_lines"] = r.buffer.pre_flush_occupancy_lines;
    buf["final_occupancy_lines"] = r.buffer.final_occupancy_lines;
    j["buffer"] = buf;

    ordered_json ev;
    ev["pages_evicted"] = r.evictions.pages_evicted;
    ev["llas_evicted"] = r.evictions.llas_evicted;
    ev["read_misses"] = r.evictions.read_misses;
    ev["swap_cycles_charged"] = r.evictions.swap_cycles_charged;
    j["evictions"] = ev;

    ordered_json wear;
    wear["rows"] = r.pcm_wear.rows;
    wear["min_writes"] = r.pcm_wear.min_writes;
    wear["max_writes"] = r.pcm_wear.max_writes;
    wear["mean_writes"] = r.pcm_wear.mean_writes;
    j["pcm_wear"] = wear;

    ordered_json en;
    en["dram"] = device_energy_json(r.energy.dram);
    en["pcm"] = device_energy_json(r.energy.pcm);
    en["dynamic_pj"] = r.energy.dynamic_pj();
    en["background_pj"] = r.energy.background_pj();
    en["total_pj"] = r.energy.total_pj();
    en["total_mj"] = r.energy.total_pj() * 1e-9;
    j["energy"] = en;

    j["config"] = config_json(r.config);
    return j.dump(2) + "\n";
}

ctrl::RunResult from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("report parse: ") + e.what());
    }
    try {
        if (j.at("schema").get<std::string>() != "report_v1") {
            throw FormatError("unknown report schema: " + j.at("schema").get<std::string>());
        }
        ctrl::RunResult r;
        r.arch_name = j.at("arch").at("name").get<std::string>();
        r.kind = kind_from_name(j.at("arch").at("kind").get<std::string>());
        r.total_cycles = j.at("run").at("total_cycles").get<Cycle>();
        r.read_requests = j.at("run").at("read_requests").get<uint64_t>();
        r.write_requests = j.at("run").at("write_requests").get<uint64_t>();

        const auto& space = j.at("space");
        r.live_lines = space.at("live_lines").get<uint64_t>();
        r.metadata_bytes = space.at("metadata_bytes").get<uint64_t>();
        r.usable_bytes = space.at("usable_bytes").get<uint64_t>();
        r.capacity_bytes = space.at("capacity_bytes").get<uint64_t>();
        r.occupation_ratio = space.at("occupation_ratio").get<double>();
        r.bandwidth_bytes_per_cycle =
            j.at("performance").at("bandwidth_bytes_per_cycle").get<double>();

        const auto& dd = j.at("dedup");
        r.dedup.dropped = dd.at("dropped").get<uint64_t>();
        r.dedup.shared = dd.at("shared").get<uint64_t>();
        r.dedup.updated = dd.at("updated").get<uint64_t>();
        r.dedup.new_lines = dd.at("new_lines").get<uint64_t>();
        r.dedup.hash_collisions = dd.at("hash_collisions").get<uint64_t>();
        r.dedup.refcount_overflows = dd.at("refcount_overflows").get<uint64_t>();
        r.dedup.evicted_llas = dd.at("evicted_llas").get<uint64_t>();
        r.dedup.reads_hit = dd.at("reads_hit").get<uint64_t>();
        r.dedup.reads_missed = dd.at("reads_missed").get<uint64_t>();
        r.device_line_writes = dd.at("device_line_writes").get<uint64_t>();

        const auto& devices = j.at("devices");
        r.dram = counters_from_json(devices.at("dram"));
        r.pcm = counters_from_json(devices.at("pcm"));
        r.metadata_port = counters_from_json(devices.at("metadata_port"));
        r.dram_banks = devices.at("dram").at("banks").get<uint64_t>();
        r.pcm_banks = devices.at("pcm").at("banks").get<uint64_t>();

        const auto& buf = j.at("buffer");
        r.buffer.lines_enqueued = buf.at("lines_enqueued").get<uint64_t>();
        r.buffer.lines_drained = buf.at("lines_drained").get<uint64_t>();
        r.buffer.drain_episodes = buf.at("drain_episodes").get<uint64_t>();
        r.buffer.full_stalls = buf.at("full_stalls").get<uint64_t>();
        r.buffer.pre_flush_occupancy_lines = buf.at("pre_flush_occupancy_lines").get<uint64_t>();
        r.buffer.final_occupancy_lines = buf.at("final_occupancy_lines").get<uint64_t>();

        const auto& ev = j.at("evictions");
        r.evictions.pages_evicted = ev.at("pages_evicted").get<uint64_t>();
        r.evictions.llas_evicted = ev.at("llas_evicted").get<uint64_t>();
        r.evictions.read_misses = ev.at("read_misses").get<uint64_t>();
        r.evictions.swap_cycles_charged = ev.at("swap_cycles_charged").get<Cycle>();

        const auto& wear = j.at("pcm_wear");
        r.pcm_wear.rows = wear.at("rows").get<uint64_t>();
        r.pcm_wear.min_writes = wear.at("min_writes").get<uint32_t>();
        r.pcm_wear.max_writes = wear.at("max_writes").get<uint32_t>();
        r.pcm_wear.mean_writes = wear.at("mean_writes").get<double>();

        const auto& en = j.at("energy");
        r.energy.dram = device_energy_from_json(en.at("dram"));
        r.energy.pcm = device_energy_from_json(en.at("pcm"));
        r.energy.total_cycles = r.total_cycles;
        r.energy.seconds = j.at("run").at("seconds").get<double>();

        r.config = config_from_json(j.at("config"));
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("report fields: ") + e.what());
    }
}

std::string csv_header() {
    return "arch,kind,total_cycles,seconds,read_requests,write_requests,"
           "dropped,shared,updated,new_lines,hash_collisions,refcount_overflows,"
           "device_line_writes,live_lines,metadata_bytes,capacity_bytes,"
           "occupation_ratio,bandwidth_bytes_per_cycle,requests_per_kilocycle,"
           "dram_busy_cycles,pcm_busy_cycles,drain_episodes,full_stalls,"
           "pages_evicted,read_misses,pcm_wear_max,pcm_wear_mean,"
           "dynamic_pj,background_pj,total_pj";
}

std::string to_csv_row(const ctrl::RunResult& r) {
    const uint64_t requests = r.read_requests + r.write_requests;
    const double rpk = r.total_cycles == 0 ? 0.0
                                           : 1000.0 * static_cast<double>(requests) /
                                                 static_cast<double>(r.total_cycles);
    std::ostringstream os;
    os << r.arch_name << ',' << arch_kind_name(r.kind) << ',' << r.total_cycles << ','
       << fmt_double(r.energy.seconds) << ',' << r.read_requests << ',' << r.write_requests << ','
       << r.dedup.dropped << ',' << r.dedup.shared << ',' << r.dedup.updated << ','
       << r.dedup.new_lines << ',' << r.dedup.hash_collisions << ','
       << r.dedup.refcount_overflows << ',' << r.device_line_writes << ',' << r.live_lines << ','
       << r.metadata_bytes << ',' << r.capacity_bytes << ',' << fmt_double(r.occupation_ratio)
       << ',' << fmt_double(r.bandwidth_bytes_per_cycle) << ',' << fmt_double(rpk) << ','
       << r.dram.busy_cycles << ',' << r.pcm.busy_cycles << ',' << r.buffer.drain_episodes << ','
       << r.buffer.full_stalls << ',' << r.evictions.pages_evicted << ','
       << r.evictions.read_misses << ',' << r.pcm_wear.max_writes << ','
       << fmt_double(r.pcm_wear.mean_writes) << ',' << fmt_double(r.energy.dynamic_pj()) << ','
       << fmt_double(r.energy.background_pj()) << ',' << fmt_double(r.energy.total_pj());
    return os.str();
}

namespace {

void table_line(std::ostringstream& os, const std::string& key, const std::string& value) {
    os << "  " << key;
    for (size_t i = key.size(); i < 28; ++i) os << ' ';
    os << value << '\n';
}

}  // namespace

std::string to_table(const ctrl::RunResult& r) {
    std::ostringstream os;
    os << r.arch_name << " (" << arch_kind_name(r.kind) << ")\n";
    table_line(os, "cycles", std::to_string(r.total_cycles));
    table_line(os, "requests (r/w)",
               std::to_string(r.read_requests) + " / " + std::to_string(r.write_requests));
    table_line(os, "occupation", fmt_double(r.occupation_ratio));
    table_line(os, "bandwidth (B/cycle)", fmt_double(r.bandwidth_bytes_per_cycle));
    table_line(os, "live lines", std::to_string(r.live_lines));
    table_line(os, "metadata bytes", std::to_string(r.metadata_bytes));
    if (r.kind == ctrl::ArchKind::Caram) {
        table_line(os, "writes dropped", std::to_string(r.dedup.dropped));
        table_line(os, "writes shared", std::to_string(r.dedup.shared));
        table_line(os, "writes updated", std::to_string(r.dedup.updated));
        table_line(os, "writes new", std::to_string(r.dedup.new_lines));
        table_line(os, "hash collisions", std::to_string(r.dedup.hash_collisions));
        table_line(os, "refcount overflows", std::to_string(r.dedup.refcount_overflows));
    }
    table_line(os, "device line writes", std::to_string(r.device_line_writes));
    table_line(os, "dram busy cycles", std::to_string(r.dram.busy_cycles));
    table_line(os, "pcm busy cycles", std::to_string(r.pcm.busy_cycles));
    if (r.buffer.lines_enqueued > 0) {
        table_line(os, "buffer drains/episodes",
                   std::to_string(r.buffer.lines_drained) + " / " +
                       std::to_string(r.buffer.drain_episodes));
    }
    if (r.evictions.pages_evicted > 0) {
        table_line(os, "pages evicted", std::to_string(r.evictions.pages_evicted));
    }
    table_line(os, "pcm wear (max/mean)",
               std::to_string(r.pcm_wear.max_writes) + " / " + fmt_double(r.pcm_wear.mean_writes));
    table_line(os, "energy dynamic (pJ)", fmt_double(r.energy.dynamic_pj()));
    table_line(os, "energy background (pJ)", fmt_double(r.energy.background_pj()));
    table_line(os, "energy total (pJ)", fmt_double(r.energy.total_pj()));
    return os.str();
}

void check_report(const ctrl::RunResult& r) {
    if (r.kind == ctrl::ArchKind::Caram) {
        const uint64_t partition =
            r.dedup.dropped + r.dedup.shared + r.dedup.updated + r.dedup.new_lines;
        if (partition != r.write_requests) {
            throw InvariantError("write partition " + std::to_string(partition) +
                                 " != write requests " + std::to_string(r.write_requests));
        }
    }
    if (r.occupation_ratio < 0.0 || r.occupation_ratio > 1.0) {
        throw InvariantError("occupation ratio out of range: " +
                             fmt_double(r.occupation_ratio));
    }
    if (r.dram.busy_cycles > r.dram_banks * r.total_cycles) {
        throw InvariantError("dram busy cycles exceed bank-cycles");
    }
    if (r.pcm.busy_cycles > r.pcm_banks * r.total_cycles) {
        throw InvariantError("pcm busy cycles exceed bank-cycles");
    }
}

}  // namespace caram::metrics
