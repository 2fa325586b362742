#include "caram/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace caram::config {

using nlohmann::json;

const std::vector<WorkloadShape>& workload_presets() {
    static const std::vector<WorkloadShape> presets = {
        // name, reads, writes, distinct write contents, space target
        {"mail", 157012, 212253, 108664, 0.30},
        {"web-vm", 42679, 383539, 146491, 0.24},
        {"homes", 7368, 389559, 243040, 0.0},
        {"web-users", 6042, 245662, 172125, 0.0},
    };
    return presets;
}

std::vector<std::string> workload_preset_names() {
    std::vector<std::string> names;
    for (const auto& w : workload_presets()) names.push_back(w.name);
    return names;
}

trace::SyntheticSpec workload_spec(const std::string& name, uint64_t total_lines,
                                   uint64_t seed) {
    const WorkloadShape* shape = nullptr;
    for (const auto& w : workload_presets()) {
        if (w.name == name) shape = &w;
    }
    if (!shape) throw ValidationError("unknown workload preset: " + name);

    const uint64_t measured_total = shape->measured_reads + shape->measured_writes;
    const uint64_t total = total_lines == 0 ? measured_total : total_lines;

    trace::SyntheticSpec spec;
    spec.total_lines = total;
    spec.read_fraction =
        static_cast<double>(shape->measured_reads) / static_cast<double>(measured_total);
    spec.unique_fraction = static_cast<double>(shape->measured_unique_writes) /
                           static_cast<double>(shape->measured_writes);
    spec.rng_seed = seed;

    // Mirror the generator's own derivation so the address target is
    // computed from the counts it will actually use.
    const uint64_t reads = static_cast<uint64_t>(
        std::llround(spec.read_fraction * static_cast<double>(total)));
    const uint64_t writes = total - reads;
    const uint64_t unique =
        writes == 0 ? 0
                    : static_cast<uint64_t>(std::ceil(
                          spec.unique_fraction * static_cast<double>(writes) - 1e-9));
    if (shape->space_target > 0.0) {
        spec.address_space_lines = static_cast<uint64_t>(
            std::ceil(static_cast<double>(unique) / (1.0 - shape->space_target) - 1e-9));
    } else {
        spec.address_space_lines = total;  // clamped to the write count
    }
    return spec;
}

uint64_t parse_size(const std::string& text) {
    if (text.empty()) throw ValidationError("empty size");
    size_t i = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    if (i == 0) throw ValidationError("size must start with digits: " + text);
    uint64_t value = 0;
    try {
        value = std::stoull(text.substr(0, i));
    } catch (const std::exception&) {
        throw ValidationError("size out of range: " + text);
    }
    std::string suffix = text.substr(i);
    if (suffix.empty()) return value;
    static const std::vector<std::pair<std::string, uint64_t>> suffixes = {
        {"KiB", 1ull << 10}, {"MiB", 1ull << 20}, {"GiB", 1ull << 30},
        {"KB", 1000ull},     {"MB", 1000000ull},  {"GB", 1000000000ull},
        {"B", 1ull},
    };
    for (const auto& [name, mult] : suffixes) {
        if (suffix == name) {
            if (value > UINT64_MAX / mult) throw ValidationError("size overflows: " + text);
            return value * mult;
        }
    }
    throw ValidationError("unknown size suffix: " + text);
}

namespace {

uint64_t size_field(const json& j, const char* key, uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_string()) return parse_size(v.get<std::string>());
    return v.get<uint64_t>();
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) {
            throw ValidationError(where + ": unknown key \"" + key + "\"");
        }
    }
}

ctrl::ArchitectureConfig arch_from_json(const json& j) {
    ctrl::ArchitectureConfig arch;
    if (j.is_string()) return ctrl::arch_preset(j.get<std::string>());
    reject_unknown_keys(j,
                        {"preset", "name", "kind", "dram_bytes", "pcm_bytes",
                         "write_buffer_bytes", "buffer_hi_watermark", "buffer_lo_watermark",
                         "metadata_region_bytes", "metadata_port", "eviction", "queue_depth",
                         "hot_epoch_cycles", "hot_write_threshold", "swap_cycles"},
                        "arch");
    if (j.contains("preset")) {
        arch = ctrl::arch_preset(j.at("preset").get<std::string>());
    } else {
        if (!j.contains("kind")) throw ValidationError("arch: needs a preset or a kind");
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "pure-dram") arch.kind = ctrl::ArchKind::PureDram;
        else if (kind == "pure-pcm") arch.kind = ctrl::ArchKind::PurePcm;
        else if (kind == "hybrid") arch.kind = ctrl::ArchKind::Hybrid;
        else if (kind == "caram") arch.kind = ctrl::ArchKind::Caram;
        else throw ValidationError("arch: unknown kind \"" + kind + "\"");
        arch.name = kind;
    }
    if (j.contains("name")) arch.name = j.at("name").get<std::string>();
    arch.dram_bytes = size_field(j, "dram_bytes", arch.dram_bytes);
    arch.pcm_bytes = size_field(j, "pcm_bytes", arch.pcm_bytes);
    arch.write_buffer_bytes = size_field(j, "write_buffer_bytes", arch.write_buffer_bytes);
    arch.metadata_region_bytes = size_field(j, "metadata_region_bytes", arch.metadata_region_bytes);
    if (j.contains("buffer_hi_watermark"))
        arch.buffer_hi_watermark = j.at("buffer_hi_watermark").get<double>();
    if (j.contains("buffer_lo_watermark"))
        arch.buffer_lo_watermark = j.at("buffer_lo_watermark").get<double>();
    if (j.contains("metadata_port")) {
        const std::string p = j.at("metadata_port").get<std::string>();
        if (p == "separate") arch.metadata_port = ctrl::MetadataPort::Separate;
        else if (p == "contending") arch.metadata_port = ctrl::MetadataPort::Contending;
        else throw ValidationError("arch: unknown metadata_port \"" + p + "\"");
    }
    if (j.contains("eviction")) {
        const std::string p = j.at("eviction").get<std::string>();
        if (p == "lru") arch.eviction = ctrl::EvictionPolicy::Lru;
        else if (p == "clock") arch.eviction = ctrl::EvictionPolicy::Clock;
        else throw ValidationError("arch: unknown eviction \"" + p + "\"");
    }
    if (j.contains("queue_depth")) arch.queue_depth = j.at("queue_depth").get<uint32_t>();
    if (j.contains("hot_epoch_cycles"))
        arch.hot_epoch_cycles = j.at("hot_epoch_cycles").get<Cycle>();
    if (j.contains("hot_write_threshold"))
        arch.hot_write_threshold = j.at("hot_write_threshold").get<uint32_t>();
    if (j.contains("swap_cycles")) arch.swap_cycles = j.at("swap_cycles").get<Cycle>();
    return arch;
}

void apply_timing_overrides(mem::DeviceTiming& t, const json& j, const std::string& where) {
    reject_unknown_keys(j,
                        {"name", "num_rows", "device_width_bits", "t_ras", "t_rcd", "t_rc",
                         "t_rp", "write_multiplier", "burst_cycles_per_line",
                         "metadata_burst_cycles", "banks_per_rank", "ranks", "lines_per_row"},
                        where);
    if (j.contains("name")) t.name = j.at("name").get<std::string>();
    if (j.contains("num_rows")) t.num_rows = j.at("num_rows").get<uint32_t>();
    if (j.contains("device_width_bits"))
        t.device_width_bits = j.at("device_width_bits").get<uint32_t>();
    if (j.contains("t_ras")) t.t_ras = j.at("t_ras").get<Cycle>();
    if (j.contains("t_rcd")) t.t_rcd = j.at("t_rcd").get<Cycle>();
    if (j.contains("t_rc")) t.t_rc = j.at("t_rc").get<Cycle>();
    if (j.contains("t_rp")) t.t_rp = j.at("t_rp").get<Cycle>();
    if (j.contains("write_multiplier"))
        t.write_multiplier = j.at("write_multiplier").get<double>();
    if (j.contains("burst_cycles_per_line"))
        t.burst_cycles_per_line = j.at("burst_cycles_per_line").get<Cycle>();
    if (j.contains("metadata_burst_cycles"))
        t.metadata_burst_cycles = j.at("metadata_burst_cycles").get<Cycle>();
    if (j.contains("banks_per_rank")) t.banks_per_rank = j.at("banks_per_rank").get<uint32_t>();
    if (j.contains("ranks")) t.ranks = j.at("ranks").get<uint32_t>();
    if (j.contains("lines_per_row")) t.lines_per_row = j.at("lines_per_row").get<uint32_t>();
}

mem::TimingPreset timing_from_json(const json& j) {
    if (j.is_string()) return mem::timing_preset(j.get<std::string>());
    reject_unknown_keys(j, {"preset", "dram", "pcm"}, "timing");
    mem::TimingPreset t = mem::timing_preset(
        j.contains("preset") ? j.at("preset").get<std::string>() : std::string("table1"));
    if (j.contains("dram")) apply_timing_overrides(t.dram, j.at("dram"), "timing.dram");
    if (j.contains("pcm")) apply_timing_overrides(t.pcm, j.at("pcm"), "timing.pcm");
    return t;
}

void apply_energy_overrides(energy::DeviceEnergy& d, const json& j, const std::string& where) {
    reject_unknown_keys(j,
                        {"read_pj_per_line", "write_pj_per_line", "activate_pj",
                         "metadata_fraction", "idle_mw_per_gb", "refresh_mw_per_gb"},
                        where);
    if (j.contains("read_pj_per_line"))
        d.read_pj_per_line = j.at("read_pj_per_line").get<double>();
    if (j.contains("write_pj_per_line"))
        d.write_pj_per_line = j.at("write_pj_per_line").get<double>();
    if (j.contains("activate_pj")) d.activate_pj = j.at("activate_pj").get<double>();
    if (j.contains("metadata_fraction"))
        d.metadata_fraction = j.at("metadata_fraction").get<double>();
    if (j.contains("idle_mw_per_gb")) d.idle_mw_per_gb = j.at("idle_mw_per_gb").get<double>();
    if (j.contains("refresh_mw_per_gb"))
        d.refresh_mw_per_gb = j.at("refresh_mw_per_gb").get<double>();
}

energy::EnergyConstants energy_from_json(const json& j) {
    if (j.is_string()) return energy::energy_preset(j.get<std::string>());
    reject_unknown_keys(j, {"preset", "dram", "pcm", "clock_mhz"}, "energy");
    energy::EnergyConstants e = energy::energy_preset(
        j.contains("preset") ? j.at("preset").get<std::string>() : std::string("default"));
    if (j.contains("dram")) apply_energy_overrides(e.dram, j.at("dram"), "energy.dram");
    if (j.contains("pcm")) apply_energy_overrides(e.pcm, j.at("pcm"), "energy.pcm");
    if (j.contains("clock_mhz")) e.clock_mhz = j.at("clock_mhz").get<double>();
    return e;
}

TraceSource trace_from_json(const json& j) {
    TraceSource src;
    reject_unknown_keys(j,
                        {"kind", "workload", "total_lines", "seed", "spec", "path",
                         "hash_cycles_per_line", "cycles_per_ns"},
                        "trace");
    const std::string kind = j.contains("kind") ? j.at("kind").get<std::string>()
                                                : std::string("synthetic");
    if (kind == "synthetic") {
        src.kind = TraceSource::Kind::Synthetic;
        const uint64_t seed = j.contains("seed") ? j.at("seed").get<uint64_t>() : 1;
        if (j.contains("workload")) {
            src.workload = j.at("workload").get<std::string>();
            const uint64_t total =
                j.contains("total_lines") ? j.at("total_lines").get<uint64_t>() : 0;
            src.synthetic = workload_spec(src.workload, total, seed);
        } else if (j.contains("spec")) {
            const auto& s = j.at("spec");
            reject_unknown_keys(s,
                                {"total_lines", "unique_fraction", "read_fraction",
                                 "address_space_lines", "rng_seed", "with_payload"},
                                "trace.spec");
            src.synthetic.total_lines = s.at("total_lines").get<uint64_t>();
            src.synthetic.unique_fraction = s.at("unique_fraction").get<double>();
            src.synthetic.read_fraction =
                s.contains("read_fraction") ? s.at("read_fraction").get<double>() : 0.0;
            src.synthetic.address_space_lines = s.contains("address_space_lines")
                                                    ? s.at("address_space_lines").get<uint64_t>()
                                                    : src.synthetic.total_lines;
            src.synthetic.rng_seed =
                s.contains("rng_seed") ? s.at("rng_seed").get<uint64_t>() : seed;
            src.synthetic.with_payload =
                s.contains("with_payload") && s.at("with_payload").get<bool>();
        } else {
            throw ValidationError("trace: synthetic needs a workload or a spec");
        }
    } else if (kind == "fiu" || kind == "native") {
        src.kind = kind == "fiu" ? TraceSource::Kind::Fiu : TraceSource::Kind::Native;
        if (!j.contains("path")) throw ValidationError("trace: " + kind + " needs a path");
        src.path = j.at("path").get<std::string>();
        if (j.contains("hash_cycles_per_line"))
            src.expand.hash_cycles_per_line = j.at("hash_cycles_per_line").get<Cycle>();
        if (j.contains("cycles_per_ns"))
            src.expand.cycles_per_ns = j.at("cycles_per_ns").get<double>();
    } else {
        throw ValidationError("trace: unknown kind \"" + kind + "\"");
    }
    return src;
}

ExperimentConfig experiment_from_json_obj(const json& j, bool top_level) {
    std::set<std::string> known = {"name",   "arch",   "timing",         "energy",
                                   "trace",  "stress", "charge_metadata", "keep_event_log"};
    if (top_level) known.insert("version");
    reject_unknown_keys(j, known, "config");
    ExperimentConfig cfg;
    if (j.contains("name")) cfg.label = j.at("name").get<std::string>();
    cfg.run.arch =
        j.contains("arch") ? arch_from_json(j.at("arch")) : ctrl::arch_preset("caram");
    cfg.run.timing = j.contains("timing") ? timing_from_json(j.at("timing"))
                                          : mem::timing_preset("table1");
    cfg.run.energy = j.contains("energy") ? energy_from_json(j.at("energy"))
                                          : energy::energy_preset("default");
    if (j.contains("stress")) cfg.run.stress_mode = j.at("stress").get<bool>();
    if (j.contains("charge_metadata"))
        cfg.run.charge_metadata = j.at("charge_metadata").get<bool>();
    if (j.contains("keep_event_log"))
        cfg.run.keep_event_log = j.at("keep_event_log").get<bool>();
    if (!j.contains("trace")) throw ValidationError("config: missing trace section");
    cfg.trace = trace_from_json(j.at("trace"));
    if (cfg.label.empty()) {
        cfg.label = cfg.run.arch.name;
        if (!cfg.trace.workload.empty()) cfg.label += "-" + cfg.trace.workload;
    }
    return cfg;
}

}  // namespace

ExperimentSet experiment_set_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("config parse: ") + e.what());
    }
    try {
        if (j.contains("version") && j.at("version").get<int>() != 1) {
            throw ValidationError("config: unsupported version");
        }
        ExperimentSet set;
        if (j.contains("runs")) {
            reject_unknown_keys(j, {"version", "runs"}, "config");
            if (!j.at("runs").is_array() || j.at("runs").empty()) {
                throw ValidationError("config: runs must be a non-empty array");
            }
            for (const auto& entry : j.at("runs")) {
                set.runs.push_back(experiment_from_json_obj(entry, false));
            }
        } else {
            set.runs.push_back(experiment_from_json_obj(j, true));
        }
        std::set<std::string> labels;
        for (auto& r : set.runs) {
            // Duplicate labels would overwrite each other's reports.
            std::string label = r.label;
            for (int n = 2; !labels.insert(label).second; ++n) {
                label = r.label + "-" + std::to_string(n);
            }
            r.label = label;
        }
        return set;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config fields: ") + e.what());
    }
}

ExperimentSet load_experiment_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return experiment_set_from_json_text(buf.str());
}

std::vector<trace::LineRequest> make_requests(const TraceSource& source) {
    switch (source.kind) {
        case TraceSource::Kind::Synthetic:
            return trace::generate_synthetic(source.synthetic);
        case TraceSource::Kind::Fiu: {
            auto records = trace::load_trace(source.path, trace::TraceFormat::Fiu);
            return trace::expand_to_lines(records, source.expand);
        }
        case TraceSource::Kind::Native: {
            auto records = trace::load_trace(source.path, trace::TraceFormat::Native);
            return trace::expand_to_lines(records, source.expand);
        }
    }
    throw ValidationError("unreachable trace kind");
}

}  // namespace caram::config
