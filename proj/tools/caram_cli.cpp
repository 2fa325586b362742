// caram-sim: trace-driven experiments on the four memory architectures.
//
// Exit codes: 0 success, 2 configuration or input problem, 3 invariant
// breach while running. Commands only write under their --out directory.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "caram/config.hpp"
#include "caram/controller.hpp"
#include "caram/metrics.hpp"
#include "caram/trace.hpp"

namespace fs = std::filesystem;
using namespace caram;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct CommonFlags {
    std::string out_dir = "out";
    unsigned jobs = 1;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << content;
}

// Runs entries [0, n) across `jobs` workers; results land by index so
// the output order never depends on scheduling. The first exception
// wins and is rethrown after all workers stop.
template <typename Fn>
void run_parallel(size_t n, unsigned jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned count = std::min<unsigned>(jobs, static_cast<unsigned>(n));
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Validates every entry before anything runs or gets written, so a bad
// entry cannot leave partial outputs behind.
void validate_set(const config::ExperimentSet& set) {
    for (const auto& e : set.runs) {
        ctrl::ArchitectureConfig arch = e.run.arch;
        arch.finalize(e.run.timing);
        e.run.energy.validate();
        if (e.trace.kind == config::TraceSource::Kind::Synthetic) {
            e.trace.synthetic.validate();
        } else if (!fs::exists(e.trace.path)) {
            throw ValidationError("trace file does not exist: " + e.trace.path);
        }
    }
}

int cmd_run(const std::string& config_path, const CommonFlags& common,
            const std::optional<uint64_t>& seed_override,
            const std::optional<std::string>& timing_override,
            const std::optional<std::string>& energy_override,
            const std::optional<bool>& charge_override, const std::optional<bool>& stress_override,
            bool quiet) {
    config::ExperimentSet set = config::load_experiment_set(config_path);
    for (auto& e : set.runs) {
        if (seed_override && e.trace.kind == config::TraceSource::Kind::Synthetic) {
            if (!e.trace.workload.empty()) {
                e.trace.synthetic = config::workload_spec(
                    e.trace.workload, e.trace.synthetic.total_lines, *seed_override);
            } else {
                e.trace.synthetic.rng_seed = *seed_override;
            }
        }
        if (timing_override) e.run.timing = mem::timing_preset(*timing_override);
        if (energy_override) e.run.energy = energy::energy_preset(*energy_override);
        if (charge_override) e.run.charge_metadata = *charge_override;
        if (stress_override) e.run.stress_mode = *stress_override;
    }
    validate_set(set);

    std::vector<ctrl::RunResult> results(set.runs.size());
    run_parallel(set.runs.size(), common.jobs, [&](size_t i) {
        auto requests = config::make_requests(set.runs[i].trace);
        results[i] = ctrl::simulate(set.runs[i].run, requests);
        metrics::check_report(results[i]);
    });

    fs::create_directories(common.out_dir);
    std::ostringstream csv;
    csv << metrics::csv_header() << '\n';
    for (size_t i = 0; i < results.size(); ++i) {
        write_file(fs::path(common.out_dir) / (set.runs[i].label + ".json"),
                   metrics::to_json(results[i]));
        csv << metrics::to_csv_row(results[i]) << '\n';
        if (!quiet) std::cout << metrics::to_table(results[i]) << '\n';
    }
    write_file(fs::path(common.out_dir) / "comparison.csv", csv.str());

    bool has_baseline = false;
    for (const auto& r : results) has_baseline |= r.kind == ctrl::ArchKind::PureDram;
    if (has_baseline && results.size() > 1) {
        auto normalized = metrics::normalize_occupation(results);
        std::ostringstream norm;
        norm << "arch,normalized_occupation\n";
        for (const auto& [name, value] : normalized) norm << name << ',' << value << '\n';
        write_file(fs::path(common.out_dir) / "occupation.csv", norm.str());
    }
    if (!quiet) {
        std::cout << "wrote " << results.size() << " report(s) to " << common.out_dir << '\n';
    }
    return kOk;
}

int cmd_sweep(const CommonFlags& common, uint64_t lines, uint64_t seed, double from, double to,
              double step, const std::string& arch_name, const std::string& baseline_name,
              bool stress, bool quiet) {
    if (step <= 0 || from < 0 || to > 0.95 || from > to) {
        throw ValidationError("sweep range must satisfy 0 <= from <= to <= 0.95, step > 0");
    }
    std::vector<double> points;
    for (double d = from; d <= to + 1e-9; d += step) points.push_back(d);

    ctrl::RunConfig base;
    base.timing = mem::timing_preset("table1");
    base.energy = energy::energy_preset("default");
    base.stress_mode = stress;

    struct Point {
        double dup;
        ctrl::RunResult arch;
        ctrl::RunResult baseline;
    };
    std::vector<Point> rows(points.size());

    // Validate both architectures once before running anything.
    for (const auto& name : {arch_name, baseline_name}) {
        auto a = ctrl::arch_preset(name);
        a.finalize(base.timing);
    }

    run_parallel(points.size(), common.jobs, [&](size_t i) {
        trace::SyntheticSpec spec;
        spec.total_lines = lines;
        spec.unique_fraction = 1.0 - points[i];
        spec.read_fraction = 0.0;
        spec.address_space_lines = lines;
        spec.rng_seed = seed;
        auto requests = trace::generate_synthetic(spec);

        ctrl::RunConfig cfg = base;
        cfg.arch = ctrl::arch_preset(arch_name);
        rows[i].arch = ctrl::simulate(cfg, requests);
        cfg.arch = ctrl::arch_preset(baseline_name);
        rows[i].baseline = ctrl::simulate(cfg, requests);
        rows[i].dup = points[i];
    });

    fs::create_directories(common.out_dir);
    std::ostringstream csv;
    csv << "dup_fraction," << arch_name << "_bandwidth," << baseline_name
        << "_bandwidth,ratio," << arch_name << "_cycles," << baseline_name << "_cycles\n";
    for (const auto& p : rows) {
        const double ratio = p.baseline.bandwidth_bytes_per_cycle == 0.0
                                 ? 0.0
                                 : p.arch.bandwidth_bytes_per_cycle /
                                       p.baseline.bandwidth_bytes_per_cycle;
        csv << p.dup << ',' << p.arch.bandwidth_bytes_per_cycle << ','
            << p.baseline.bandwidth_bytes_per_cycle << ',' << ratio << ','
            << p.arch.total_cycles << ',' << p.baseline.total_cycles << '\n';
    }
    write_file(fs::path(common.out_dir) / "sweep.csv", csv.str());
    if (!quiet) std::cout << csv.str();
    return kOk;
}

int cmd_trace_inspect(const std::string& path, const std::string& format) {
    const auto fmt = format == "fiu" ? trace::TraceFormat::Fiu : trace::TraceFormat::Native;
    trace::ParseStats stats;
    auto records = trace::load_trace(path, fmt, &stats);
    auto summary = trace::summarize(records);
    auto lines = trace::expand_to_lines(records);
    auto line_summary = trace::summarize_lines(lines);
    std::cout << "records               " << records.size() << '\n'
              << "skipped input lines   " << stats.skipped_lines << '\n'
              << "read blocks           " << summary.read_blocks << '\n'
              << "write blocks          " << summary.write_blocks << '\n'
              << "unique read hashes    " << summary.unique_read_hashes << '\n'
              << "unique write hashes   " << summary.unique_write_hashes << '\n'
              << "line reads            " << line_summary.reads << '\n'
              << "line writes           " << line_summary.writes << '\n'
              << "distinct write lfps   " << line_summary.distinct_write_lfps << '\n'
              << "distinct write llas   " << line_summary.distinct_write_llas << '\n';
    return kOk;
}

int cmd_trace_convert(const std::string& in_path, const std::string& out_path) {
    auto records = trace::load_trace(in_path, trace::TraceFormat::Fiu);
    trace::save_native(out_path, records);
    std::cout << "wrote " << records.size() << " records to " << out_path << '\n';
    return kOk;
}

int cmd_trace_generate(const std::string& workload, uint64_t blocks, uint64_t seed,
                       const std::string& out_path) {
    // Block-granularity synthetic trace: each request becomes one
    // 4KB-block record whose 16 lines will share the fingerprint.
    trace::SyntheticSpec spec = config::workload_spec(workload, blocks, seed);
    auto requests = trace::generate_synthetic(spec);
    std::vector<trace::TraceRecord> records;
    records.reserve(requests.size());
    for (const auto& q : requests) {
        trace::TraceRecord r;
        r.timestamp_ns = q.arrival_cycle;
        r.block_lba = q.lla;
        r.block_count = 1;
        r.op = q.op;
        r.block_hash = q.lfp;
        records.push_back(r);
    }
    trace::save_native(out_path, records);
    std::cout << "wrote " << records.size() << " records to " << out_path << '\n';
    return kOk;
}

int cmd_check(const std::string& config_path) {
    config::ExperimentSet set = config::load_experiment_set(config_path);
    validate_set(set);
    for (const auto& e : set.runs) {
        ctrl::ArchitectureConfig arch = e.run.arch;
        arch.finalize(e.run.timing);
        std::cout << e.label << ": ok";
        if (arch.kind == ctrl::ArchKind::Caram) {
            std::cout << " (metadata region " << arch.metadata_region_bytes / (1u << 20)
                      << " MiB in " << arch.dram_bytes / (1u << 20) << " MiB dram)";
        }
        std::cout << '\n';
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"caram-sim: content-aware hybrid memory simulator"};
    app.require_subcommand(1);

    CommonFlags common;

    // run
    auto* run = app.add_subcommand("run", "execute the experiments in a config file");
    std::string run_config;
    std::optional<uint64_t> run_seed;
    std::optional<std::string> run_timing, run_energy;
    std::optional<bool> run_charge, run_stress;
    bool run_quiet = false;
    run->add_option("--config", run_config, "experiment config (json)")->required();
    run->add_option("--out", common.out_dir, "output directory");
    run->add_option("--jobs", common.jobs, "parallel runs");
    run->add_option("--seed", run_seed, "override synthetic seeds");
    run->add_option("--timing-preset", run_timing, "override timing preset");
    run->add_option("--energy-preset", run_energy, "override energy preset");
    run->add_option("--charge-metadata", run_charge,
                    "count the metadata region as occupied space");
    run->add_option("--stress", run_stress, "issue requests back to back");
    run->add_flag("--quiet", run_quiet, "suppress per-run tables");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "duplicate-fraction bandwidth sweep");
    uint64_t sweep_lines = 200000, sweep_seed = 1;
    double sweep_from = 0.0, sweep_to = 0.9, sweep_step = 0.1;
    std::string sweep_arch = "cal-caram", sweep_baseline = "cal-hybrid";
    bool sweep_no_stress = false, sweep_quiet = false;
    sweep->add_option("--out", common.out_dir, "output directory");
    sweep->add_option("--jobs", common.jobs, "parallel points");
    sweep->add_option("--lines", sweep_lines, "synthetic writes per point");
    sweep->add_option("--seed", sweep_seed, "generator seed");
    sweep->add_option("--from", sweep_from, "lowest duplicate fraction");
    sweep->add_option("--to", sweep_to, "highest duplicate fraction");
    sweep->add_option("--step", sweep_step, "sweep step");
    sweep->add_option("--arch", sweep_arch, "architecture under test");
    sweep->add_option("--baseline", sweep_baseline, "baseline architecture");
    sweep->add_flag("--no-stress", sweep_no_stress, "keep trace arrival gaps");
    sweep->add_flag("--quiet", sweep_quiet, "suppress csv echo");

    // trace
    auto* tr = app.add_subcommand("trace", "trace tooling");
    tr->require_subcommand(1);
    auto* inspect = tr->add_subcommand("inspect", "print block and line statistics");
    std::string inspect_path, inspect_format = "fiu";
    inspect->add_option("--in", inspect_path, "trace file")->required();
    inspect->add_option("--format", inspect_format, "fiu or native")
        ->check(CLI::IsMember({"fiu", "native"}));
    auto* convert = tr->add_subcommand("convert", "fiu text to native binary");
    std::string convert_in, convert_out;
    convert->add_option("--in", convert_in, "fiu trace")->required();
    convert->add_option("--out", convert_out, "native output path")->required();
    auto* generate = tr->add_subcommand("generate", "write a synthetic block trace");
    std::string gen_workload, gen_out;
    uint64_t gen_blocks = 0;
    std::optional<uint64_t> gen_seed;
    generate->add_option("--workload", gen_workload, "workload preset")->required();
    generate->add_option("--blocks", gen_blocks, "request count (0 = measured scale)");
    generate->add_option("--seed", gen_seed, "generator seed")->required();
    generate->add_option("--out", gen_out, "native output path")->required();

    // check
    auto* check = app.add_subcommand("check", "validate a config without running");
    std::string check_config;
    check->add_option("--config", check_config, "experiment config (json)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (run->parsed()) {
            return cmd_run(run_config, common, run_seed, run_timing, run_energy, run_charge,
                           run_stress, run_quiet);
        }
        if (sweep->parsed()) {
            return cmd_sweep(common, sweep_lines, sweep_seed, sweep_from, sweep_to, sweep_step,
                             sweep_arch, sweep_baseline, !sweep_no_stress, sweep_quiet);
        }
        if (tr->parsed()) {
            if (inspect->parsed()) return cmd_trace_inspect(inspect_path, inspect_format);
            if (convert->parsed()) return cmd_trace_convert(convert_in, convert_out);
            if (generate->parsed())
                return cmd_trace_generate(gen_workload, gen_blocks, *gen_seed, gen_out);
        }
        if (check->parsed()) return cmd_check(check_config);
    } catch (const InvariantError& e) {
        std::cerr << "invariant: " << e.what() << '\n';
        return kRuntimeError;
    } catch (const CapacityError& e) {
        std::cerr << "capacity: " << e.what() << '\n';
        return kRuntimeError;
    } catch (const SimError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}
