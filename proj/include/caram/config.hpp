#ifndef CARAM_CONFIG_HPP
#define CARAM_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "caram/controller.hpp"
#include "caram/trace.hpp"

namespace caram::config {

// Request mix measured from the published FIU block traces, block
// granularity. space_target > 0 shrinks the synthetic address space so
// a deduplicating store saves that fraction against a frame-granular
// one; 0 keeps one address per write.
struct WorkloadShape {
    std::string name;
    uint64_t measured_reads = 0;
    uint64_t measured_writes = 0;
    uint64_t measured_unique_writes = 0;
    double space_target = 0.0;
};

const std::vector<WorkloadShape>& workload_presets();
std::vector<std::string> workload_preset_names();

// Synthetic spec reproducing a named workload's mix at total_lines
// requests (0 = the measured request count). The distinct-fingerprint
// count scales with the measured unique-write fraction and is exact at
// measured scale.
trace::SyntheticSpec workload_spec(const std::string& name, uint64_t total_lines,
                                   uint64_t seed);

// "64MiB", "8GiB", "4096", "1MB". Binary suffixes are powers of 1024,
// decimal ones powers of 1000.
uint64_t parse_size(const std::string& text);

struct TraceSource {
    enum class Kind { Synthetic, Fiu, Native };
    Kind kind = Kind::Synthetic;
    trace::SyntheticSpec synthetic;
    std::string workload;  // preset name when one was used, else empty
    std::string path;      // fiu / native
    trace::ExpandOptions expand;
};

struct ExperimentConfig {
    std::string label;  // report file stem; defaults to arch / workload names
    ctrl::RunConfig run;
    TraceSource trace;
};

struct ExperimentSet {
    std::vector<ExperimentConfig> runs;
};

// JSON experiment description: named presets or inline objects for the
// architecture, timing, and energy sections, plus one trace source.
// A top-level "runs" array holds several such entries. Unknown keys are
// rejected. Layout documented in docs/formats.md.
ExperimentSet experiment_set_from_json_text(const std::string& text);
ExperimentSet load_experiment_set(const std::string& path);

// Materializes the trace source into line requests.
std::vector<trace::LineRequest> make_requests(const TraceSource& source);

}  // namespace caram::config

#endif
