#ifndef CARAM_METRICS_HPP
#define CARAM_METRICS_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "caram/controller.hpp"

namespace caram::metrics {

// (live + charged metadata) / capacity. Throws InvariantError above 1:
// that means the capacity accounting is broken, not the workload.
double space_occupation_ratio(uint64_t live_bytes, uint64_t metadata_bytes,
                              uint64_t capacity_bytes);

// Payload bytes of serviced line requests per cycle. A dropped duplicate
// write still counts: the request was satisfied, just without a device
// line write.
double bandwidth_bytes_per_cycle(uint64_t serviced_line_requests, Cycle total_cycles);

// Occupation ratios scaled so the pure-DRAM run is exactly 1.
std::map<std::string, double> normalize_occupation(
    const std::vector<ctrl::RunResult>& runs);

// Serialization. JSON is schema "report_v1" with stable key order and
// lossless round-tripping; CSV is one row per run under a fixed header;
// the table form is for reading at a terminal.
std::string to_json(const ctrl::RunResult& r);
ctrl::RunResult from_json(const std::string& text);
std::string csv_header();
std::string to_csv_row(const ctrl::RunResult& r);
std::string to_table(const ctrl::RunResult& r);

// Asserts the report's internal consistency: the write partition
// (dropped + shared + updated + new = writes) for dedup runs, the
// occupation range, and per-device busy/idle accounting. Throws
// InvariantError with a description.
void check_report(const ctrl::RunResult& r);

}  // namespace caram::metrics

#endif
