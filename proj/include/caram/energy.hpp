#ifndef CARAM_ENERGY_HPP
#define CARAM_ENERGY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "caram/memdev.hpp"
#include "caram/types.hpp"

namespace caram::energy {

// Per-access and background energy for one device class. Dynamic costs
// are picojoules per 256B line transfer; a metadata entry is charged
// metadata_fraction of the matching line cost. Background power is
// milliwatts per gigabyte, converted through the model clock.
struct DeviceEnergy {
    double read_pj_per_line = 0.0;
    double write_pj_per_line = 0.0;
    double activate_pj = 0.0;
    double metadata_fraction = 0.25;
    double idle_mw_per_gb = 0.0;
    double refresh_mw_per_gb = 0.0;
};

struct EnergyConstants {
    std::string name;
    DeviceEnergy dram;
    DeviceEnergy pcm;
    // Converts cycle counts into wall time for the background terms.
    double clock_mhz = 0.0;

    void validate() const;  // throws ValidationError
};

// Named presets; "default" is the calibrated set.
EnergyConstants energy_preset(const std::string& name);
std::vector<std::string> energy_preset_names();

// Access counts and capacity for one device, as energy accounting input.
struct DeviceActivity {
    uint64_t line_reads = 0;
    uint64_t line_writes = 0;
    uint64_t compare_reads = 0;
    uint64_t metadata_reads = 0;
    uint64_t metadata_writes = 0;
    uint64_t activations = 0;
    uint64_t capacity_bytes = 0;
    bool refreshes = false;  // DRAM pays refresh, PCM does not
};

DeviceActivity activity_from_counters(const mem::ChannelCounters& c,
                                      const mem::DeviceTiming& t,
                                      uint64_t capacity_bytes);

struct DeviceEnergyBreakdown {
    double read_pj = 0.0;
    double write_pj = 0.0;
    double compare_pj = 0.0;
    double metadata_pj = 0.0;
    double activate_pj = 0.0;
    double idle_pj = 0.0;
    double refresh_pj = 0.0;

    double dynamic_pj() const {
        return read_pj + write_pj + compare_pj + metadata_pj + activate_pj;
    }
    double background_pj() const { return idle_pj + refresh_pj; }
    double total_pj() const { return dynamic_pj() + background_pj(); }
};

struct EnergyBreakdown {
    DeviceEnergyBreakdown dram;
    DeviceEnergyBreakdown pcm;
    Cycle total_cycles = 0;
    double seconds = 0.0;

    double dynamic_pj() const { return dram.dynamic_pj() + pcm.dynamic_pj(); }
    double background_pj() const { return dram.background_pj() + pcm.background_pj(); }
    double total_pj() const { return dram.total_pj() + pcm.total_pj(); }
};

DeviceEnergyBreakdown device_energy(const DeviceActivity& a, const DeviceEnergy& e,
                                    double seconds);

// Whole-run energy: per-device dynamic terms plus capacity-proportional
// background over the run's makespan.
EnergyBreakdown total_energy(const DeviceActivity& dram, const DeviceActivity& pcm,
                             const EnergyConstants& constants, Cycle total_cycles);

}  // namespace caram::energy

#endif
