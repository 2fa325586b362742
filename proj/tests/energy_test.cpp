#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "caram/energy.hpp"

using namespace caram;
using namespace caram::energy;

TEST_CASE("no activity and no time means no energy") {
    EnergyConstants c = energy_preset("default");
    EnergyBreakdown b = total_energy(DeviceActivity{}, DeviceActivity{}, c, 0);
    CHECK(b.total_pj() == 0.0);
    CHECK(b.seconds == 0.0);
}

TEST_CASE("one dram line write with background zeroed costs exactly the write constant") {
    EnergyConstants c = energy_preset("default");
    DeviceActivity a;
    a.line_writes = 1;
    a.capacity_bytes = 0;  // no standby capacity
    DeviceEnergyBreakdown b = device_energy(a, c.dram, 123.0);
    CHECK(b.total_pj() == c.dram.write_pj_per_line);
    // Holds because dram row activation is folded into the transfer cost.
    CHECK(c.dram.activate_pj == 0.0);
}

TEST_CASE("dynamic energy is linear in the access counts") {
    EnergyConstants c = energy_preset("default");
    DeviceActivity a;
    a.line_reads = 311;
    a.line_writes = 173;
    a.compare_reads = 57;
    a.metadata_reads = 1000;
    a.metadata_writes = 400;
    a.activations = 90;
    DeviceActivity twice = a;
    twice.line_reads *= 2;
    twice.line_writes *= 2;
    twice.compare_reads *= 2;
    twice.metadata_reads *= 2;
    twice.metadata_writes *= 2;
    twice.activations *= 2;
    double one = device_energy(a, c.pcm, 0.0).dynamic_pj();
    double two = device_energy(twice, c.pcm, 0.0).dynamic_pj();
    CHECK(one > 0.0);
    CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-12));
}

TEST_CASE("per-term accounting follows the constants") {
    EnergyConstants c = energy_preset("default");

    DeviceActivity a;
    a.metadata_reads = 4;
    DeviceEnergyBreakdown b = device_energy(a, c.pcm, 0.0);
    CHECK(b.metadata_pj ==
          doctest::Approx(4.0 * c.pcm.metadata_fraction * c.pcm.read_pj_per_line));

    a = DeviceActivity{};
    a.metadata_writes = 3;
    b = device_energy(a, c.pcm, 0.0);
    CHECK(b.metadata_pj ==
          doctest::Approx(3.0 * c.pcm.metadata_fraction * c.pcm.write_pj_per_line));

    a = DeviceActivity{};
    a.compare_reads = 7;
    b = device_energy(a, c.pcm, 0.0);
    CHECK(b.compare_pj == doctest::Approx(7.0 * c.pcm.read_pj_per_line));
    CHECK(b.read_pj == 0.0);

    a = DeviceActivity{};
    a.activations = 5;
    b = device_energy(a, c.pcm, 0.0);
    CHECK(b.activate_pj == doctest::Approx(5.0 * c.pcm.activate_pj));
    CHECK(b.activate_pj > 0.0);
}

TEST_CASE("background power scales with capacity and wall time") {
    EnergyConstants c = energy_preset("default");
    REQUIRE(c.clock_mhz == 3000.0);

    DeviceActivity dram;
    dram.capacity_bytes = 2'000'000'000;  // 2 GB at the 1e9 convention
    dram.refreshes = true;
    DeviceActivity pcm;
    pcm.capacity_bytes = 8'000'000'000;
    pcm.refreshes = false;

    // 3e9 cycles at 3 GHz is exactly one second.
    EnergyBreakdown b = total_energy(dram, pcm, c, 3'000'000'000ull);
    CHECK(b.seconds == doctest::Approx(1.0));
    // mW per GB * GB * s * 1e9 pJ/mJ
    CHECK(b.dram.idle_pj == doctest::Approx(c.dram.idle_mw_per_gb * 2.0 * 1e9));
    CHECK(b.dram.refresh_pj == doctest::Approx(c.dram.refresh_mw_per_gb * 2.0 * 1e9));
    CHECK(b.pcm.idle_pj == doctest::Approx(c.pcm.idle_mw_per_gb * 8.0 * 1e9));
    CHECK(b.pcm.refresh_pj == 0.0);  // non-volatile cells hold state for free

    EnergyBreakdown half = total_energy(dram, pcm, c, 1'500'000'000ull);
    CHECK(half.background_pj() == doctest::Approx(0.5 * b.background_pj()));
}

TEST_CASE("calibrated constants order the devices sensibly") {
    EnergyConstants c = energy_preset("default");
    CHECK(c.pcm.write_pj_per_line > c.dram.write_pj_per_line);
    CHECK(c.pcm.read_pj_per_line > c.dram.read_pj_per_line);
    CHECK(c.pcm.idle_mw_per_gb < c.dram.idle_mw_per_gb);
    CHECK(c.dram.refresh_mw_per_gb > 0.0);
    CHECK(c.pcm.refresh_mw_per_gb == 0.0);
    CHECK(c.dram.metadata_fraction >= 0.0);
    CHECK(c.dram.metadata_fraction <= 1.0);
    CHECK(c.pcm.metadata_fraction == c.dram.metadata_fraction);
    // 8-byte entry moved out of a 256-byte line
    CHECK(c.pcm.metadata_fraction == doctest::Approx(8.0 / 256.0));

    auto names = energy_preset_names();
    CHECK(std::find(names.begin(), names.end(), "default") != names.end());
    CHECK_THROWS_AS(energy_preset("lab-bench"), ValidationError);
}

TEST_CASE("constant validation rejects unphysical values") {
    EnergyConstants ok = energy_preset("default");
    CHECK_NOTHROW(ok.validate());

    EnergyConstants c = ok;
    c.pcm.write_pj_per_line = -1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = ok;
    c.dram.metadata_fraction = 1.5;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = ok;
    c.pcm.metadata_fraction = -0.1;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = ok;
    c.clock_mhz = 0.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = ok;
    c.dram.refresh_mw_per_gb = -2.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("counter conversion copies counts and assigns refresh by device class") {
    mem::TimingPreset t = mem::timing_preset("table1");
    mem::ChannelCounters c;
    c.line_reads = 10;
    c.line_writes = 20;
    c.compare_reads = 5;
    c.metadata_reads = 40;
    c.metadata_writes = 15;
    c.activations = 33;

    DeviceActivity dram = activity_from_counters(c, t.dram, 1 << 30);
    CHECK(dram.line_reads == 10);
    CHECK(dram.line_writes == 20);
    CHECK(dram.compare_reads == 5);
    CHECK(dram.metadata_reads == 40);
    CHECK(dram.metadata_writes == 15);
    CHECK(dram.activations == 33);
    CHECK(dram.capacity_bytes == 1 << 30);
    CHECK(dram.refreshes);

    DeviceActivity pcm = activity_from_counters(c, t.pcm, 1 << 30);
    CHECK(!pcm.refreshes);
}

TEST_CASE("halving device writes through sharing beats paying them") {
    // Same 1000-line write stream, modeled by hand: a plain hybrid pays
    // every line into the slow device; a deduplicating store with half
    // the stream duplicated pays 500 line writes plus its index traffic.
    EnergyConstants c = energy_preset("default");
    const uint64_t cap_dram = 2ull << 30;
    const uint64_t cap_pcm = 8ull << 30;
    const Cycle makespan = 1'000'000;

    DeviceActivity hy_dram;  // staging buffer: in and out once per line
    hy_dram.line_writes = 1000;
    hy_dram.line_reads = 1000;
    hy_dram.capacity_bytes = cap_dram;
    hy_dram.refreshes = true;
    DeviceActivity hy_pcm;
    hy_pcm.line_writes = 1000;
    hy_pcm.activations = 1000;
    hy_pcm.capacity_bytes = cap_pcm;

    DeviceActivity ca_dram;
    ca_dram.line_writes = 500;
    ca_dram.line_reads = 500;
    ca_dram.capacity_bytes = cap_dram;
    ca_dram.refreshes = true;
    DeviceActivity ca_pcm;
    ca_pcm.line_writes = 500;
    ca_pcm.activations = 500;
    ca_pcm.compare_reads = 500;     // one candidate fetched per duplicate
    ca_pcm.metadata_reads = 2000;   // map and index probe per request
    ca_pcm.metadata_writes = 2000;  // map and index update per request
    ca_pcm.capacity_bytes = cap_pcm;

    double hybrid = total_energy(hy_dram, hy_pcm, c, makespan).total_pj();
    double caram = total_energy(ca_dram, ca_pcm, c, makespan).total_pj();
    CHECK(caram < hybrid);
}
