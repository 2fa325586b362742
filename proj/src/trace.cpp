#include "caram/trace.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "caram/superfasthash.hpp"

namespace caram::trace {

namespace {

// All randomized choices in this file go through these two helpers so the
// output depends only on the seed, not on a library's shuffle or
// distribution implementation.
uint64_t rng_below(std::mt19937_64& rng, uint64_t n) {
    return n <= 1 ? 0 : rng() % n;
}

template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; i--) {
        std::swap(v[i - 1], v[rng_below(rng, i)]);
    }
}

bool parse_u64(std::string_view tok, uint64_t& out) {
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && p == tok.data() + tok.size();
}

// FIU timestamps appear both as integer nanosecond counts and as
// fractional seconds; a decimal point selects the latter.
bool parse_timestamp(std::string_view tok, uint64_t& out_ns) {
    if (tok.find('.') == std::string_view::npos) return parse_u64(tok, out_ns);
    double seconds = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), seconds);
    if (ec != std::errc() || p != tok.data() + tok.size() || seconds < 0) return false;
    out_ns = static_cast<uint64_t>(std::llround(seconds * 1e9));
    return true;
}

bool hex_nibble(char c, uint32_t& v) {
    if (c >= '0' && c <= '9') {
        v = static_cast<uint32_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
        v = static_cast<uint32_t>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
        v = static_cast<uint32_t>(c - 'A' + 10);
    } else {
        return false;
    }
    return true;
}

// First 4 bytes of the hex digest, read big-endian.
bool parse_hash_prefix(std::string_view hex, uint32_t& out) {
    if (hex.size() < 8) return false;
    uint32_t h = 0;
    for (int i = 0; i < 8; i++) {
        uint32_t v = 0;
        if (!hex_nibble(hex[static_cast<size_t>(i)], v)) return false;
        h = (h << 4) | v;
    }
    out = h;
    return true;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) i++;
        size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) i++;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

// Appends the per-block records of one FIU text line; false if malformed.
bool parse_fiu_line(std::string_view line, std::vector<TraceRecord>& out) {
    auto f = split_fields(line);
    if (f.size() < 9) return false;

    TraceRecord base;
    uint64_t pid = 0, size_bytes = 0, major = 0, minor = 0;
    if (!parse_timestamp(f[0], base.timestamp_ns)) return false;
    if (!parse_u64(f[1], pid)) return false;  // pid and process are ignored
    if (!parse_u64(f[3], base.block_lba)) return false;
    if (!parse_u64(f[4], size_bytes)) return false;
    if (f[5].size() != 1) return false;
    char op = static_cast<char>(std::tolower(static_cast<unsigned char>(f[5][0])));
    if (op == 'w') {
        base.op = IoOp::Write;
    } else if (op == 'r') {
        base.op = IoOp::Read;
    } else {
        return false;
    }
    if (!parse_u64(f[6], major) || !parse_u64(f[7], minor)) return false;
    base.device_id = static_cast<uint32_t>((major << 8) | (minor & 0xff));
    if (!parse_hash_prefix(f[8], base.block_hash)) return false;

    uint64_t blocks = std::max<uint64_t>(1, (size_bytes + kBlockBytes - 1) / kBlockBytes);
    for (uint64_t b = 0; b < blocks; b++) {
        TraceRecord r = base;
        r.block_lba = base.block_lba + b;
        r.block_count = 1;
        out.push_back(r);
    }
    return true;
}

void put_u16(std::string& s, uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
}
void put_u32(std::string& s, uint32_t v) {
    put_u16(s, static_cast<uint16_t>(v & 0xffff));
    put_u16(s, static_cast<uint16_t>(v >> 16));
}
void put_u64(std::string& s, uint64_t v) {
    put_u32(s, static_cast<uint32_t>(v & 0xffffffff));
    put_u32(s, static_cast<uint32_t>(v >> 32));
}

struct ByteReader {
    std::string_view bytes;
    size_t pos = 0;

    bool take(void* dst, size_t n) {
        if (bytes.size() - pos < n) return false;
        std::memcpy(dst, bytes.data() + pos, n);
        pos += n;
        return true;
    }
    bool u8(uint8_t& v) { return take(&v, 1); }
    bool u16(uint16_t& v) {
        uint8_t b[2];
        if (!take(b, 2)) return false;
        v = static_cast<uint16_t>(b[0] | (b[1] << 8));
        return true;
    }
    bool u32(uint32_t& v) {
        uint16_t lo, hi;
        if (!u16(lo) || !u16(hi)) return false;
        v = lo | (static_cast<uint32_t>(hi) << 16);
        return true;
    }
    bool u64(uint64_t& v) {
        uint32_t lo, hi;
        if (!u32(lo) || !u32(hi)) return false;
        v = lo | (static_cast<uint64_t>(hi) << 32);
        return true;
    }
};

constexpr char kNativeMagic[4] = {'C', 'L', 'T', '1'};
constexpr uint16_t kNativeVersion = 1;
constexpr uint8_t kNativeRecordBytes = 29;

std::string read_file_gz(const std::string& path) {
    // gzread is transparent: it inflates gzip input and passes plain
    // bytes through unchanged.
    gzFile gz = gzopen(path.c_str(), "rb");
    if (gz == nullptr) throw FormatError("cannot open trace file: " + path);
    std::string out;
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(gz, buf, sizeof buf)) > 0) {
        out.append(buf, static_cast<size_t>(n));
    }
    bool bad = n < 0;
    gzclose(gz);
    if (bad) throw FormatError("gzip read failed: " + path);
    return out;
}

}  // namespace

std::vector<TraceRecord> parse_fiu(std::istream& in, ParseStats* stats) {
    std::vector<TraceRecord> out;
    ParseStats st;
    std::string line;
    uint64_t first_bad_line = 0;
    while (std::getline(in, line)) {
        st.input_lines++;
        std::string_view sv(line);
        size_t ws = sv.find_first_not_of(" \t\r\n");
        if (ws == std::string_view::npos || sv[ws] == '#') continue;
        if (!parse_fiu_line(sv, out)) {
            st.skipped_lines++;
            if (first_bad_line == 0) first_bad_line = st.input_lines;
        }
    }
    if (st.skipped_lines * 100 > st.input_lines) {
        throw FormatError("trace is not in the expected text layout (first bad line " +
                          std::to_string(first_bad_line) + ", " +
                          std::to_string(st.skipped_lines) + " of " +
                          std::to_string(st.input_lines) + " lines malformed)");
    }
    st.records = out.size();
    if (stats != nullptr) *stats = st;
    return out;
}

std::string serialize_native(std::span<const TraceRecord> records) {
    std::string out;
    out.reserve(16 + records.size() * (kNativeRecordBytes + 1));
    out.append(kNativeMagic, 4);
    put_u16(out, kNativeVersion);
    put_u64(out, records.size());
    for (const TraceRecord& r : records) {
        out.push_back(static_cast<char>(kNativeRecordBytes));
        put_u64(out, r.timestamp_ns);
        put_u32(out, r.device_id);
        put_u64(out, r.block_lba);
        put_u32(out, r.block_count);
        out.push_back(static_cast<char>(r.op == IoOp::Write ? 1 : 0));
        put_u32(out, r.block_hash);
    }
    return out;
}

std::vector<TraceRecord> parse_native(std::string_view bytes, ParseStats* stats) {
    ByteReader rd{bytes};
    char magic[4];
    if (!rd.take(magic, 4) || std::memcmp(magic, kNativeMagic, 4) != 0) {
        throw FormatError("native trace magic mismatch");
    }
    uint16_t version = 0;
    if (!rd.u16(version)) throw FormatError("native trace truncated in header");
    if (version != kNativeVersion) {
        throw FormatError("unsupported native trace version " + std::to_string(version));
    }
    uint64_t count = 0;
    if (!rd.u64(count)) throw FormatError("native trace truncated in header");

    std::vector<TraceRecord> out;
    out.reserve(count);
    for (uint64_t i = 0; i < count; i++) {
        uint8_t len = 0;
        if (!rd.u8(len) || len < kNativeRecordBytes) {
            throw FormatError("native trace truncated at record " + std::to_string(i));
        }
        TraceRecord r;
        uint8_t op = 0;
        bool ok = rd.u64(r.timestamp_ns) && rd.u32(r.device_id) && rd.u64(r.block_lba) &&
                  rd.u32(r.block_count) && rd.u8(op) && rd.u32(r.block_hash);
        if (!ok) throw FormatError("native trace truncated at record " + std::to_string(i));
        if (op > 1) throw FormatError("native trace bad op at record " + std::to_string(i));
        r.op = op == 1 ? IoOp::Write : IoOp::Read;
        // Bytes past the known layout belong to a newer minor revision.
        for (uint8_t skip = kNativeRecordBytes; skip < len; skip++) {
            uint8_t dummy;
            if (!rd.u8(dummy)) throw FormatError("native trace truncated at record " + std::to_string(i));
        }
        out.push_back(r);
    }
    if (stats != nullptr) {
        *stats = ParseStats{};
        stats->records = out.size();
    }
    return out;
}

void save_native(const std::string& path, std::span<const TraceRecord> records) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot write trace file: " + path);
    std::string bytes = serialize_native(records);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw FormatError("short write: " + path);
}

std::vector<TraceRecord> load_trace(const std::string& path, TraceFormat format,
                                    ParseStats* stats) {
    std::string bytes = read_file_gz(path);
    if (format == TraceFormat::Native) return parse_native(bytes, stats);
    std::istringstream in(bytes);
    return parse_fiu(in, stats);
}

std::vector<LineRequest> expand_to_lines(std::span<const TraceRecord> records,
                                         const ExpandOptions& opt) {
    std::vector<LineRequest> out;
    uint64_t total_blocks = 0;
    for (const TraceRecord& r : records) total_blocks += r.block_count;
    out.reserve(total_blocks * kLinesPerBlock);

    for (const TraceRecord& r : records) {
        Cycle arrival =
            static_cast<Cycle>(static_cast<double>(r.timestamp_ns) * opt.cycles_per_ns);
        if (r.op == IoOp::Write) arrival += opt.hash_cycles_per_line;
        for (uint64_t b = 0; b < r.block_count; b++) {
            // 64-bit lbas wrap into the 32-bit line address space; trace
            // footprints are far below 1G lines so aliasing is not seen
            // in practice.
            Lla base = static_cast<Lla>((r.block_lba + b) * kLinesPerBlock);
            for (uint32_t i = 0; i < kLinesPerBlock; i++) {
                LineRequest q;
                q.arrival_cycle = arrival;
                q.lla = base + i;
                q.op = r.op;
                // Block traces carry one digest per block, so all 16
                // lines of a block share its fingerprint.
                q.lfp = r.block_hash;
                out.push_back(q);
            }
        }
    }
    return out;
}

void SyntheticSpec::validate() const {
    if (total_lines == 0) throw ValidationError("synthetic: total_lines must be positive");
    if (!(unique_fraction > 0.0) || unique_fraction > 1.0) {
        throw ValidationError("synthetic: unique_fraction must be in (0, 1]");
    }
    if (read_fraction < 0.0 || read_fraction > 1.0) {
        throw ValidationError("synthetic: read_fraction must be in [0, 1]");
    }
    if (address_space_lines == 0) {
        throw ValidationError("synthetic: address_space_lines must be positive");
    }
    if (unique_fraction * static_cast<double>(total_lines) < 1.0) {
        throw ValidationError("synthetic: unique_fraction * total_lines must be at least 1");
    }
}

namespace {

// Distinct fingerprint values; with payloads, distinct contents whose
// hashes are also pairwise distinct (hash collisions are regenerated so
// the requested unique count is met exactly).
struct FingerprintPool {
    std::vector<Lfp> fps;
    std::vector<LinePayload> payloads;  // empty unless with_payload

    static FingerprintPool make(uint64_t count, bool with_payload, std::mt19937_64& rng) {
        FingerprintPool pool;
        pool.fps.reserve(count);
        std::unordered_set<Lfp> seen;
        seen.reserve(count * 2);
        while (pool.fps.size() < count) {
            if (with_payload) {
                auto data = std::make_shared<LineData>();
                for (size_t i = 0; i < kLineBytes; i += 8) {
                    uint64_t v = rng();
                    std::memcpy(data->data() + i, &v, 8);
                }
                Lfp fp = superfasthash(data->data(), data->size());
                if (!seen.insert(fp).second) continue;
                pool.fps.push_back(fp);
                pool.payloads.push_back(std::move(data));
            } else {
                Lfp fp = static_cast<Lfp>(rng());
                if (!seen.insert(fp).second) continue;
                pool.fps.push_back(fp);
            }
        }
        return pool;
    }

    LinePayload payload_of(uint64_t idx) const {
        return payloads.empty() ? nullptr : payloads[idx];
    }
};

struct WritePlan {
    uint64_t fp_index;
    Lla lla;
};

// Zero-death construction. Emits exactly A distinct addresses and U
// distinct fingerprints over W writes such that every fingerprint keeps
// at least one holder to the end of the trace:
//   - singles: one fresh address, one fresh fingerprint;
//   - share groups: m fresh addresses written with one fresh fingerprint,
//     the first member address is never overwritten;
//   - reshares: overwrite a non-first share member with another group's
//     fingerprint, spread round-robin so no refcount saturates.
// A deduplicating store therefore performs exactly U line writes and
// holds exactly U lines at the end.
std::vector<WritePlan> plan_structural(uint64_t writes, uint64_t unique, uint64_t addresses,
                                       std::mt19937_64& rng) {
    const uint64_t excess = addresses - unique;   // extra addresses, absorbed by shares
    const uint64_t reshares = writes - addresses;  // overwrites of share members

    // Smallest share size whose group count still leaves singles >= 0.
    uint64_t m = 2;
    uint64_t groups = 0;
    if (excess > 0) {
        while ((groups = (excess + m - 2) / (m - 1)) > unique) m++;
    }
    uint64_t full_groups = excess / (m - 1);
    uint64_t remainder = excess % (m - 1);  // one extra group of size remainder+1
    uint64_t n_groups = full_groups + (remainder > 0 ? 1 : 0);
    uint64_t n_singles = unique - n_groups;

    struct Atom {
        uint64_t fp_index;
        uint64_t members;  // 1 for singles
    };
    std::vector<Atom> atoms;
    atoms.reserve(n_singles + n_groups);
    uint64_t fp = 0;
    for (uint64_t i = 0; i < n_singles; i++) atoms.push_back({fp++, 1});
    for (uint64_t i = 0; i < full_groups; i++) atoms.push_back({fp++, m});
    if (remainder > 0) atoms.push_back({fp++, remainder + 1});
    seeded_shuffle(atoms, rng);

    // Reshare slots are spread over the atom walk; any that come due
    // before a share group exists are deferred.
    std::vector<uint64_t> reshare_after(atoms.size(), 0);
    for (uint64_t i = 0; i < reshares; i++) {
        reshare_after[rng_below(rng, atoms.size())]++;
    }

    std::vector<Lla> addr_perm(addresses);
    for (uint64_t i = 0; i < addresses; i++) addr_perm[i] = static_cast<Lla>(i);
    seeded_shuffle(addr_perm, rng);

    std::vector<WritePlan> plan;
    plan.reserve(writes);
    uint64_t next_addr = 0;

    struct Member {
        Lla lla;
        uint64_t current_fp;
    };
    std::vector<Member> recyclable;       // share members open to overwrite
    std::vector<uint64_t> anchor_fps;     // fingerprints of emitted share groups
    uint64_t recycle_cursor = 0;
    uint64_t anchor_cursor = 0;
    uint64_t deferred = 0;

    auto emit_reshares = [&](uint64_t n) {
        if (anchor_fps.empty()) {
            deferred += n;
            return;
        }
        n += deferred;
        deferred = 0;
        for (uint64_t i = 0; i < n; i++) {
            Member& target = recyclable[recycle_cursor++ % recyclable.size()];
            uint64_t h = anchor_fps[anchor_cursor++ % anchor_fps.size()];
            if (h == target.current_fp && anchor_fps.size() > 1) {
                h = anchor_fps[anchor_cursor++ % anchor_fps.size()];
            }
            // With a single anchor group the rewrite can repeat the
            // standing fingerprint; that is a dropped duplicate, which
            // keeps every guarantee.
            plan.push_back({h, target.lla});
            target.current_fp = h;
        }
    };

    for (size_t a = 0; a < atoms.size(); a++) {
        const Atom& atom = atoms[a];
        for (uint64_t j = 0; j < atom.members; j++) {
            Lla lla = addr_perm[next_addr++];
            plan.push_back({atom.fp_index, lla});
            if (j > 0) recyclable.push_back({lla, atom.fp_index});
        }
        if (atom.members > 1) anchor_fps.push_back(atom.fp_index);
        emit_reshares(reshare_after[a]);
    }
    emit_reshares(0);
    return plan;
}

// Fallback when the zero-death layout is impossible (address space too
// small to hold every fingerprint). Addresses wrap, so fingerprints can
// lose all holders and a deduplicating store may rewrite them later.
std::vector<WritePlan> plan_wrapped(uint64_t writes, uint64_t unique, uint64_t addresses,
                                    std::mt19937_64& rng) {
    std::vector<uint64_t> multiset;
    multiset.reserve(writes);
    for (uint64_t i = 0; i < unique; i++) multiset.push_back(i);
    for (uint64_t i = unique; i < writes; i++) multiset.push_back(rng_below(rng, unique));
    seeded_shuffle(multiset, rng);

    std::vector<WritePlan> plan;
    plan.reserve(writes);
    for (uint64_t i = 0; i < writes; i++) {
        plan.push_back({multiset[i], static_cast<Lla>(i % addresses)});
    }
    return plan;
}

}  // namespace

std::vector<LineRequest> generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.rng_seed);

    const uint64_t total = spec.total_lines;
    const uint64_t reads = static_cast<uint64_t>(
        std::llround(spec.read_fraction * static_cast<double>(total)));
    const uint64_t writes = total - reads;
    // The small epsilon absorbs product rounding when unique_fraction is
    // an exact ratio like 172125/245662.
    const uint64_t unique =
        writes == 0 ? 0
                    : static_cast<uint64_t>(std::ceil(
                          spec.unique_fraction * static_cast<double>(writes) - 1e-9));
    const uint64_t addresses = std::min<uint64_t>(spec.address_space_lines, writes);

    FingerprintPool pool = FingerprintPool::make(unique, spec.with_payload, rng);

    std::vector<WritePlan> plan;
    if (writes > 0) {
        bool reshares_feasible = addresses >= unique + (writes > addresses ? 1 : 0);
        // Shares larger than the refcount ceiling or reshare fan-in near
        // it would saturate counters and break the exact-write guarantee.
        if (reshares_feasible && addresses > unique) {
            uint64_t worst_m = (addresses - unique) / std::max<uint64_t>(unique, 1) + 2;
            uint64_t n_anchor_min = std::max<uint64_t>(1, (addresses - unique) / (worst_m - 1));
            if (worst_m > 30000 ||
                (writes - addresses + n_anchor_min - 1) / n_anchor_min > 30000) {
                reshares_feasible = false;
            }
        }
        plan = reshares_feasible ? plan_structural(writes, unique, addresses, rng)
                                 : plan_wrapped(writes, unique, addresses, rng);
    }

    // Interleave reads into the write stream.
    std::vector<uint8_t> is_read(total, 0);
    for (uint64_t i = writes; i < total; i++) is_read[i] = 1;
    seeded_shuffle(is_read, rng);

    std::vector<LineRequest> out;
    out.reserve(total);
    std::vector<Lla> written;
    written.reserve(writes);
    size_t w = 0;
    for (uint64_t i = 0; i < total; i++) {
        LineRequest q;
        q.arrival_cycle = 0;
        if (is_read[i]) {
            q.op = IoOp::Read;
            // Reads hit previously written lines; one landing before any
            // write becomes a plain miss.
            q.lla = written.empty() ? 0 : written[rng_below(rng, written.size())];
        } else {
            const WritePlan& p = plan[w++];
            q.op = IoOp::Write;
            q.lla = p.lla;
            q.lfp = pool.fps[p.fp_index];
            q.payload = pool.payload_of(p.fp_index);
            written.push_back(p.lla);
        }
        out.push_back(std::move(q));
    }
    return out;
}

TraceSummary summarize(std::span<const TraceRecord> records) {
    TraceSummary s;
    std::unordered_set<uint32_t> read_hashes, write_hashes;
    for (const TraceRecord& r : records) {
        if (r.op == IoOp::Read) {
            s.read_blocks += r.block_count;
            read_hashes.insert(r.block_hash);
        } else {
            s.write_blocks += r.block_count;
            write_hashes.insert(r.block_hash);
        }
    }
    s.unique_read_hashes = read_hashes.size();
    s.unique_write_hashes = write_hashes.size();
    return s;
}

void stress_mode_transform(std::vector<LineRequest>& requests) {
    for (LineRequest& q : requests) q.arrival_cycle = 0;
}

LineSummary summarize_lines(std::span<const LineRequest> requests) {
    LineSummary s;
    std::unordered_set<Lfp> fps;
    std::unordered_set<Lla> llas;
    for (const LineRequest& q : requests) {
        if (q.op == IoOp::Read) {
            s.reads++;
        } else {
            s.writes++;
            fps.insert(q.lfp);
            llas.insert(q.lla);
        }
    }
    s.distinct_write_lfps = fps.size();
    s.distinct_write_llas = llas.size();
    return s;
}

}  // namespace caram::trace
