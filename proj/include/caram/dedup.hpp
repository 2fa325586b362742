#ifndef CARAM_DEDUP_HPP
#define CARAM_DEDUP_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "caram/types.hpp"

namespace caram::dedup {

// Metadata footprint for a deduplicating store: one 8-byte address map
// entry and one 10-byte fingerprint index entry per line of capacity.
struct MetadataBudget {
    uint64_t capacity_bytes = 0;
    uint64_t lines = 0;
    uint64_t amt_bytes = 0;  // lla -> pla, 8 B per entry
    uint64_t lfi_bytes = 0;  // lfp -> (pla, refcount), 10 B per entry

    uint64_t total_bytes() const { return amt_bytes + lfi_bytes; }
};
MetadataBudget metadata_budget(uint64_t capacity_bytes);

inline constexpr uint16_t kRefCountMax = 65535;

// How a write resolved.
enum class WriteKind : uint8_t {
    DuplicateRequestDropped,  // lla already maps a line with this content
    SharedExistingLine,       // content present elsewhere, refcount bumped
    NewLineWritten,           // fresh content, line allocated and written
    LineUpdated,              // lla remapped to fresh content, old ref dropped
};

// Device work generated by one metadata operation, in issue order.
enum class MemOpKind : uint8_t {
    MetadataRead,   // AMT or LFI probe
    MetadataWrite,  // AMT or LFI update
    CompareRead,    // candidate line fetched for content comparison
    LineWrite,      // new data line written
    LineRead,       // data line fetched for a read request
    LineFree,       // physical line released (bookkeeping only, no device time)
};

enum class MetaTable : uint8_t { None = 0, Amt = 1, Lfi = 2 };

struct MemOp {
    MemOpKind kind;
    Pla pla = 0;  // valid for CompareRead / LineWrite / LineRead / LineFree
    MetaTable table = MetaTable::None;  // which index a metadata op touches
    uint32_t meta_key = 0;              // lla for AMT ops, lfp for LFI ops
};

struct WriteOutcome {
    WriteKind kind;
    Pla pla = 0;  // line the lla maps to afterwards
    std::vector<MemOp> ops;
};

struct ReadOutcome {
    std::optional<Pla> pla;  // empty on address-map miss
    std::vector<MemOp> ops;
};

struct EvictOutcome {
    std::vector<Pla> freed;  // physical lines whose last reference died
    std::vector<MemOp> ops;
};

struct DedupStats {
    uint64_t dropped = 0;
    uint64_t shared = 0;
    uint64_t new_lines = 0;
    uint64_t updated = 0;
    uint64_t hash_collisions = 0;   // fingerprint matched, bytes differed
    uint64_t refcount_overflows = 0;  // private copy forced by saturation
    uint64_t evicted_llas = 0;
    uint64_t reads_hit = 0;
    uint64_t reads_missed = 0;
};

// Returns a free physical line, or nothing when the store is full.
using LineAllocFn = std::function<std::optional<Pla>()>;

// Line-level dedup state: the address map (many llas to one pla) and the
// fingerprint index (chained per fingerprint to carry both genuine hash
// collisions and saturation copies). The engine decides what happens and
// reports device work as MemOps; the caller owns placement and timing.
class DedupEngine {
public:
    explicit DedupEngine(MetadataBudget budget);

    // Resolves one line write. Walks the fingerprint chain in insertion
    // order and takes the first decisive entry: a content match already
    // mapped by this lla is a drop; an unsaturated content match is a
    // share; otherwise a new line is allocated. When the lla was mapped
    // elsewhere the old reference is released before the new one is
    // taken. alloc is only invoked after the decision requires a new
    // line, and no state changes before it succeeds, so a CapacityError
    // leaves the engine untouched and the call can be retried after
    // eviction. If payload is null, fingerprint equality decides content
    // equality (the compare read is still issued).
    WriteOutcome process_write(Lla lla, Lfp lfp, const LinePayload& payload,
                               const LineAllocFn& alloc);

    // AMT probe plus the data-line read on a hit.
    ReadOutcome process_read(Lla lla);

    // Unmaps the given llas (page eviction). Every lla must be mapped;
    // an unmapped one is a caller bug and raises InvariantError.
    EvictOutcome evict_lines(std::span<const Lla> llas);

    const DedupStats& stats() const { return stats_; }
    uint64_t mapped_llas() const { return amt_.size(); }
    uint64_t stored_lines() const { return owner_.size(); }
    uint64_t refcount_total() const { return refcount_total_; }
    std::optional<Pla> lookup(Lla lla) const;  // no MemOps, for inspection

    struct LfiEntry {
        Lfp lfp;
        Pla pla;
        uint16_t ref_count;
    };
    void for_each_lfi(const std::function<void(const LfiEntry&)>& fn) const;
    void for_each_amt(const std::function<void(Lla, Pla)>& fn) const;

    // Full structural check: refcount conservation against the AMT,
    // pla uniqueness across chains, owner-map agreement. Returns false
    // and a reason instead of throwing so tests can report cleanly.
    bool check_invariants(std::string* why = nullptr) const;

    // Byte-exact state snapshot (metadata only, not stored payloads).
    void save_snapshot(std::ostream& out) const;
    static DedupEngine load_snapshot(std::istream& in);

    const MetadataBudget& budget() const { return budget_; }

private:
    struct ChainEntry {
        Pla pla;
        uint16_t ref_count;
    };

    MetadataBudget budget_;
    std::unordered_map<Lla, Pla> amt_;
    std::unordered_map<Lfp, std::vector<ChainEntry>> lfi_;
    std::unordered_map<Pla, Lfp> owner_;  // reverse index for release paths
    std::unordered_map<Pla, LineData> contents_;  // payload mode only
    uint64_t refcount_total_ = 0;
    DedupStats stats_;

    // Drops one reference to pla; appends the LFI update op and, on the
    // last reference, the free op. Returns true if the line died.
    bool release_ref(Pla pla, std::vector<MemOp>& ops);
    void assert_conservation() const;
};

}  // namespace caram::dedup

#endif
