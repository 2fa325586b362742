#include "caram/dedup.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>

namespace caram::dedup {

MetadataBudget metadata_budget(uint64_t capacity_bytes) {
    if (capacity_bytes == 0 || capacity_bytes % kLineBytes != 0) {
        throw ValidationError("capacity must be a positive multiple of the line size");
    }
    MetadataBudget b;
    b.capacity_bytes = capacity_bytes;
    b.lines = capacity_bytes / kLineBytes;
    b.amt_bytes = b.lines * 8;
    b.lfi_bytes = b.lines * 10;
    return b;
}

DedupEngine::DedupEngine(MetadataBudget budget) : budget_(budget) {}

void DedupEngine::assert_conservation() const {
    assert(refcount_total_ == amt_.size());
}

bool DedupEngine::release_ref(Pla pla, std::vector<MemOp>& ops) {
    auto own = owner_.find(pla);
    if (own == owner_.end()) throw InvariantError("release of unowned line");
    auto chain_it = lfi_.find(own->second);
    if (chain_it == lfi_.end()) throw InvariantError("owner points at empty fingerprint");
    auto& chain = chain_it->second;
    auto entry = std::find_if(chain.begin(), chain.end(),
                              [pla](const ChainEntry& e) { return e.pla == pla; });
    if (entry == chain.end()) throw InvariantError("owner not in its fingerprint chain");

    entry->ref_count--;
    refcount_total_--;
    ops.push_back({MemOpKind::MetadataWrite, 0, MetaTable::Lfi, own->second});
    if (entry->ref_count > 0) return false;

    chain.erase(entry);
    if (chain.empty()) lfi_.erase(chain_it);
    owner_.erase(own);
    contents_.erase(pla);
    ops.push_back({MemOpKind::LineFree, pla});
    return true;
}

WriteOutcome DedupEngine::process_write(Lla lla, Lfp lfp, const LinePayload& payload,
                                        const LineAllocFn& alloc) {
    WriteOutcome out;
    out.ops.push_back({MemOpKind::MetadataRead, 0, MetaTable::Amt, lla});
    out.ops.push_back({MemOpKind::MetadataRead, 0, MetaTable::Lfi, lfp});

    auto old_it = amt_.find(lla);
    const bool had_old = old_it != amt_.end();
    const Pla old_pla = had_old ? old_it->second : 0;

    bool saw_mismatch = false;
    bool saw_saturated = false;
    Pla share_pla = 0;
    bool share_found = false;

    if (auto chain_it = lfi_.find(lfp); chain_it != lfi_.end()) {
        for (const ChainEntry& e : chain_it->second) {
            out.ops.push_back({MemOpKind::CompareRead, e.pla});
            bool match = true;
            if (payload != nullptr) {
                auto c = contents_.find(e.pla);
                if (c != contents_.end()) {
                    match = std::memcmp(c->second.data(), payload->data(), kLineBytes) == 0;
                }
            }
            if (!match) {
                saw_mismatch = true;
                continue;
            }
            if (had_old && old_pla == e.pla) {
                // Same content already mapped right here: nothing to do.
                stats_.dropped++;
                out.kind = WriteKind::DuplicateRequestDropped;
                out.pla = e.pla;
                assert_conservation();
                return out;
            }
            if (e.ref_count < kRefCountMax) {
                share_pla = e.pla;
                share_found = true;
                break;
            }
            saw_saturated = true;
        }
    }

    if (share_found) {
        if (had_old) release_ref(old_pla, out.ops);
        // Relocate: the release may have erased a sibling from this chain.
        auto& chain = lfi_.at(lfp);
        auto entry = std::find_if(chain.begin(), chain.end(),
                                  [share_pla](const ChainEntry& e) { return e.pla == share_pla; });
        entry->ref_count++;
        refcount_total_++;
        amt_[lla] = share_pla;
        out.ops.push_back({MemOpKind::MetadataWrite, 0, MetaTable::Lfi, lfp});
        out.ops.push_back({MemOpKind::MetadataWrite, 0, MetaTable::Amt, lla});
        stats_.shared++;
        out.kind = WriteKind::SharedExistingLine;
        out.pla = share_pla;
        assert_conservation();
        return out;
    }

    // No shareable copy: a fresh line is needed. Allocation comes first
    // so a capacity failure leaves no trace of this request.
    std::optional<Pla> fresh = alloc ? alloc() : std::nullopt;
    if (!fresh.has_value()) {
        throw CapacityError("no free line for new content");
    }
    if (had_old) release_ref(old_pla, out.ops);
    lfi_[lfp].push_back({*fresh, 1});
    owner_[*fresh] = lfp;
    if (payload != nullptr) contents_[*fresh] = *payload;
    amt_[lla] = *fresh;
    refcount_total_++;

    out.ops.push_back({MemOpKind::LineWrite, *fresh});
    out.ops.push_back({MemOpKind::MetadataWrite, 0, MetaTable::Lfi, lfp});
    out.ops.push_back({MemOpKind::MetadataWrite, 0, MetaTable::Amt, lla});

    if (saw_saturated) {
        stats_.refcount_overflows++;
    } else if (saw_mismatch) {
        stats_.hash_collisions++;
    }
    if (had_old) {
        stats_.updated++;
        out.kind = WriteKind::LineUpdated;
    } else {
        stats_.new_lines++;
        out.kind = WriteKind::NewLineWritten;
    }
    out.pla = *fresh;
    assert_conservation();
    return out;
}

ReadOutcome DedupEngine::process_read(Lla lla) {
    ReadOutcome out;
    out.ops.push_back({MemOpKind::MetadataRead, 0, MetaTable::Amt, lla});
    auto it = amt_.find(lla);
    if (it == amt_.end()) {
        stats_.reads_missed++;
        return out;
    }
    stats_.reads_hit++;
    out.pla = it->second;
    out.ops.push_back({MemOpKind::LineRead, it->second});
    return out;
}

EvictOutcome DedupEngine::evict_lines(std::span<const Lla> llas) {
    EvictOutcome out;
    for (Lla lla : llas) {
        auto it = amt_.find(lla);
        if (it == amt_.end()) throw InvariantError("evicting unmapped lla");
        out.ops.push_back({MemOpKind::MetadataRead, 0, MetaTable::Amt, lla});
        Pla pla = it->second;
        if (release_ref(pla, out.ops)) out.freed.push_back(pla);
        amt_.erase(it);
        out.ops.push_back({MemOpKind::MetadataWrite, 0, MetaTable::Amt, lla});
        stats_.evicted_llas++;
    }
    assert_conservation();
    return out;
}

std::optional<Pla> DedupEngine::lookup(Lla lla) const {
    auto it = amt_.find(lla);
    if (it == amt_.end()) return std::nullopt;
    return it->second;
}

void DedupEngine::for_each_lfi(const std::function<void(const LfiEntry&)>& fn) const {
    for (const auto& [fp, chain] : lfi_) {
        for (const ChainEntry& e : chain) {
            fn(LfiEntry{fp, e.pla, e.ref_count});
        }
    }
}

void DedupEngine::for_each_amt(const std::function<void(Lla, Pla)>& fn) const {
    for (const auto& [lla, pla] : amt_) fn(lla, pla);
}

bool DedupEngine::check_invariants(std::string* why) const {
    auto fail = [why](const std::string& reason) {
        if (why != nullptr) *why = reason;
        return false;
    };

    std::unordered_map<Pla, uint64_t> mapped_count;
    for (const auto& [lla, pla] : amt_) mapped_count[pla]++;

    uint64_t ref_sum = 0;
    std::unordered_map<Pla, Lfp> seen_plas;
    for (const auto& [fp, chain] : lfi_) {
        if (chain.empty()) return fail("empty chain left in fingerprint index");
        for (const ChainEntry& e : chain) {
            if (e.ref_count == 0) return fail("zero refcount entry retained");
            ref_sum += e.ref_count;
            if (!seen_plas.emplace(e.pla, fp).second) {
                return fail("physical line appears in two index entries");
            }
            auto own = owner_.find(e.pla);
            if (own == owner_.end() || own->second != fp) {
                return fail("owner map disagrees with fingerprint index");
            }
            auto mc = mapped_count.find(e.pla);
            uint64_t mapped = mc == mapped_count.end() ? 0 : mc->second;
            if (mapped != e.ref_count) {
                return fail("refcount does not equal number of mapping llas");
            }
        }
    }
    if (ref_sum != amt_.size()) return fail("refcount sum does not match mapped lla count");
    if (ref_sum != refcount_total_) return fail("running refcount total is stale");
    if (seen_plas.size() != owner_.size()) return fail("owner map has orphan lines");
    for (const auto& [pla, data] : contents_) {
        if (owner_.find(pla) == owner_.end()) return fail("content retained for freed line");
    }
    return true;
}

namespace {

constexpr char kSnapshotMagic[4] = {'C', 'D', 'S', '1'};
constexpr uint16_t kSnapshotVersion = 1;

void w_u16(std::ostream& o, uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    o.write(b, 2);
}
void w_u32(std::ostream& o, uint32_t v) {
    w_u16(o, static_cast<uint16_t>(v & 0xffff));
    w_u16(o, static_cast<uint16_t>(v >> 16));
}
void w_u64(std::ostream& o, uint64_t v) {
    w_u32(o, static_cast<uint32_t>(v & 0xffffffff));
    w_u32(o, static_cast<uint32_t>(v >> 32));
}
uint16_t r_u16(std::istream& i) {
    unsigned char b[2];
    i.read(reinterpret_cast<char*>(b), 2);
    if (!i) throw FormatError("snapshot truncated");
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}
uint32_t r_u32(std::istream& i) {
    uint32_t lo = r_u16(i), hi = r_u16(i);
    return lo | (hi << 16);
}
uint64_t r_u64(std::istream& i) {
    uint64_t lo = r_u32(i), hi = r_u32(i);
    return lo | (hi << 32);
}

}  // namespace

void DedupEngine::save_snapshot(std::ostream& out) const {
    out.write(kSnapshotMagic, 4);
    w_u16(out, kSnapshotVersion);
    w_u64(out, budget_.capacity_bytes);

    // Hash-map iteration order is not stable, so entries are sorted to
    // keep snapshots byte-identical for identical state.
    std::vector<std::pair<Lla, Pla>> amt(amt_.begin(), amt_.end());
    std::sort(amt.begin(), amt.end());
    w_u64(out, amt.size());
    for (auto [lla, pla] : amt) {
        w_u32(out, lla);
        w_u32(out, pla);
    }

    std::vector<Lfp> fps;
    fps.reserve(lfi_.size());
    for (const auto& [fp, chain] : lfi_) fps.push_back(fp);
    std::sort(fps.begin(), fps.end());
    w_u64(out, fps.size());
    for (Lfp fp : fps) {
        const auto& chain = lfi_.at(fp);
        w_u32(out, fp);
        w_u32(out, static_cast<uint32_t>(chain.size()));
        for (const ChainEntry& e : chain) {
            w_u32(out, e.pla);
            w_u16(out, e.ref_count);
        }
    }

    std::vector<Pla> content_plas;
    content_plas.reserve(contents_.size());
    for (const auto& [pla, data] : contents_) content_plas.push_back(pla);
    std::sort(content_plas.begin(), content_plas.end());
    w_u64(out, content_plas.size());
    for (Pla pla : content_plas) {
        w_u32(out, pla);
        const LineData& d = contents_.at(pla);
        out.write(reinterpret_cast<const char*>(d.data()), d.size());
    }

    const uint64_t counters[] = {stats_.dropped,         stats_.shared,
                                 stats_.new_lines,       stats_.updated,
                                 stats_.hash_collisions, stats_.refcount_overflows,
                                 stats_.evicted_llas,    stats_.reads_hit,
                                 stats_.reads_missed};
    for (uint64_t c : counters) w_u64(out, c);
    if (!out) throw FormatError("snapshot write failed");
}

DedupEngine DedupEngine::load_snapshot(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kSnapshotMagic, 4) != 0) {
        throw FormatError("snapshot magic mismatch");
    }
    if (r_u16(in) != kSnapshotVersion) throw FormatError("unsupported snapshot version");

    DedupEngine eng(metadata_budget(r_u64(in)));

    uint64_t amt_n = r_u64(in);
    for (uint64_t i = 0; i < amt_n; i++) {
        Lla lla = r_u32(in);
        Pla pla = r_u32(in);
        eng.amt_[lla] = pla;
    }
    uint64_t fp_n = r_u64(in);
    for (uint64_t i = 0; i < fp_n; i++) {
        Lfp fp = r_u32(in);
        uint32_t len = r_u32(in);
        if (len == 0) throw FormatError("snapshot has empty chain");
        auto& chain = eng.lfi_[fp];
        for (uint32_t j = 0; j < len; j++) {
            Pla pla = r_u32(in);
            uint16_t rc = r_u16(in);
            chain.push_back({pla, rc});
            if (!eng.owner_.emplace(pla, fp).second) {
                throw FormatError("snapshot reuses a physical line");
            }
            eng.refcount_total_ += rc;
        }
    }
    uint64_t content_n = r_u64(in);
    for (uint64_t i = 0; i < content_n; i++) {
        Pla pla = r_u32(in);
        LineData d;
        in.read(reinterpret_cast<char*>(d.data()), d.size());
        if (!in) throw FormatError("snapshot truncated");
        eng.contents_[pla] = d;
    }
    uint64_t* counters[] = {&eng.stats_.dropped,         &eng.stats_.shared,
                            &eng.stats_.new_lines,       &eng.stats_.updated,
                            &eng.stats_.hash_collisions, &eng.stats_.refcount_overflows,
                            &eng.stats_.evicted_llas,    &eng.stats_.reads_hit,
                            &eng.stats_.reads_missed};
    for (uint64_t* c : counters) *c = r_u64(in);

    std::string why;
    if (!eng.check_invariants(&why)) throw FormatError("snapshot inconsistent: " + why);
    return eng;
}

}  // namespace caram::dedup
