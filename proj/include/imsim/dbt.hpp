#pragma once

#include <cstdint>
#include <vector>

#include "imsim/config.hpp"

namespace imsim {

// One tracked dirty block. wc is used by LFW, lrw_rank by LRW
// (rank count-1 = most recently written).
struct DbtEntry {
    bool valid = false;
    uint32_t set = 0;
    uint32_t way = 0;
    uint32_t wc = 0;
    uint32_t lrw_rank = 0;
};

// M-entry fully associative table of dirty L1 blocks.
class DirtyBlockTable {
public:
    DirtyBlockTable() = default;
    DirtyBlockTable(uint32_t entries, Policy policy, uint32_t wc_bits,
                    LrwEvict lrw_evict = LrwEvict::MostRecent);

    uint32_t capacity() const { return uint32_t(entries_.size()); }
    uint32_t size() const { return valid_count_; }
    bool full() const { return valid_count_ == entries_.size(); }

    // Index of the entry tracking (set, way), or -1.
    int find(uint32_t set, uint32_t way) const;

    // New entries start with wc = 1 (the dirtying write counts) or as the
    // most recently written rank.
    uint32_t insert(uint32_t set, uint32_t way);

    // Write hit to a tracked entry. LFW: wc at saturation triggers a rescale
    // of all entries instead of the increment; LRW: entry becomes most recent.
    void on_write(uint32_t index);

    // Subtract 2^(wc_bits-1) from every valid entry, flooring at 0.
    void rescale();

    // Requires a full table. LFW: minimum wc, ties broken by lowest
    // (set, way). LRW: most recently written by default.
    uint32_t select_victim() const;

    void remove(uint32_t index);
    void clear();

    // Raw reinstall used by checkpoint restore.
    void restore_entry(uint32_t set, uint32_t way, uint32_t wc, uint32_t lrw_rank);

    const DbtEntry& entry(uint32_t index) const { return entries_[index]; }
    uint32_t wc_max() const { return (1u << wc_bits_) - 1; }
    Policy policy() const { return policy_; }

    // Valid-entry indices in slot order.
    std::vector<uint32_t> valid_indices() const;

    void audit() const; // throws SimBugError on invariant breach

private:
    std::vector<DbtEntry> entries_;
    Policy policy_ = Policy::LFW;
    uint32_t wc_bits_ = 6;
    LrwEvict lrw_evict_ = LrwEvict::MostRecent;
    uint32_t valid_count_ = 0;
};

} // namespace imsim
