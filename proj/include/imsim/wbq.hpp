#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "imsim/config.hpp"

namespace imsim {

// A block scheduled for writeback to LLC. Carries a data snapshot so backup
// and draining work even after the block leaves the L1 array.
struct WbqEntry {
    uint32_t set = 0;
    uint32_t way = 0;
    uint64_t tag = 0;
    uint64_t block_addr = 0;
    std::vector<uint8_t> data;
    uint64_t completion_cycle = 0; // background drain point at the LLC write port
};

// N-entry FIFO draining DBT victims to the LLC.
class WritebackQueue {
public:
    WritebackQueue() = default;
    explicit WritebackQueue(uint32_t capacity) : capacity_(capacity) {}

    uint32_t capacity() const { return capacity_; }
    uint32_t size() const { return uint32_t(entries_.size()); }
    bool full() const { return entries_.size() >= capacity_; }
    bool empty() const { return entries_.empty(); }

    WbqEntry& front() { return entries_.front(); }
    const WbqEntry& front() const { return entries_.front(); }
    WbqEntry pop();
    void push(WbqEntry e);

    int find(uint32_t set, uint32_t way) const;                // identity only
    int find(uint32_t set, uint32_t way, uint64_t tag) const;  // exact block

    WbqEntry& at(uint32_t i) { return entries_[i]; }
    const WbqEntry& at(uint32_t i) const { return entries_[i]; }

    void clear() { entries_.clear(); }

private:
    uint32_t capacity_ = 0;
    std::deque<WbqEntry> entries_;
};

} // namespace imsim
