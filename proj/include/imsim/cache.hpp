#pragma once

#include <cstdint>
#include <cstring>
#include <vector>

#include "imsim/address.hpp"

namespace imsim {

// Set-associative array with per-set LRU, shared by L1 and LLC.
class CacheArray {
public:
    CacheArray() = default;
    CacheArray(uint64_t sets, uint32_t ways, uint32_t block_bytes);

    uint64_t sets() const { return sets_; }
    uint32_t ways() const { return ways_; }
    uint32_t block_bytes() const { return block_bytes_; }

    int find(uint64_t set, uint64_t tag) const; // way or -1

    bool valid(uint64_t set, uint32_t way) const { return valid_[idx(set, way)]; }
    bool dirty(uint64_t set, uint32_t way) const { return dirty_[idx(set, way)]; }
    uint64_t tag(uint64_t set, uint32_t way) const { return tag_[idx(set, way)]; }
    void set_dirty(uint64_t set, uint32_t way, bool d);

    uint8_t* data(uint64_t set, uint32_t way) { return data_.data() + idx(set, way) * block_bytes_; }
    const uint8_t* data(uint64_t set, uint32_t way) const {
        return data_.data() + idx(set, way) * block_bytes_;
    }

    void touch(uint64_t set, uint32_t way) { stamp_[idx(set, way)] = ++clock_; }

    // Invalid way if any, else least recently touched.
    uint32_t victim_way(uint64_t set) const;

    void install(uint64_t set, uint32_t way, uint64_t tag, const uint8_t* block, bool dirty);
    void invalidate(uint64_t set, uint32_t way);
    void clear();

    uint64_t dirty_count() const { return dirty_count_; }

private:
    size_t idx(uint64_t set, uint32_t way) const { return size_t(set) * ways_ + way; }

    uint64_t sets_ = 0;
    uint32_t ways_ = 0;
    uint32_t block_bytes_ = 0;
    std::vector<uint8_t> valid_;
    std::vector<uint8_t> dirty_;
    std::vector<uint64_t> tag_;
    std::vector<uint64_t> stamp_;
    std::vector<uint8_t> data_;
    uint64_t clock_ = 0;
    uint64_t dirty_count_ = 0;
};

} // namespace imsim
