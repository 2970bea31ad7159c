#include "imsim/cache.hpp"

namespace imsim {

CacheArray::CacheArray(uint64_t sets, uint32_t ways, uint32_t block_bytes)
    : sets_(sets), ways_(ways), block_bytes_(block_bytes),
      valid_(sets * ways, 0), dirty_(sets * ways, 0), tag_(sets * ways, 0),
      stamp_(sets * ways, 0), data_(size_t(sets) * ways * block_bytes, 0) {}

int CacheArray::find(uint64_t set, uint64_t tag) const {
    for (uint32_t w = 0; w < ways_; ++w) {
        size_t i = idx(set, w);
        if (valid_[i] && tag_[i] == tag) return int(w);
    }
    return -1;
}

void CacheArray::set_dirty(uint64_t set, uint32_t way, bool d) {
    size_t i = idx(set, way);
    if (dirty_[i] && !d) --dirty_count_;
    if (!dirty_[i] && d) ++dirty_count_;
    dirty_[i] = d ? 1 : 0;
}

uint32_t CacheArray::victim_way(uint64_t set) const {
    uint32_t best = 0;
    uint64_t best_stamp = UINT64_MAX;
    for (uint32_t w = 0; w < ways_; ++w) {
        size_t i = idx(set, w);
        if (!valid_[i]) return w;
        if (stamp_[i] < best_stamp) {
            best_stamp = stamp_[i];
            best = w;
        }
    }
    return best;
}

void CacheArray::install(uint64_t set, uint32_t way, uint64_t tag, const uint8_t* block,
                         bool dirty) {
    size_t i = idx(set, way);
    if (dirty_[i]) --dirty_count_;
    valid_[i] = 1;
    dirty_[i] = dirty ? 1 : 0;
    if (dirty) ++dirty_count_;
    tag_[i] = tag;
    std::memcpy(data(set, way), block, block_bytes_);
    touch(set, way);
}

void CacheArray::invalidate(uint64_t set, uint32_t way) {
    size_t i = idx(set, way);
    if (dirty_[i]) --dirty_count_;
    valid_[i] = 0;
    dirty_[i] = 0;
}

void CacheArray::clear() {
    std::fill(valid_.begin(), valid_.end(), 0);
    std::fill(dirty_.begin(), dirty_.end(), 0);
    dirty_count_ = 0;
}

} // namespace imsim
