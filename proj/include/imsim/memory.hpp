#pragma once

#include <cstdint>
#include <vector>

#include "imsim/cache.hpp"
#include "imsim/config.hpp"

namespace imsim {

// Non-volatile STT-RAM checkpoint storage next to the LLC: K block slots
// plus one register-file record.
struct BrSlot {
    enum class Origin : uint8_t { Dbt, Wbq };
    Origin origin = Origin::Dbt;
    uint32_t set = 0;
    uint32_t way = 0;
    uint64_t tag = 0;
    uint64_t block_addr = 0;
    uint32_t wc = 0;
    uint32_t lrw_rank = 0;
    std::vector<uint8_t> data;
};

class BackupRegion {
public:
    BackupRegion() = default;
    explicit BackupRegion(uint32_t block_capacity) : capacity_(block_capacity) {}

    uint32_t capacity() const { return capacity_; }
    uint32_t size() const { return uint32_t(slots_.size()); }
    bool has_checkpoint() const { return has_regfile_; }

    void store(std::vector<BrSlot> slots); // asserts size <= capacity
    void clear();

    const std::vector<BrSlot>& slots() const { return slots_; }

private:
    uint32_t capacity_ = 0;
    std::vector<BrSlot> slots_;
    bool has_regfile_ = false;
};

// Flat PCM main memory; persists across power failures.
class Pcm {
public:
    Pcm() = default;
    explicit Pcm(uint64_t size_bytes) : bytes_(size_bytes, 0) {}

    uint64_t size() const { return bytes_.size(); }
    uint8_t* block(uint64_t block_addr) { return bytes_.data() + block_addr; }
    const uint8_t* block(uint64_t block_addr) const { return bytes_.data() + block_addr; }
    const std::vector<uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<uint8_t> bytes_;
};

} // namespace imsim
