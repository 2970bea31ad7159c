#pragma once

#include <cstdint>

#include "imsim/config.hpp"

namespace imsim {

struct AddrParts {
    uint64_t tag;
    uint64_t set;
    uint64_t offset;
};

// Bit-sliced block/set/tag arithmetic for one cache level.
struct Geometry {
    uint32_t block_bytes = 64;
    uint64_t sets = 1;
    uint64_t mem_size = 0;
    uint32_t offset_bits = 6;
    uint32_t set_bits = 0;

    Geometry() = default;
    Geometry(uint32_t block, uint64_t num_sets, uint64_t mem);

    AddrParts decompose(uint64_t addr) const; // throws TraceError if addr >= mem_size
    uint64_t recompose(const AddrParts& p) const;
    uint64_t block_base(uint64_t addr) const { return addr & ~(uint64_t(block_bytes) - 1); }
};

} // namespace imsim
