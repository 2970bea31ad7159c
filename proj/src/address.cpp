#include "imsim/address.hpp"

namespace imsim {

namespace {
uint32_t log2_exact(uint64_t v) {
    uint32_t b = 0;
    while ((1ull << b) < v) ++b;
    return b;
}
} // namespace

Geometry::Geometry(uint32_t block, uint64_t num_sets, uint64_t mem)
    : block_bytes(block), sets(num_sets), mem_size(mem),
      offset_bits(log2_exact(block)), set_bits(log2_exact(num_sets)) {}

AddrParts Geometry::decompose(uint64_t addr) const {
    if (addr >= mem_size)
        throw TraceError("address out of range: " + std::to_string(addr) +
                         " >= " + std::to_string(mem_size));
    AddrParts p;
    p.offset = addr & ((uint64_t(1) << offset_bits) - 1);
    p.set = (addr >> offset_bits) & ((uint64_t(1) << set_bits) - 1);
    p.tag = addr >> (offset_bits + set_bits);
    return p;
}

uint64_t Geometry::recompose(const AddrParts& p) const {
    return (p.tag << (offset_bits + set_bits)) | (p.set << offset_bits) | p.offset;
}

} // namespace imsim
