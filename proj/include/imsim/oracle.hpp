#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "imsim/trace.hpp"

namespace imsim {

// Golden functional model: a flat byte store applying the trace's writes
// directly. Charges no cycles or energy.
struct OracleMemory {
    std::vector<uint8_t> bytes;

    explicit OracleMemory(uint64_t size_bytes) : bytes(size_bytes, 0) {}
    void apply(const AccessRecord& rec);
};

OracleMemory oracle_run(std::span<const AccessRecord> trace, uint64_t mem_size_bytes);

struct ConsistencyReport {
    bool pass = true;
    uint64_t first_divergent_addr = 0;
    uint64_t divergent_bytes = 0;
};

ConsistencyReport check_consistency(const std::vector<uint8_t>& sim_image,
                                    const OracleMemory& oracle);

} // namespace imsim
