#include "imsim/oracle.hpp"

namespace imsim {

void OracleMemory::apply(const AccessRecord& rec) {
    if (rec.kind != AccessKind::Write) return;
    if (rec.address >= bytes.size()) return; // engine validates ranges; mirror silently
    uint64_t word_addr = rec.address & ~uint64_t(7);
    uint64_t v = write_payload(rec.address, rec.instr_index);
    for (int i = 0; i < 8 && word_addr + i < bytes.size(); ++i)
        bytes[word_addr + i] = uint8_t((v >> (8 * i)) & 0xff);
}

OracleMemory oracle_run(std::span<const AccessRecord> trace, uint64_t mem_size_bytes) {
    OracleMemory mem(mem_size_bytes);
    for (const auto& rec : trace) mem.apply(rec);
    return mem;
}

ConsistencyReport check_consistency(const std::vector<uint8_t>& sim_image,
                                    const OracleMemory& oracle) {
    ConsistencyReport rep;
    size_t n = std::min(sim_image.size(), oracle.bytes.size());
    for (size_t i = 0; i < n; ++i) {
        if (sim_image[i] != oracle.bytes[i]) {
            if (rep.pass) {
                rep.pass = false;
                rep.first_divergent_addr = i;
            }
            ++rep.divergent_bytes;
        }
    }
    if (sim_image.size() != oracle.bytes.size()) rep.pass = false;
    return rep;
}

} // namespace imsim
