#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace imsim {

enum class AccessKind : uint8_t { Read = 0, Write = 1 };

struct AccessRecord {
    AccessKind kind;
    uint64_t address;
    uint64_t instr_index;

    bool operator==(const AccessRecord&) const = default;
};

struct TraceHeader {
    uint16_t version = 1;
    uint16_t address_bits = 32;
    uint64_t record_count = 0;
};

inline uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Deterministic value stored by a write; shared by simulator and oracle so
// divergence is attributable to a specific (address, instr) pair.
inline uint64_t write_payload(uint64_t addr, uint64_t instr) {
    return mix64(addr ^ mix64(instr));
}

using RecordSink = std::function<void(const AccessRecord&)>;

// Text format: one `R|W <hex-addr> [<instr-index>]` per line, `#` comments.
// When the instr index is omitted, it is synthesized from the record ordinal
// and mem_ops_per_instr.
void parse_text_trace(std::istream& in, const RecordSink& sink,
                      double mem_ops_per_instr = 0.4,
                      const std::string& name = "<trace>");
void write_text_trace(std::ostream& out, const std::vector<AccessRecord>& records);

// Binary format (.mtb), little-endian, 16-byte header:
//   0..3  magic "MTB1"
//   4..5  u16 version
//   6..7  u16 address_bits
//   8..15 u64 record_count
// then per record: u8 kind, u64 address, u64 instr_index.
void parse_binary_trace(std::istream& in, const RecordSink& sink,
                        const std::string& name = "<trace>");
void write_binary_trace(std::ostream& out, const std::vector<AccessRecord>& records,
                        uint16_t address_bits = 32);

// Dispatches on extension: .mtr text, .mtb binary.
std::vector<AccessRecord> load_trace(const std::string& path,
                                     double mem_ops_per_instr = 0.4);
void save_trace(const std::string& path, const std::vector<AccessRecord>& records);

enum class LocalityKind { Uniform, Zipf, Strided, LoopNest };

struct SyntheticSpec {
    uint64_t record_count = 0;
    double write_fraction = 0.3;
    uint64_t working_set_bytes = 0;
    LocalityKind locality = LocalityKind::Uniform;
    double zipf_s = 1.0;
    uint64_t stride_bytes = 64;
    std::vector<uint64_t> loop_sizes; // region sizes in bytes, swept round-robin
    uint64_t seed = 1;
    uint32_t block_size_bytes = 64;
    double mem_ops_per_instr = 0.4;
};

std::vector<AccessRecord> generate(const SyntheticSpec& spec);

LocalityKind parse_locality(const std::string& text, SyntheticSpec& spec);

} // namespace imsim
