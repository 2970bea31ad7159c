#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>

namespace imsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal invariant breach. Thrown instead of assert() so tests can observe it.
struct SimBugError : std::logic_error {
    using std::logic_error::logic_error;
};

#define IMSIM_CHECK(cond, msg)                   \
    do {                                         \
        if (!(cond)) throw ::imsim::SimBugError(msg); \
    } while (0)

enum class Policy { LFW, LRW };
enum class WritePolicy { WriteBack, WriteThrough };
enum class LrwEvict { MostRecent, LeastRecent };

struct Latencies {
    uint32_t sram_read_cycles = 1;
    uint32_t sram_write_cycles = 2;
    uint32_t sttram_read_cycles = 2;
    uint32_t sttram_write_cycles = 10;
    uint32_t pcm_read_cycles = 35;
    uint32_t pcm_write_cycles = 100;
};

// Dynamic energy per block-level access (nJ). PCM write defaults to the
// mean of SET (6.927) and RESET (6.946) since traces carry no bit values.
struct Energies {
    double l1_read_nj = 0.006;
    double l1_write_nj = 0.002;
    double llc_read_nj = 0.123;
    double llc_write_nj = 0.542;
    double pcm_read_nj = 1.553;
    double pcm_write_nj = 6.9365;
};

struct HierarchyConfig {
    uint64_t l1_size_bytes = 32 * 1024;
    uint32_t l1_assoc = 4;
    uint64_t llc_size_bytes = 256 * 1024;
    uint32_t llc_assoc = 16;
    uint32_t block_size_bytes = 64;
    uint64_t mem_size_bytes = 128ull * 1024 * 1024;

    Latencies latencies;
    Energies energies;

    uint32_t k_max_dirty = 16;  // K
    uint32_t dbt_entries = 12;  // M
    uint32_t wbq_entries = 4;   // N
    uint32_t wc_bits = 6;
    Policy policy = Policy::LFW;
    LrwEvict lrw_evict = LrwEvict::MostRecent;
    WritePolicy write_policy = WritePolicy::WriteBack;
    bool dbt_enabled = true;
    bool br_enabled = true;
    bool llc_volatile = false;     // architecture-1 style: LLC loses contents at failure
    bool capacitor_strict = false; // enforce the capacitor budget even without DBT bounding

    double e_capacitor_nj = 9.214;
    double e_reg_file_nj = 0.542;

    double mem_ops_per_instr = 0.4;
    bool allow_address_wrap = false;

    uint64_t l1_sets() const { return l1_size_bytes / (uint64_t(block_size_bytes) * l1_assoc); }
    uint64_t llc_sets() const { return llc_size_bytes / (uint64_t(block_size_bytes) * llc_assoc); }
    uint64_t l1_blocks() const { return l1_size_bytes / block_size_bytes; }
    uint32_t lrw_rank_bits() const; // ceil(log2(M))

    void validate() const; // throws ConfigError
    std::string canonical() const;
};

// K = floor((E_capacitor - E_reg_file) / e_w_sttram)
uint32_t derive_k(double e_capacitor_nj, double e_reg_file_nj, double e_w_sttram_nj);

// Worst case for an unbounded write-back L1: every block dirty.
double backup_energy_full_l1(const HierarchyConfig& cfg);

HierarchyConfig parse_config(std::istream& in, const std::string& name = "<config>");
HierarchyConfig load_config_file(const std::string& path, bool apply_env = true);
void apply_override(HierarchyConfig& cfg, const std::string& key, const std::string& value);
void apply_env_overrides(HierarchyConfig& cfg); // SIM_<KEY> environment variables

} // namespace imsim
