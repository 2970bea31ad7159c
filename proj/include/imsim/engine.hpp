#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "imsim/cache.hpp"
#include "imsim/config.hpp"
#include "imsim/dbt.hpp"
#include "imsim/memory.hpp"
#include "imsim/trace.hpp"
#include "imsim/wbq.hpp"

namespace imsim {

struct PowerSchedule {
    enum class Mode { None, Periodic, ExplicitList };
    Mode mode = Mode::None;
    uint64_t every_n_instructions = 0;
    std::vector<uint64_t> instr_indices; // strictly increasing

    static PowerSchedule none() { return {}; }
    static PowerSchedule periodic(uint64_t every_n);
    static PowerSchedule explicit_list(std::vector<uint64_t> indices);
    // `count` failures spread evenly over [0, total_instructions).
    static PowerSchedule by_total_failures(uint64_t count, uint64_t total_instructions);

    void validate() const;
};

struct SimStats {
    uint64_t l1_reads = 0, l1_writes = 0;
    uint64_t llc_reads = 0, llc_writes = 0;
    uint64_t pcm_reads = 0, pcm_writes = 0;
    uint64_t br_reads = 0, br_writes = 0;
    uint64_t l1_hits = 0, l1_misses = 0;
    uint64_t stall_cycles = 0;
    uint64_t total_cycles = 0;
    double energy_stable_nj = 0.0;
    double energy_backup_nj = 0.0;
    double energy_restore_nj = 0.0;
    uint64_t backups_performed = 0;
    uint64_t blocks_backed_up = 0;
    uint64_t restores_performed = 0;

    double total_energy_nj() const {
        return energy_stable_nj + energy_backup_nj + energy_restore_nj;
    }
};

struct UnsafeBackupError : std::runtime_error {
    UnsafeBackupError(uint64_t failure_index, double required_nj, double budget_nj);
    uint64_t failure_index;
    double required_nj;
    double budget_nj;
};

// Test-only mutation hooks; used to prove the consistency check has teeth.
struct FaultPlan {
    enum class Kind { None, DropDirtyBit, DropWbqWrite, SkipBackupBlock };
    Kind kind = Kind::None;
    uint64_t trigger = 0; // nth opportunity (0-based)
};

// One entry of the ordered backup set: DBT-tracked blocks first, then WBQ
// entries in FIFO order.
struct BackupItem {
    BrSlot slot;
};

class Engine {
public:
    Engine(const HierarchyConfig& cfg, const PowerSchedule& schedule);

    void set_fault_plan(const FaultPlan& plan) { fault_ = plan; }
    void set_invariant_checks(bool on) { check_invariants_ = on; }

    SimStats run(std::span<const AccessRecord> trace);
    void step(const AccessRecord& rec); // fires due failures, then applies the access
    void fire_failure();                // backup, volatile wipe, restore

    const SimStats& stats() const { return stats_; }
    const HierarchyConfig& config() const { return cfg_; }

    // Dirty blocks about to be preserved: DBT-tracked blocks then WBQ entries.
    std::vector<BrSlot> list_backup_set() const;
    uint64_t l1_dirty_count() const { return l1_.dirty_count(); }
    double last_backup_energy_nj() const { return last_backup_energy_nj_; }
    const std::vector<double>& backup_energy_log() const { return backup_energy_log_; }

    // PCM overlaid by coherence priority L1 > WBQ > BR > LLC > PCM.
    std::vector<uint8_t> visible_memory_image() const;

    void audit() const; // deep invariant scan

    // Exposed for white-box tests.
    CacheArray& l1() { return l1_; }
    CacheArray& llc() { return llc_; }
    DirtyBlockTable& dbt() { return dbt_; }
    WritebackQueue& wbq() { return wbq_; }
    BackupRegion& backup_region() { return br_; }
    Pcm& pcm() { return pcm_; }

private:
    enum class EnergyMode { Stable, Backup, Restore };

    void charge(double nj);
    void charge_cycles(uint64_t cycles) { stats_.total_cycles += cycles; }

    void background_drain();
    void forced_drain_oldest(); // one LLC-write stall, per the write-hit stall rule
    void wbq_push(uint32_t set, uint32_t way);
    void clear_wbq_dirty(const WbqEntry& e);

    void llc_write_block(uint64_t block_addr, const uint8_t* data, bool charge_cpu);
    void llc_read_block(uint64_t block_addr, uint8_t* out); // charges CPU cycles
    void pcm_write_block(uint64_t block_addr, const uint8_t* data);

    void handle_write_hit(uint64_t set, uint32_t way, const AccessRecord& rec,
                          const AddrParts& parts);
    uint32_t handle_miss(uint64_t set, const AddrParts& parts, uint64_t block_addr);
    void evict_dirty_victim(uint64_t set, uint32_t way);

    double do_backup(uint64_t failure_index);
    void do_restore();

    HierarchyConfig cfg_;
    PowerSchedule schedule_;
    Geometry l1_geo_, llc_geo_;
    CacheArray l1_, llc_;
    DirtyBlockTable dbt_;
    WritebackQueue wbq_;
    BackupRegion br_;
    Pcm pcm_;
    SimStats stats_;
    EnergyMode mode_ = EnergyMode::Stable;
    uint64_t llc_port_free_ = 0;
    uint64_t next_failure_instr_ = 0;
    size_t next_failure_idx_ = 0;
    uint64_t failures_fired_ = 0;
    double last_backup_energy_nj_ = 0.0;
    std::vector<double> backup_energy_log_;
    FaultPlan fault_;
    uint64_t fault_opportunities_ = 0;
    bool check_invariants_ = false;
    uint64_t steps_ = 0;
};

} // namespace imsim
