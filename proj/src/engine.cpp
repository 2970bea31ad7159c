#include "imsim/engine.hpp"

#include <algorithm>
#include <cstring>

namespace imsim {

PowerSchedule PowerSchedule::periodic(uint64_t every_n) {
    PowerSchedule s;
    s.mode = Mode::Periodic;
    s.every_n_instructions = every_n;
    return s;
}

PowerSchedule PowerSchedule::explicit_list(std::vector<uint64_t> indices) {
    PowerSchedule s;
    s.mode = Mode::ExplicitList;
    s.instr_indices = std::move(indices);
    return s;
}

PowerSchedule PowerSchedule::by_total_failures(uint64_t count, uint64_t total_instructions) {
    std::vector<uint64_t> idx;
    idx.reserve(count);
    for (uint64_t i = 0; i < count; ++i)
        idx.push_back((i + 1) * total_instructions / (count + 1));
    return explicit_list(std::move(idx));
}

void PowerSchedule::validate() const {
    if (mode == Mode::Periodic && every_n_instructions == 0)
        throw ConfigError("periodic failure interval must be positive");
    for (size_t i = 1; i < instr_indices.size(); ++i)
        if (instr_indices[i] <= instr_indices[i - 1])
            throw ConfigError("explicit failure list must be strictly increasing");
}

UnsafeBackupError::UnsafeBackupError(uint64_t failure_index_, double required_nj_,
                                     double budget_nj_)
    : std::runtime_error("unsafe backup at failure " + std::to_string(failure_index_) +
                         ": required " + std::to_string(required_nj_) + " nJ > capacitor " +
                         std::to_string(budget_nj_) + " nJ"),
      failure_index(failure_index_), required_nj(required_nj_), budget_nj(budget_nj_) {}

Engine::Engine(const HierarchyConfig& cfg, const PowerSchedule& schedule)
    : cfg_(cfg), schedule_(schedule) {
    cfg_.validate();
    schedule_.validate();
    l1_geo_ = Geometry(cfg_.block_size_bytes, cfg_.l1_sets(), cfg_.mem_size_bytes);
    llc_geo_ = Geometry(cfg_.block_size_bytes, cfg_.llc_sets(), cfg_.mem_size_bytes);
    l1_ = CacheArray(cfg_.l1_sets(), cfg_.l1_assoc, cfg_.block_size_bytes);
    llc_ = CacheArray(cfg_.llc_sets(), cfg_.llc_assoc, cfg_.block_size_bytes);
    if (cfg_.dbt_enabled) {
        dbt_ = DirtyBlockTable(cfg_.dbt_entries, cfg_.policy,
                               cfg_.policy == Policy::LFW ? cfg_.wc_bits : 1, cfg_.lrw_evict);
        wbq_ = WritebackQueue(cfg_.wbq_entries);
    }
    if (cfg_.br_enabled) br_ = BackupRegion(cfg_.k_max_dirty);
    pcm_ = Pcm(cfg_.mem_size_bytes);
    if (schedule_.mode == PowerSchedule::Mode::Periodic)
        next_failure_instr_ = schedule_.every_n_instructions;
}

void Engine::charge(double nj) {
    switch (mode_) {
    case EnergyMode::Stable: stats_.energy_stable_nj += nj; break;
    case EnergyMode::Backup: stats_.energy_backup_nj += nj; break;
    case EnergyMode::Restore: stats_.energy_restore_nj += nj; break;
    }
}

void Engine::pcm_write_block(uint64_t block_addr, const uint8_t* data) {
    std::memcpy(pcm_.block(block_addr), data, cfg_.block_size_bytes);
    ++stats_.pcm_writes;
    charge(cfg_.energies.pcm_write_nj);
    // PCM writebacks are buffered; latency does not stall the core.
}

void Engine::llc_write_block(uint64_t block_addr, const uint8_t* data, bool charge_cpu) {
    AddrParts p = llc_geo_.decompose(block_addr);
    int way = llc_.find(p.set, p.tag);
    if (way < 0) {
        // Write-allocate without fetch: the incoming data covers the whole block.
        uint32_t v = llc_.victim_way(p.set);
        if (llc_.valid(p.set, v) && llc_.dirty(p.set, v)) {
            AddrParts vp{llc_.tag(p.set, v), p.set, 0};
            pcm_write_block(llc_geo_.recompose(vp), llc_.data(p.set, v));
        }
        llc_.install(p.set, v, p.tag, data, true);
    } else {
        std::memcpy(llc_.data(p.set, uint32_t(way)), data, cfg_.block_size_bytes);
        llc_.set_dirty(p.set, uint32_t(way), true);
        llc_.touch(p.set, uint32_t(way));
    }
    ++stats_.llc_writes;
    charge(cfg_.energies.llc_write_nj);
    if (charge_cpu) charge_cycles(cfg_.latencies.sttram_write_cycles);
}

void Engine::llc_read_block(uint64_t block_addr, uint8_t* out) {
    AddrParts p = llc_geo_.decompose(block_addr);
    int way = llc_.find(p.set, p.tag);
    ++stats_.llc_reads;
    charge(cfg_.energies.llc_read_nj);
    charge_cycles(cfg_.latencies.sttram_read_cycles);
    if (way < 0) {
        uint32_t v = llc_.victim_way(p.set);
        if (llc_.valid(p.set, v) && llc_.dirty(p.set, v)) {
            AddrParts vp{llc_.tag(p.set, v), p.set, 0};
            pcm_write_block(llc_geo_.recompose(vp), llc_.data(p.set, v));
        }
        ++stats_.pcm_reads;
        charge(cfg_.energies.pcm_read_nj);
        charge_cycles(cfg_.latencies.pcm_read_cycles);
        llc_.install(p.set, v, p.tag, pcm_.block(block_addr), false);
        way = int(llc_.find(p.set, p.tag));
    } else {
        llc_.touch(p.set, uint32_t(way));
    }
    std::memcpy(out, llc_.data(p.set, uint32_t(way)), cfg_.block_size_bytes);
}

void Engine::clear_wbq_dirty(const WbqEntry& e) {
    if (!l1_.valid(e.set, e.way) || l1_.tag(e.set, e.way) != e.tag || !l1_.dirty(e.set, e.way))
        return;
    // A block can be evicted, refetched into the same frame under the same
    // tag and re-dirtied while its old snapshot still rides the queue. The
    // DBT then tracks the newer incarnation, which must stay dirty.
    if (dbt_.find(e.set, e.way) >= 0) return;
    l1_.set_dirty(e.set, e.way, false);
}

void Engine::background_drain() {
    uint64_t now = stats_.total_cycles;
    while (!wbq_.empty() && wbq_.front().completion_cycle <= now) {
        WbqEntry e = wbq_.pop();
        bool drop = fault_.kind == FaultPlan::Kind::DropWbqWrite &&
                    fault_opportunities_++ == fault_.trigger;
        if (!drop) llc_write_block(e.block_addr, e.data.data(), false);
        clear_wbq_dirty(e);
    }
}

void Engine::forced_drain_oldest() {
    // The core halts for exactly one STT-RAM write to free a slot.
    uint64_t stall = cfg_.latencies.sttram_write_cycles;
    stats_.stall_cycles += stall;
    charge_cycles(stall);
    WbqEntry e = wbq_.pop();
    bool drop = fault_.kind == FaultPlan::Kind::DropWbqWrite &&
                fault_opportunities_++ == fault_.trigger;
    if (!drop) llc_write_block(e.block_addr, e.data.data(), false);
    clear_wbq_dirty(e);
    llc_port_free_ = std::max(llc_port_free_, stats_.total_cycles);
}

void Engine::wbq_push(uint32_t set, uint32_t way) {
    uint64_t tag = l1_.tag(set, way);
    if (wbq_.capacity() == 0) {
        // Degenerate N = 0: every DBT victim writes straight through with a stall.
        uint64_t stall = cfg_.latencies.sttram_write_cycles;
        stats_.stall_cycles += stall;
        charge_cycles(stall);
        AddrParts p{tag, set, 0};
        llc_write_block(l1_geo_.recompose(p), l1_.data(set, way), false);
        if (l1_.dirty(set, way)) l1_.set_dirty(set, way, false);
        return;
    }
    // A stale entry for the same (set, way) must leave first to keep the
    // queue unique on identity.
    while (wbq_.find(set, way) >= 0) forced_drain_oldest();
    if (wbq_.full()) forced_drain_oldest();
    WbqEntry e;
    e.set = set;
    e.way = way;
    e.tag = tag;
    AddrParts p{tag, set, 0};
    e.block_addr = l1_geo_.recompose(p);
    e.data.assign(l1_.data(set, way), l1_.data(set, way) + cfg_.block_size_bytes);
    uint64_t start = std::max(stats_.total_cycles, llc_port_free_);
    e.completion_cycle = start + cfg_.latencies.sttram_write_cycles;
    llc_port_free_ = e.completion_cycle;
    wbq_.push(std::move(e));
}

void Engine::evict_dirty_victim(uint64_t set, uint32_t way) {
    if (cfg_.dbt_enabled) {
        int idx = dbt_.find(uint32_t(set), way);
        if (idx >= 0) {
            dbt_.remove(uint32_t(idx));
            wbq_push(uint32_t(set), way);
        } else {
            // Already queued; the WBQ snapshot carries the data out.
            IMSIM_CHECK(wbq_.find(uint32_t(set), way, l1_.tag(set, way)) >= 0,
                        "dirty victim tracked by neither DBT nor WBQ");
        }
        l1_.set_dirty(set, way, false);
    } else {
        AddrParts p{l1_.tag(set, way), set, 0};
        llc_write_block(l1_geo_.recompose(p), l1_.data(set, way), false);
        l1_.set_dirty(set, way, false);
    }
}

uint32_t Engine::handle_miss(uint64_t set, const AddrParts& parts, uint64_t block_addr) {
    ++stats_.l1_misses;
    uint32_t victim = l1_.victim_way(set);
    if (l1_.valid(set, victim) && l1_.dirty(set, victim)) evict_dirty_victim(set, victim);
    if (cfg_.dbt_enabled) {
        // A queued writeback of this block must land before the refill or
        // the LLC would serve stale data.
        auto pending = [&] {
            for (uint32_t i = 0; i < wbq_.size(); ++i)
                if (wbq_.at(i).block_addr == block_addr) return true;
            return false;
        };
        while (pending()) forced_drain_oldest();
    }
    std::vector<uint8_t> buf(cfg_.block_size_bytes);
    llc_read_block(block_addr, buf.data());
    l1_.install(set, victim, parts.tag, buf.data(), false);
    return victim;
}

void Engine::handle_write_hit(uint64_t set, uint32_t way, const AccessRecord& rec,
                              const AddrParts& parts) {
    charge_cycles(cfg_.latencies.sram_write_cycles);
    charge(cfg_.energies.l1_write_nj);
    ++stats_.l1_writes;

    uint64_t word_off = parts.offset & ~uint64_t(7);
    uint64_t v = write_payload(rec.address, rec.instr_index);
    uint8_t* dst = l1_.data(set, way) + word_off;
    for (int i = 0; i < 8; ++i) dst[i] = uint8_t((v >> (8 * i)) & 0xff);

    uint64_t block_addr = rec.address & ~(uint64_t(cfg_.block_size_bytes) - 1);

    if (cfg_.write_policy == WritePolicy::WriteThrough) {
        // Store-buffered write-through: LLC write counted and charged, core
        // does not wait on it.
        llc_write_block(block_addr, l1_.data(set, way), false);
        return;
    }
    if (!cfg_.dbt_enabled) {
        if (!l1_.dirty(set, way)) l1_.set_dirty(set, way, true);
        return;
    }
    if (!l1_.dirty(set, way)) {
        if (fault_.kind == FaultPlan::Kind::DropDirtyBit &&
            fault_opportunities_++ == fault_.trigger)
            return; // mutation: the write is applied but never tracked
        l1_.set_dirty(set, way, true);
        if (dbt_.full()) {
            uint32_t v_idx = dbt_.select_victim();
            uint32_t v_set = dbt_.entry(v_idx).set;
            uint32_t v_way = dbt_.entry(v_idx).way;
            dbt_.remove(v_idx);
            // Insert before the push: drains forced by the push must see the
            // new block as DBT-tracked or a same-tag ghost could clean it.
            dbt_.insert(uint32_t(set), way);
            wbq_push(v_set, v_way);
        } else {
            dbt_.insert(uint32_t(set), way);
        }
    } else {
        int idx = dbt_.find(uint32_t(set), way);
        if (idx >= 0) {
            dbt_.on_write(uint32_t(idx));
        } else {
            int wi = wbq_.find(uint32_t(set), way, l1_.tag(set, way));
            IMSIM_CHECK(wi >= 0, "dirty block tracked by neither DBT nor WBQ");
            // Re-dirtying write to a queued block updates the snapshot in place.
            std::memcpy(wbq_.at(uint32_t(wi)).data.data(), l1_.data(set, way),
                        cfg_.block_size_bytes);
        }
    }
}

std::vector<BrSlot> Engine::list_backup_set() const {
    std::vector<BrSlot> out;
    if (cfg_.write_policy == WritePolicy::WriteThrough) return out;
    if (cfg_.dbt_enabled) {
        for (uint32_t i : dbt_.valid_indices()) {
            const DbtEntry& e = dbt_.entry(i);
            BrSlot s;
            s.origin = BrSlot::Origin::Dbt;
            s.set = e.set;
            s.way = e.way;
            s.tag = l1_.tag(e.set, e.way);
            AddrParts p{s.tag, e.set, 0};
            s.block_addr = l1_geo_.recompose(p);
            s.wc = e.wc;
            s.lrw_rank = e.lrw_rank;
            s.data.assign(l1_.data(e.set, e.way), l1_.data(e.set, e.way) + cfg_.block_size_bytes);
            out.push_back(std::move(s));
        }
        for (uint32_t i = 0; i < wbq_.size(); ++i) {
            const WbqEntry& e = wbq_.at(i);
            BrSlot s;
            s.origin = BrSlot::Origin::Wbq;
            s.set = e.set;
            s.way = e.way;
            s.tag = e.tag;
            s.block_addr = e.block_addr;
            s.data = e.data;
            out.push_back(std::move(s));
        }
    } else {
        for (uint64_t set = 0; set < l1_.sets(); ++set) {
            for (uint32_t way = 0; way < l1_.ways(); ++way) {
                if (!l1_.valid(set, way) || !l1_.dirty(set, way)) continue;
                BrSlot s;
                s.origin = BrSlot::Origin::Dbt;
                s.set = uint32_t(set);
                s.way = way;
                s.tag = l1_.tag(set, way);
                AddrParts p{s.tag, set, 0};
                s.block_addr = l1_geo_.recompose(p);
                s.data.assign(l1_.data(set, way), l1_.data(set, way) + cfg_.block_size_bytes);
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

double Engine::do_backup(uint64_t failure_index) {
    double before = stats_.energy_backup_nj;
    mode_ = EnergyMode::Backup;
    std::vector<BrSlot> items = list_backup_set();
    if (fault_.kind == FaultPlan::Kind::SkipBackupBlock && !items.empty() &&
        fault_opportunities_++ == fault_.trigger)
        items.erase(items.begin());

    double e_w = cfg_.energies.llc_write_nj;
    uint64_t items_count = items.size();
    double required = double(items_count) * e_w + cfg_.e_reg_file_nj;
    bool enforce = (cfg_.dbt_enabled && cfg_.br_enabled) || cfg_.capacitor_strict;
    if (enforce && required > cfg_.e_capacitor_nj + 1e-12)
        throw UnsafeBackupError(failure_index, required, cfg_.e_capacitor_nj);

    if (cfg_.br_enabled && cfg_.dbt_enabled) {
        charge(double(items.size()) * e_w + cfg_.e_reg_file_nj);
        charge_cycles(uint64_t(items.size() + 1) * cfg_.latencies.sttram_write_cycles);
        stats_.br_writes += items.size() + 1;
        br_.store(std::move(items));
        stats_.blocks_backed_up += br_.size();
    } else if (cfg_.llc_volatile) {
        // Volatile LLC: everything dirty must reach PCM before the lights go out.
        for (const auto& s : items) pcm_write_block(s.block_addr, s.data.data());
        for (uint64_t set = 0; set < llc_.sets(); ++set) {
            for (uint32_t way = 0; way < llc_.ways(); ++way) {
                if (!llc_.valid(set, way) || !llc_.dirty(set, way)) continue;
                AddrParts p{llc_.tag(set, way), set, 0};
                pcm_write_block(llc_geo_.recompose(p), llc_.data(set, way));
            }
        }
        llc_.clear();
        charge(cfg_.e_reg_file_nj);
        stats_.blocks_backed_up += items.size();
    } else {
        // No backup region: dirty blocks land in the LLC as ordinary writes,
        // displacing LRU victims to PCM.
        for (const auto& s : items) llc_write_block(s.block_addr, s.data.data(), false);
        charge(cfg_.e_reg_file_nj);
        stats_.blocks_backed_up += items.size();
    }
    if (cfg_.dbt_enabled && items_count < cfg_.k_max_dirty) {
        // The fixed capacitor dumps its whole charge at every failure; energy
        // provisioned for untracked slots dissipates unused, so the backup
        // draw of a K-bounded design is constant regardless of occupancy.
        charge(double(cfg_.k_max_dirty - items_count) * e_w);
    }
    ++stats_.backups_performed;
    mode_ = EnergyMode::Stable;
    return stats_.energy_backup_nj - before;
}

void Engine::do_restore() {
    mode_ = EnergyMode::Restore;
    if (cfg_.br_enabled && cfg_.dbt_enabled && br_.has_checkpoint()) {
        for (const auto& s : br_.slots()) {
            if (s.origin == BrSlot::Origin::Dbt) {
                l1_.install(s.set, s.way, s.tag, s.data.data(), true);
                dbt_.restore_entry(s.set, s.way, s.wc, s.lrw_rank);
            }
        }
        for (const auto& s : br_.slots()) {
            if (s.origin != BrSlot::Origin::Wbq) continue;
            bool resident = !l1_.valid(s.set, s.way);
            if (resident) l1_.install(s.set, s.way, s.tag, s.data.data(), true);
            WbqEntry e;
            e.set = s.set;
            e.way = s.way;
            e.tag = s.tag;
            e.block_addr = s.block_addr;
            e.data = s.data;
            uint64_t start = std::max(stats_.total_cycles, llc_port_free_);
            e.completion_cycle = start + cfg_.latencies.sttram_write_cycles;
            llc_port_free_ = e.completion_cycle;
            wbq_.push(std::move(e));
        }
        uint64_t n = br_.size();
        charge(double(n + 1) * cfg_.energies.llc_read_nj);
        charge_cycles((n + 1) * cfg_.latencies.sttram_read_cycles);
        stats_.br_reads += n + 1;
        br_.clear(); // checkpoint is consumed; stale copies must not shadow the LLC
    } else {
        // Cold start: register file re-read from non-volatile storage.
        charge(cfg_.energies.llc_read_nj);
        charge_cycles(cfg_.latencies.sttram_read_cycles);
    }
    ++stats_.restores_performed;
    mode_ = EnergyMode::Stable;
}

void Engine::fire_failure() {
    double spent = do_backup(failures_fired_);
    last_backup_energy_nj_ = spent;
    backup_energy_log_.push_back(spent);
    l1_.clear();
    if (cfg_.dbt_enabled) {
        dbt_.clear();
        wbq_.clear();
    }
    ++failures_fired_;
    do_restore();
}

void Engine::step(const AccessRecord& rec) {
    switch (schedule_.mode) {
    case PowerSchedule::Mode::Periodic:
        while (rec.instr_index >= next_failure_instr_) {
            fire_failure();
            next_failure_instr_ += schedule_.every_n_instructions;
        }
        break;
    case PowerSchedule::Mode::ExplicitList:
        while (next_failure_idx_ < schedule_.instr_indices.size() &&
               rec.instr_index >= schedule_.instr_indices[next_failure_idx_]) {
            fire_failure();
            ++next_failure_idx_;
        }
        break;
    case PowerSchedule::Mode::None:
        break;
    }

    uint64_t addr = rec.address;
    if (addr >= cfg_.mem_size_bytes) {
        if (!cfg_.allow_address_wrap)
            throw TraceError("trace address " + std::to_string(addr) +
                             " outside memory of " + std::to_string(cfg_.mem_size_bytes) +
                             " bytes");
        addr %= cfg_.mem_size_bytes;
    }
    AccessRecord r = rec;
    r.address = addr;

    if (cfg_.dbt_enabled) background_drain();

    AddrParts parts = l1_geo_.decompose(addr);
    uint64_t block_addr = l1_geo_.block_base(addr);
    int way = l1_.find(parts.set, parts.tag);
    if (way < 0)
        way = int(handle_miss(parts.set, parts, block_addr));
    else
        ++stats_.l1_hits;
    l1_.touch(parts.set, uint32_t(way));

    if (r.kind == AccessKind::Read) {
        charge_cycles(cfg_.latencies.sram_read_cycles);
        charge(cfg_.energies.l1_read_nj);
        ++stats_.l1_reads;
    } else {
        handle_write_hit(parts.set, uint32_t(way), r, parts);
    }

    ++steps_;
    if (check_invariants_) {
        if (cfg_.dbt_enabled) {
            IMSIM_CHECK(l1_.dirty_count() <= cfg_.k_max_dirty, "dirty count exceeds K");
            IMSIM_CHECK(dbt_.size() <= cfg_.dbt_entries, "DBT exceeds M");
            IMSIM_CHECK(wbq_.size() <= cfg_.wbq_entries, "WBQ exceeds N");
        }
        if (cfg_.write_policy == WritePolicy::WriteThrough)
            IMSIM_CHECK(l1_.dirty_count() == 0, "write-through L1 holds dirty blocks");
        if (steps_ % 1024 == 0) audit();
    }
}

SimStats Engine::run(std::span<const AccessRecord> trace) {
    for (const auto& rec : trace) step(rec);
    return stats_;
}

std::vector<uint8_t> Engine::visible_memory_image() const {
    std::vector<uint8_t> img = pcm_.bytes();
    auto overlay = [&](uint64_t block_addr, const uint8_t* data) {
        std::memcpy(img.data() + block_addr, data, cfg_.block_size_bytes);
    };
    for (uint64_t set = 0; set < llc_.sets(); ++set)
        for (uint32_t way = 0; way < llc_.ways(); ++way)
            if (llc_.valid(set, way)) {
                AddrParts p{llc_.tag(set, way), set, 0};
                overlay(llc_geo_.recompose(p), llc_.data(set, way));
            }
    for (const auto& s : br_.slots()) overlay(s.block_addr, s.data.data());
    for (uint32_t i = 0; i < wbq_.size(); ++i)
        overlay(wbq_.at(i).block_addr, wbq_.at(i).data.data());
    for (uint64_t set = 0; set < l1_.sets(); ++set)
        for (uint32_t way = 0; way < l1_.ways(); ++way)
            if (l1_.valid(set, way)) {
                AddrParts p{l1_.tag(set, way), set, 0};
                overlay(l1_geo_.recompose(p), l1_.data(set, way));
            }
    return img;
}

void Engine::audit() const {
    uint64_t dirty = 0;
    for (uint64_t set = 0; set < l1_.sets(); ++set) {
        for (uint32_t way = 0; way < l1_.ways(); ++way) {
            if (!l1_.valid(set, way) || !l1_.dirty(set, way)) continue;
            ++dirty;
            if (cfg_.dbt_enabled) {
                bool in_dbt = dbt_.find(uint32_t(set), way) >= 0;
                bool in_wbq = wbq_.find(uint32_t(set), way, l1_.tag(set, way)) >= 0;
                // DBT takes precedence; a same-tag WBQ entry may coexist when
                // the frame was refilled while its old snapshot was queued.
                IMSIM_CHECK(in_dbt || in_wbq, "dirty block tracked by neither DBT nor WBQ");
            }
        }
    }
    IMSIM_CHECK(dirty == l1_.dirty_count(), "L1 dirty counter out of sync");
    if (cfg_.dbt_enabled) {
        dbt_.audit();
        IMSIM_CHECK(dirty <= cfg_.k_max_dirty, "dirty count exceeds K");
        for (uint32_t i : dbt_.valid_indices()) {
            const DbtEntry& e = dbt_.entry(i);
            IMSIM_CHECK(l1_.valid(e.set, e.way) && l1_.dirty(e.set, e.way),
                        "DBT entry references a clean or invalid block");
        }
    }
}

} // namespace imsim
