#include "imsim/dbt.hpp"

#include <algorithm>

namespace imsim {

DirtyBlockTable::DirtyBlockTable(uint32_t entries, Policy policy, uint32_t wc_bits,
                                 LrwEvict lrw_evict)
    : entries_(entries), policy_(policy), wc_bits_(wc_bits), lrw_evict_(lrw_evict) {}

int DirtyBlockTable::find(uint32_t set, uint32_t way) const {
    for (uint32_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].valid && entries_[i].set == set && entries_[i].way == way)
            return int(i);
    return -1;
}

uint32_t DirtyBlockTable::insert(uint32_t set, uint32_t way) {
    IMSIM_CHECK(!full(), "DBT insert on full table");
    IMSIM_CHECK(find(set, way) < 0, "duplicate DBT entry for (set, way)");
    for (uint32_t i = 0; i < entries_.size(); ++i) {
        if (!entries_[i].valid) {
            entries_[i].valid = true;
            entries_[i].set = set;
            entries_[i].way = way;
            entries_[i].wc = 1;
            entries_[i].lrw_rank = valid_count_; // most recent
            ++valid_count_;
            return i;
        }
    }
    throw SimBugError("DBT free slot not found");
}

void DirtyBlockTable::on_write(uint32_t index) {
    IMSIM_CHECK(index < entries_.size() && entries_[index].valid, "DBT write to invalid entry");
    if (policy_ == Policy::LFW) {
        // At saturation the rescale replaces the increment; this matches the
        // worked sequence {19,17,31,3} -> {3,1,15,0}.
        if (entries_[index].wc == wc_max())
            rescale();
        else
            ++entries_[index].wc;
    } else {
        uint32_t old = entries_[index].lrw_rank;
        for (auto& e : entries_)
            if (e.valid && e.lrw_rank > old) --e.lrw_rank;
        entries_[index].lrw_rank = valid_count_ - 1;
    }
}

void DirtyBlockTable::rescale() {
    uint32_t half = 1u << (wc_bits_ - 1);
    for (auto& e : entries_)
        if (e.valid) e.wc = (e.wc > half) ? e.wc - half : 0;
}

uint32_t DirtyBlockTable::select_victim() const {
    IMSIM_CHECK(full(), "victim selection on non-full DBT");
    int best = -1;
    for (uint32_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (!e.valid) continue;
        if (best < 0) {
            best = int(i);
            continue;
        }
        const auto& b = entries_[best];
        if (policy_ == Policy::LFW) {
            if (e.wc < b.wc ||
                (e.wc == b.wc && std::pair(e.set, e.way) < std::pair(b.set, b.way)))
                best = int(i);
        } else {
            bool better = (lrw_evict_ == LrwEvict::MostRecent) ? e.lrw_rank > b.lrw_rank
                                                               : e.lrw_rank < b.lrw_rank;
            if (better) best = int(i);
        }
    }
    return uint32_t(best);
}

void DirtyBlockTable::remove(uint32_t index) {
    IMSIM_CHECK(index < entries_.size() && entries_[index].valid, "DBT remove of invalid entry");
    uint32_t old = entries_[index].lrw_rank;
    entries_[index].valid = false;
    --valid_count_;
    for (auto& e : entries_)
        if (e.valid && e.lrw_rank > old) --e.lrw_rank;
}

void DirtyBlockTable::clear() {
    for (auto& e : entries_) e.valid = false;
    valid_count_ = 0;
}

void DirtyBlockTable::restore_entry(uint32_t set, uint32_t way, uint32_t wc, uint32_t lrw_rank) {
    IMSIM_CHECK(!full(), "DBT restore on full table");
    for (auto& e : entries_) {
        if (!e.valid) {
            e = DbtEntry{true, set, way, wc, lrw_rank};
            ++valid_count_;
            return;
        }
    }
}

std::vector<uint32_t> DirtyBlockTable::valid_indices() const {
    std::vector<uint32_t> out;
    out.reserve(valid_count_);
    for (uint32_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].valid) out.push_back(i);
    return out;
}

void DirtyBlockTable::audit() const {
    uint32_t count = 0;
    std::vector<uint32_t> ranks;
    for (uint32_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (!e.valid) continue;
        ++count;
        IMSIM_CHECK(e.wc <= wc_max(), "WC exceeds field width");
        for (uint32_t j = i + 1; j < entries_.size(); ++j)
            IMSIM_CHECK(!(entries_[j].valid && entries_[j].set == e.set &&
                          entries_[j].way == e.way),
                        "duplicate (set, way) in DBT");
        ranks.push_back(e.lrw_rank);
    }
    IMSIM_CHECK(count == valid_count_, "DBT valid_count mismatch");
    if (policy_ == Policy::LRW) {
        std::sort(ranks.begin(), ranks.end());
        for (uint32_t i = 0; i < ranks.size(); ++i)
            IMSIM_CHECK(ranks[i] == i, "LRW ranks are not a permutation prefix");
    }
}

} // namespace imsim
