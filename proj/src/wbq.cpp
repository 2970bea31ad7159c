#include "imsim/wbq.hpp"

namespace imsim {

WbqEntry WritebackQueue::pop() {
    IMSIM_CHECK(!entries_.empty(), "pop from empty WBQ");
    WbqEntry e = std::move(entries_.front());
    entries_.pop_front();
    return e;
}

void WritebackQueue::push(WbqEntry e) {
    IMSIM_CHECK(entries_.size() < capacity_, "push to full WBQ");
    IMSIM_CHECK(find(e.set, e.way) < 0, "duplicate (set, way) in WBQ");
    entries_.push_back(std::move(e));
}

int WritebackQueue::find(uint32_t set, uint32_t way) const {
    for (size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].set == set && entries_[i].way == way) return int(i);
    return -1;
}

int WritebackQueue::find(uint32_t set, uint32_t way, uint64_t tag) const {
    for (size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].set == set && entries_[i].way == way && entries_[i].tag == tag)
            return int(i);
    return -1;
}

} // namespace imsim
