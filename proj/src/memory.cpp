#include "imsim/memory.hpp"

namespace imsim {

void BackupRegion::store(std::vector<BrSlot> slots) {
    IMSIM_CHECK(slots.size() <= capacity_, "backup region capacity exceeded");
    slots_ = std::move(slots);
    has_regfile_ = true;
}

void BackupRegion::clear() {
    slots_.clear();
    has_regfile_ = false;
}

} // namespace imsim
