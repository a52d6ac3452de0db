#include "pacman/lock_manager.hpp"

namespace pacman {

LockManager::Bucket& LockManager::bucket_for(const LockId& id) {
    uint64_t h = dispatch_hash(id.table, id.key);
    return buckets_[h % buckets_.size()];
}

bool LockManager::acquire(uint64_t ts, const LockId& id, bool exclusive) {
    Bucket& b = bucket_for(id);
    std::unique_lock lk(b.mutex);
    LockState& st = b.locks[id];
    while (true) {
        bool held_s = st.s_holders.count(ts) > 0;
        bool held_x = st.x_holder == ts;
        if (held_x || (!exclusive && held_s)) {
            acquisitions_.fetch_add(1, std::memory_order_relaxed);
            return true;  // reentrant
        }
        uint64_t oldest_conflict = UINT64_MAX;
        bool conflict = false;
        if (st.x_holder != 0 && st.x_holder != ts) {
            conflict = true;
            oldest_conflict = std::min(oldest_conflict, st.x_holder);
        }
        if (exclusive) {
            for (uint64_t s : st.s_holders) {
                if (s == ts) continue;
                conflict = true;
                oldest_conflict = std::min(oldest_conflict, s);
            }
        }
        if (!conflict) {
            if (exclusive) {
                st.s_holders.erase(ts);  // upgrade
                st.x_holder = ts;
            } else {
                st.s_holders.insert(ts);
            }
            acquisitions_.fetch_add(1, std::memory_order_relaxed);
            return true;
        }
        if (ts > oldest_conflict) return false;  // younger dies
        b.cv.wait(lk);
    }
}

void LockManager::release_all(uint64_t ts, const std::vector<LockId>& held) {
    for (const LockId& id : held) {
        Bucket& b = bucket_for(id);
        std::unique_lock lk(b.mutex);
        auto it = b.locks.find(id);
        if (it == b.locks.end()) continue;
        if (it->second.x_holder == ts) it->second.x_holder = 0;
        it->second.s_holders.erase(ts);
        if (it->second.x_holder == 0 && it->second.s_holders.empty()) b.locks.erase(it);
        b.cv.notify_all();
    }
}

}  // namespace pacman
