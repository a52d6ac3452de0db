#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "pacman/value.hpp"

namespace pacman {

struct LockId {
    std::string table;
    Value key;

    bool operator<(const LockId& o) const {
        if (int c = table.compare(o.table)) return c < 0;
        return compare_values(key, o.key) < 0;
    }
    bool operator==(const LockId& o) const {
        return table == o.table && compare_values(key, o.key) == 0;
    }
};

// Per-tuple shared/exclusive locks with wait-die deadlock avoidance.
// Requesters older than every conflicting holder wait; younger ones die
// and the transaction restarts with its original timestamp.
class LockManager {
  public:
    explicit LockManager(size_t bucket_count = 256) : buckets_(bucket_count) {}

    // returns false when the requester must die
    bool acquire(uint64_t ts, const LockId& id, bool exclusive);
    void release_all(uint64_t ts, const std::vector<LockId>& held);

    uint64_t acquisition_count() const { return acquisitions_.load(); }

  private:
    struct LockState {
        uint64_t x_holder = 0;  // ts, 0 = none
        std::set<uint64_t> s_holders;
    };
    struct Bucket {
        std::mutex mutex;
        std::condition_variable cv;
        std::map<LockId, LockState> locks;
    };

    Bucket& bucket_for(const LockId& id);

    std::vector<Bucket> buckets_;
    std::atomic<uint64_t> acquisitions_{0};
};

}  // namespace pacman
