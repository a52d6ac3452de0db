#pragma once

#include <array>
#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pacman/value.hpp"

namespace pacman {

struct UnknownTableError : std::runtime_error {
    explicit UnknownTableError(const std::string& name)
        : std::runtime_error("unknown table: " + name) {}
};

enum class StoreResult { ok, duplicate_key, absent_key };

// Single-version in-memory table with a sharded primary-key hash index.
// Shard mutexes protect map structure only; transaction-level isolation is the
// caller's job (tuple locks at runtime, schedule construction at recovery).
class Table {
  public:
    explicit Table(std::string name, size_t shard_count = 64);

    const std::string& name() const { return name_; }

    std::optional<Value> get(const Value& key) const;
    void put(const Value& key, const Value& value);
    StoreResult insert(const Value& key, const Value& value);
    StoreResult erase(const Value& key);

    size_t row_count() const;
    // rows sorted by key; used by digests and checkpoints
    std::vector<std::pair<Value, Value>> sorted_rows() const;

  private:
    struct Shard {
        mutable std::shared_mutex mutex;
        std::unordered_map<Value, Value, ValueHash> rows;
    };
    Shard& shard_for(const Value& key) const;

    std::string name_;
    mutable std::vector<Shard> shards_;
};

// Tracks every row-level mutation; test instrumentation for replay-order checks.
class WriteTracer {
  public:
    virtual ~WriteTracer() = default;
    virtual void on_write(const std::string& table, const Value& key,
                          const std::optional<Value>& value) = 0;
};

class Database {
  public:
    Database() = default;
    Database(const Database&) = delete;
    Database& operator=(const Database&) = delete;

    Table& create_table(const std::string& name);
    Table& table(const std::string& name) const;
    Table* find_table(const std::string& name) const;
    std::vector<std::string> table_names() const;  // sorted

    std::optional<Value> get(const std::string& table, const Value& key) const;
    void put(const std::string& table, const Value& key, const Value& value);
    StoreResult insert(const std::string& table, const Value& key, const Value& value);
    StoreResult erase(const std::string& table, const Value& key);
    // tombstone-aware helper used by write-set application
    StoreResult apply_write(const WriteOp& w);

    std::array<uint8_t, 32> state_digest() const;
    std::string state_digest_hex() const;

    void set_tracer(WriteTracer* tracer) { tracer_ = tracer; }

  private:
    std::unordered_map<std::string, std::unique_ptr<Table>> tables_;
    std::vector<std::string> order_;
    WriteTracer* tracer_ = nullptr;
};

// checkpoint.<epoch>.db serialization
std::vector<uint8_t> snapshot(const Database& db);
void restore_into(Database& db, const std::vector<uint8_t>& bytes);
std::unique_ptr<Database> restore(const std::vector<uint8_t>& bytes);

void write_checkpoint_file(const Database& db, const std::string& path);
std::unique_ptr<Database> read_checkpoint_file(const std::string& path);

}  // namespace pacman
