#include "pacman/storage.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include <zlib.h>

#include "pacman/sha256.hpp"

namespace pacman {

Table::Table(std::string name, size_t shard_count)
    : name_(std::move(name)), shards_(shard_count) {}

Table::Shard& Table::shard_for(const Value& key) const {
    return shards_[ValueHash{}(key) % shards_.size()];
}

std::optional<Value> Table::get(const Value& key) const {
    Shard& s = shard_for(key);
    std::shared_lock lk(s.mutex);
    auto it = s.rows.find(key);
    if (it == s.rows.end()) return std::nullopt;
    return it->second;
}

void Table::put(const Value& key, const Value& value) {
    Shard& s = shard_for(key);
    std::unique_lock lk(s.mutex);
    s.rows[key] = value;
}

StoreResult Table::insert(const Value& key, const Value& value) {
    Shard& s = shard_for(key);
    std::unique_lock lk(s.mutex);
    auto [it, inserted] = s.rows.emplace(key, value);
    return inserted ? StoreResult::ok : StoreResult::duplicate_key;
}

StoreResult Table::erase(const Value& key) {
    Shard& s = shard_for(key);
    std::unique_lock lk(s.mutex);
    return s.rows.erase(key) > 0 ? StoreResult::ok : StoreResult::absent_key;
}

size_t Table::row_count() const {
    size_t n = 0;
    for (auto& s : shards_) {
        std::shared_lock lk(s.mutex);
        n += s.rows.size();
    }
    return n;
}

std::vector<std::pair<Value, Value>> Table::sorted_rows() const {
    std::vector<std::pair<Value, Value>> rows;
    rows.reserve(row_count());
    for (auto& s : shards_) {
        std::shared_lock lk(s.mutex);
        for (auto& [k, v] : s.rows) rows.emplace_back(k, v);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return compare_values(a.first, b.first) < 0;
    });
    return rows;
}

Table& Database::create_table(const std::string& name) {
    auto it = tables_.find(name);
    if (it != tables_.end()) return *it->second;
    auto t = std::make_unique<Table>(name);
    Table& ref = *t;
    tables_.emplace(name, std::move(t));
    order_.push_back(name);
    return ref;
}

Table& Database::table(const std::string& name) const {
    auto it = tables_.find(name);
    if (it == tables_.end()) throw UnknownTableError(name);
    return *it->second;
}

Table* Database::find_table(const std::string& name) const {
    auto it = tables_.find(name);
    return it == tables_.end() ? nullptr : it->second.get();
}

std::vector<std::string> Database::table_names() const {
    std::vector<std::string> names = order_;
    std::sort(names.begin(), names.end());
    return names;
}

std::optional<Value> Database::get(const std::string& t, const Value& key) const {
    return table(t).get(key);
}

void Database::put(const std::string& t, const Value& key, const Value& value) {
    table(t).put(key, value);
    if (tracer_) tracer_->on_write(t, key, value);
}

StoreResult Database::insert(const std::string& t, const Value& key, const Value& value) {
    StoreResult r = table(t).insert(key, value);
    if (r == StoreResult::ok && tracer_) tracer_->on_write(t, key, value);
    return r;
}

StoreResult Database::erase(const std::string& t, const Value& key) {
    StoreResult r = table(t).erase(key);
    if (r == StoreResult::ok && tracer_) tracer_->on_write(t, key, std::nullopt);
    return r;
}

StoreResult Database::apply_write(const WriteOp& w) {
    if (!w.value.has_value()) return erase(w.table, w.key);
    put(w.table, w.key, *w.value);
    return StoreResult::ok;
}

std::array<uint8_t, 32> Database::state_digest() const {
    Sha256 h;
    std::vector<uint8_t> buf;
    for (const std::string& name : table_names()) {
        const Table& t = table(name);
        auto rows = t.sorted_rows();
        if (rows.empty()) continue;  // empty tables do not affect state
        buf.clear();
        uint32_t n = static_cast<uint32_t>(name.size());
        for (int i = 0; i < 4; i++) buf.push_back(static_cast<uint8_t>(n >> (8 * i)));
        buf.insert(buf.end(), name.begin(), name.end());
        for (auto& [k, v] : rows) {
            append_canonical(buf, k);
            append_canonical(buf, v);
        }
        h.update(buf.data(), buf.size());
    }
    return h.finish();
}

std::string Database::state_digest_hex() const { return hex_digest(state_digest()); }

namespace {

constexpr char kCheckpointMagic[8] = {'P', 'C', 'C', 'K', 'P', 'T', '0', '1'};

void append_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; i++) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t read_u32(const std::vector<uint8_t>& b, size_t& pos) {
    if (pos + 4 > b.size()) throw IntegrityError("checkpoint truncated");
    uint32_t v = 0;
    for (int i = 0; i < 4; i++) v |= uint32_t(b[pos + i]) << (8 * i);
    pos += 4;
    return v;
}

}  // namespace

std::vector<uint8_t> snapshot(const Database& db) {
    std::vector<uint8_t> out;
    out.insert(out.end(), kCheckpointMagic, kCheckpointMagic + 8);
    for (const std::string& name : db.table_names()) {
        for (auto& [k, v] : db.table(name).sorted_rows()) {
            append_u32(out, static_cast<uint32_t>(name.size()));
            out.insert(out.end(), name.begin(), name.end());
            append_canonical(out, k);
            append_canonical(out, v);
        }
    }
    uint32_t crc = static_cast<uint32_t>(
        crc32(0L, out.data(), static_cast<uInt>(out.size())));
    append_u32(out, crc);
    return out;
}

void restore_into(Database& db, const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 12) throw IntegrityError("checkpoint too short");
    if (!std::equal(kCheckpointMagic, kCheckpointMagic + 8, bytes.begin()))
        throw IntegrityError("checkpoint: bad magic");
    size_t body_len = bytes.size() - 4;
    uint32_t stored = 0;
    for (int i = 0; i < 4; i++) stored |= uint32_t(bytes[body_len + i]) << (8 * i);
    uint32_t actual = static_cast<uint32_t>(
        crc32(0L, bytes.data(), static_cast<uInt>(body_len)));
    if (stored != actual) throw IntegrityError("checkpoint: checksum mismatch");

    size_t pos = 8;
    while (pos < body_len) {
        uint32_t n = read_u32(bytes, pos);
        if (pos + n > body_len) throw IntegrityError("checkpoint truncated");
        std::string name(bytes.begin() + pos, bytes.begin() + pos + n);
        pos += n;
        Value key = read_canonical(bytes, pos);
        Value value = read_canonical(bytes, pos);
        db.create_table(name).put(key, value);
    }
}

std::unique_ptr<Database> restore(const std::vector<uint8_t>& bytes) {
    auto db = std::make_unique<Database>();
    restore_into(*db, bytes);
    return db;
}

void write_checkpoint_file(const Database& db, const std::string& path) {
    std::vector<uint8_t> bytes = snapshot(db);
    std::string tmp = path + ".tmp";
    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw IntegrityError("cannot open " + tmp);
    size_t written = std::fwrite(bytes.data(), 1, bytes.size(), f);
    bool ok = written == bytes.size() && std::fflush(f) == 0;
    std::fclose(f);
    if (!ok) {
        std::filesystem::remove(tmp);
        throw IntegrityError("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::unique_ptr<Database> read_checkpoint_file(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IntegrityError("cannot open " + path);
    std::fseek(f, 0, SEEK_END);
    long size = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    std::vector<uint8_t> bytes(static_cast<size_t>(size));
    size_t got = bytes.empty() ? 0 : std::fread(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
    if (got != bytes.size()) throw IntegrityError("short read from " + path);
    return restore(bytes);
}

}  // namespace pacman
