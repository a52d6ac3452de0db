#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace pacman {

struct IntegrityError : std::runtime_error {
    explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

// Keys and values are either 64-bit integers or byte strings. Integers sort
// before strings so mixed-type tables still have a total order for digests.
using Value = std::variant<int64_t, std::string>;

inline bool is_int(const Value& v) { return v.index() == 0; }

std::string value_to_string(const Value& v);

// type tag + little-endian payload; shared by digests, checkpoints and logs
void append_canonical(std::vector<uint8_t>& out, const Value& v);
std::vector<uint8_t> canonical_bytes(const Value& v);
// inverse of append_canonical; throws IntegrityError on truncation
Value read_canonical(const std::vector<uint8_t>& bytes, size_t& pos);

int compare_values(const Value& a, const Value& b);

struct ValueHash {
    size_t operator()(const Value& v) const;
};

// stable across platforms and runs; used for key-space dispatch
uint64_t fnv1a64(const uint8_t* data, size_t len);
uint64_t dispatch_hash(const std::string& table, const Value& key);

// one row-level modification; nullopt value means delete (tombstone)
struct WriteOp {
    std::string table;
    Value key;
    std::optional<Value> value;

    bool operator==(const WriteOp& other) const = default;
};

}  // namespace pacman
