#include "pacman/value.hpp"

namespace pacman {

std::string value_to_string(const Value& v) {
    if (is_int(v)) return std::to_string(std::get<int64_t>(v));
    return std::get<std::string>(v);
}

void append_canonical(std::vector<uint8_t>& out, const Value& v) {
    if (is_int(v)) {
        out.push_back(0);
        uint64_t u = static_cast<uint64_t>(std::get<int64_t>(v));
        for (int i = 0; i < 8; i++) out.push_back(static_cast<uint8_t>(u >> (8 * i)));
    } else {
        const std::string& s = std::get<std::string>(v);
        out.push_back(1);
        uint32_t n = static_cast<uint32_t>(s.size());
        for (int i = 0; i < 4; i++) out.push_back(static_cast<uint8_t>(n >> (8 * i)));
        out.insert(out.end(), s.begin(), s.end());
    }
}

std::vector<uint8_t> canonical_bytes(const Value& v) {
    std::vector<uint8_t> out;
    append_canonical(out, v);
    return out;
}

Value read_canonical(const std::vector<uint8_t>& bytes, size_t& pos) {
    if (pos >= bytes.size()) throw IntegrityError("value encoding truncated");
    uint8_t tag = bytes[pos++];
    if (tag == 0) {
        if (pos + 8 > bytes.size()) throw IntegrityError("value encoding truncated");
        uint64_t u = 0;
        for (int i = 0; i < 8; i++) u |= uint64_t(bytes[pos + i]) << (8 * i);
        pos += 8;
        return Value{static_cast<int64_t>(u)};
    }
    if (tag != 1) throw IntegrityError("bad value tag");
    if (pos + 4 > bytes.size()) throw IntegrityError("value encoding truncated");
    uint32_t n = 0;
    for (int i = 0; i < 4; i++) n |= uint32_t(bytes[pos + i]) << (8 * i);
    pos += 4;
    if (pos + n > bytes.size()) throw IntegrityError("value encoding truncated");
    std::string s(bytes.begin() + pos, bytes.begin() + pos + n);
    pos += n;
    return Value{std::move(s)};
}

int compare_values(const Value& a, const Value& b) {
    if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
    if (is_int(a)) {
        int64_t x = std::get<int64_t>(a), y = std::get<int64_t>(b);
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    int c = std::get<std::string>(a).compare(std::get<std::string>(b));
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

size_t ValueHash::operator()(const Value& v) const {
    if (is_int(v)) return std::hash<int64_t>{}(std::get<int64_t>(v)) * 0x9e3779b97f4a7c15ull;
    return std::hash<std::string>{}(std::get<std::string>(v));
}

uint64_t fnv1a64(const uint8_t* data, size_t len) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (size_t i = 0; i < len; i++) {
        h ^= data[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t dispatch_hash(const std::string& table, const Value& key) {
    std::vector<uint8_t> buf;
    buf.reserve(table.size() + 16);
    buf.insert(buf.end(), table.begin(), table.end());
    buf.push_back(0);
    append_canonical(buf, key);
    return fnv1a64(buf.data(), buf.size());
}

}  // namespace pacman
