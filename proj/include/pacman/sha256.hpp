#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <string>

namespace pacman {

// Minimal SHA-256 (FIPS 180-4); used for database state digests.
class Sha256 {
  public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, size_t len);
    std::array<uint8_t, 32> finish();

  private:
    void process_block(const uint8_t* block);

    uint32_t state_[8];
    uint64_t total_len_ = 0;
    uint8_t buf_[64];
    size_t buf_len_ = 0;
};

std::string hex_digest(const std::array<uint8_t, 32>& d);

}  // namespace pacman
