#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace bodygen {

// FIPS 180-4 SHA-256, enough for content digests of emitted files.
class Sha256 {
  public:
    Sha256();
    void update(const void* data, std::size_t len);
    std::array<std::uint8_t, 32> finish();

  private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_{};
    std::array<std::uint8_t, 64> buffer_{};
    std::uint64_t total_ = 0;
    std::size_t buffered_ = 0;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file_hex(const std::string& path);

}  // namespace bodygen
