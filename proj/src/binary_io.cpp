#include "fwdrd/binary_io.hpp"

#include <zlib.h>

#include <fstream>
#include <iterator>

namespace fwdrd::binio {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes a uInt length; feed in chunks so multi-GB buffers are fine.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const std::size_t n = std::min(kChunk, bytes.size() - off);
    crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

Reader open_container(std::span<const std::uint8_t> bytes, std::string_view magic,
                      std::uint16_t max_version, std::uint16_t* version_out) {
  const std::size_t header = magic.size() + sizeof(std::uint16_t);
  if (bytes.size() < header + sizeof(std::uint32_t)) throw FormatError("file too short");
  if (std::memcmp(bytes.data(), magic.data(), magic.size()) != 0)
    throw FormatError("bad magic, expected \"" + std::string(magic) + "\"");
  std::uint16_t version;
  std::memcpy(&version, bytes.data() + magic.size(), sizeof version);
  if (version == 0 || version > max_version)
    throw FormatError("unsupported format version " + std::to_string(version) +
                      " (this build reads up to " + std::to_string(max_version) + ")");
  const std::size_t body_end = bytes.size() - sizeof(std::uint32_t);
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + body_end, sizeof stored);
  if (crc32(bytes.first(body_end)) != stored) throw FormatError("checksum mismatch");
  if (version_out) *version_out = version;
  return Reader(bytes.subspan(header, body_end - header));
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace fwdrd::binio
