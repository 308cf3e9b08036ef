#include "fwdrd/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "fwdrd/locality.hpp"

namespace fwdrd {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Trace::Trace(std::vector<BlockId> blocks, std::uint64_t block_size)
    : blocks_(std::move(blocks)), block_size_(block_size) {
  if (block_size_ == 0) throw Error("block_size must be positive");
}

Trace Trace::reversed() const {
  return Trace(std::vector<BlockId>(blocks_.rbegin(), blocks_.rend()), block_size_);
}

BlockId pack_block_key(std::uint64_t disk, std::uint64_t block_index) {
  if (disk >> kDiskBits) throw Error("disk number " + std::to_string(disk) + " does not fit in 16 bits");
  if (block_index >> kBlockIndexBits)
    throw Error("block index " + std::to_string(block_index) + " does not fit in 48 bits");
  return (disk << kBlockIndexBits) | block_index;
}

std::uint64_t key_disk(BlockId key) noexcept { return key >> kBlockIndexBits; }

std::uint64_t key_block_index(BlockId key) noexcept {
  return key & ((std::uint64_t{1} << kBlockIndexBits) - 1);
}

Trace parse_msr_csv(std::istream& in, std::uint64_t block_size, bool expand_multiblock) {
  if (block_size == 0) throw Error("block_size must be positive");
  std::vector<BlockId> blocks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view row = trim(line);
    if (row.empty()) continue;

    std::string_view fields[7];
    std::size_t nfields = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = row.find(',', start);
      if (nfields == 7) throw ParseError("expected 7 fields, found more", line_no);
      fields[nfields++] = row.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                            : comma - start);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (nfields != 7)
      throw ParseError("expected 7 fields, found " + std::to_string(nfields), line_no);

    std::uint64_t disk = 0, offset = 0, size = 0;
    if (!parse_u64(fields[2], disk)) throw ParseError("bad DiskNumber", line_no);
    if (!parse_u64(fields[4], offset)) throw ParseError("bad Offset", line_no);
    if (!parse_u64(fields[5], size)) throw ParseError("bad Size", line_no);

    const std::uint64_t first = offset / block_size;
    std::uint64_t count = 1;
    if (expand_multiblock && size > 0) count = size / block_size + (size % block_size != 0);
    for (std::uint64_t j = 0; j < count; ++j) {
      try {
        blocks.push_back(pack_block_key(disk, first + j));
      } catch (const Error& e) {
        throw ParseError(e.what(), line_no);
      }
    }
  }
  return Trace(std::move(blocks), block_size);
}

PlainTrace parse_plain(std::istream& in) {
  PlainTrace result;
  std::unordered_map<std::string, BlockId> ids;
  std::vector<BlockId> blocks;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view token = trim(line);
    if (token.empty() || token.front() == '#') continue;
    auto [it, inserted] = ids.try_emplace(std::string(token), ids.size());
    if (inserted) result.symbols.emplace_back(token);
    blocks.push_back(it->second);
  }
  if (blocks.empty()) throw ParseError("plain trace contains no accesses", 0);
  result.trace = Trace(std::move(blocks));
  return result;
}

void write_plain(std::ostream& out, const PlainTrace& plain) {
  for (BlockId b : plain.trace.blocks()) out << plain.symbols.at(b) << '\n';
}

TraceStats trace_stats(const Trace& trace) {
  if (trace.empty()) throw Error("trace_stats requires a non-empty trace");
  std::unordered_set<BlockId> blocks(trace.blocks().begin(), trace.blocks().end());
  const auto deltas = address_deltas(trace);
  std::unordered_set<std::int64_t> unique_deltas(deltas.begin(), deltas.end());

  TraceStats s;
  s.length = trace.size();
  s.unique_blocks = blocks.size();
  s.mean_accesses_per_block = static_cast<double>(s.length) / static_cast<double>(s.unique_blocks);
  s.unique_deltas = unique_deltas.size();
  s.delta_compression_ratio =
      static_cast<double>(s.unique_deltas) / static_cast<double>(s.unique_blocks) - 1.0;
  return s;
}

Trace load_trace(const std::string& path, const std::string& format, std::uint64_t block_size,
                 bool expand_multiblock) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace file: " + path);
  if (format == "msr") return parse_msr_csv(in, block_size, expand_multiblock);
  if (format == "plain") {
    Trace t = parse_plain(in).trace;
    return Trace(std::vector<BlockId>(t.blocks()), block_size);
  }
  throw Error("unknown trace format: " + format);
}

}  // namespace fwdrd
