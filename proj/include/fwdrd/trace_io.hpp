#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fwdrd/common.hpp"

namespace fwdrd {

struct Access {
  std::size_t time = 0;
  BlockId block = 0;
  bool operator==(const Access&) const = default;
};

/// An ordered block-access sequence. Access times are always 0..n-1.
class Trace {
 public:
  Trace() = default;
  explicit Trace(std::vector<BlockId> blocks, std::uint64_t block_size = 4096);

  void push_back(BlockId block) { blocks_.push_back(block); }

  std::size_t size() const noexcept { return blocks_.size(); }
  bool empty() const noexcept { return blocks_.empty(); }
  BlockId operator[](std::size_t t) const noexcept { return blocks_[t]; }
  Access at(std::size_t t) const { return {t, blocks_.at(t)}; }

  const std::vector<BlockId>& blocks() const noexcept { return blocks_; }
  std::uint64_t block_size() const noexcept { return block_size_; }

  Trace reversed() const;

 private:
  std::vector<BlockId> blocks_;
  std::uint64_t block_size_ = 4096;
};

inline constexpr std::uint64_t kDefaultBlockSize = 4096;
inline constexpr int kDiskBits = 16;
inline constexpr int kBlockIndexBits = 48;

/// Packs (disk, block index) into one identifier: disk in the high 16 bits.
BlockId pack_block_key(std::uint64_t disk, std::uint64_t block_index);
std::uint64_t key_disk(BlockId key) noexcept;
std::uint64_t key_block_index(BlockId key) noexcept;

/// Parses an MSR Cambridge style CSV
/// (Timestamp,Hostname,DiskNumber,Type,Offset,Size,ResponseTime).
/// Only DiskNumber, Offset and Size are used.
Trace parse_msr_csv(std::istream& in, std::uint64_t block_size = kDefaultBlockSize,
                    bool expand_multiblock = false);

struct PlainTrace {
  Trace trace;
  /// symbols[id] is the token that was assigned block id `id`.
  std::vector<std::string> symbols;
};

/// One token per line; '#' lines and blank lines are skipped. Tokens are
/// interned in first-seen order, so block ids are dense.
PlainTrace parse_plain(std::istream& in);

/// Writes `trace` back in the plain format using the symbol table.
void write_plain(std::ostream& out, const PlainTrace& plain);

struct TraceStats {
  std::size_t length = 0;
  std::size_t unique_blocks = 0;
  double mean_accesses_per_block = 0.0;
  std::size_t unique_deltas = 0;
  double delta_compression_ratio = 0.0;
  bool operator==(const TraceStats&) const = default;
};

TraceStats trace_stats(const Trace& trace);

/// Loads a trace by format name ("msr" or "plain").
Trace load_trace(const std::string& path, const std::string& format,
                 std::uint64_t block_size = kDefaultBlockSize, bool expand_multiblock = false);

}  // namespace fwdrd
