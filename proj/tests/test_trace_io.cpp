#include <doctest.h>

#include <sstream>

#include "fwdrd/trace_io.hpp"
#include "oracles.hpp"

using namespace fwdrd;

TEST_CASE("msr row maps offset to a packed block key") {
  std::istringstream in("128166372003061629,hm,0,Read,8192,4096,1331\n");
  const Trace t = parse_msr_csv(in, 4096, false);
  REQUIRE(t.size() == 1);
  CHECK(t[0] == pack_block_key(0, 2));
  CHECK(key_disk(t[0]) == 0);
  CHECK(key_block_index(t[0]) == 2);
  CHECK(t.at(0).time == 0);
}

TEST_CASE("msr multi-block request expands when asked") {
  std::istringstream a("1,hm,0,Write,0,8192,10\n");
  const Trace expanded = parse_msr_csv(a, 4096, true);
  REQUIRE(expanded.size() == 2);
  CHECK(expanded[0] == pack_block_key(0, 0));
  CHECK(expanded[1] == pack_block_key(0, 1));

  std::istringstream b("1,hm,0,Write,0,8192,10\n");
  CHECK(parse_msr_csv(b, 4096, false).size() == 1);

  std::istringstream c("1,hm,0,Write,0,4097,10\n");
  CHECK(parse_msr_csv(c, 4096, true).size() == 2);
}

TEST_CASE("msr ten rows keep file order and match a line-by-line reference") {
  Rng rng(7);
  std::ostringstream file;
  std::vector<BlockId> expected;
  for (int i = 0; i < 10; ++i) {
    const std::uint64_t disk = rng.next() % 4, offset = (rng.next() % 100000) * 512;
    file << 1000 + i << ",src1," << disk << ",Read," << offset << ",512,77\r\n";
    expected.push_back((disk << 48) | (offset / 4096));
  }
  std::istringstream in(file.str());
  const Trace t = parse_msr_csv(in);
  REQUIRE(t.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(t.at(i).time == i);
    CHECK(t[i] == expected[i]);
  }
}

TEST_CASE("msr errors") {
  std::istringstream bad("1,hm,0,Read,8192,4096,1\n2,hm,zero,Read,0,1,1\n");
  try {
    parse_msr_csv(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream short_row("1,hm,0,Read\n");
  CHECK_THROWS_AS(parse_msr_csv(short_row), ParseError);
  std::istringstream ok("1,hm,0,Read,0,1,1\n");
  CHECK_THROWS_AS(parse_msr_csv(ok, 0), Error);
  std::istringstream overflow("1,hm,70000,Read,0,1,1\n");
  CHECK_THROWS_AS(parse_msr_csv(overflow), ParseError);
  CHECK_THROWS(pack_block_key(0, std::uint64_t{1} << 48));
}

TEST_CASE("plain format interns symbols in first-seen order") {
  std::istringstream in("# fig trace\na\na\na\nb\na\nb\na\nb\nc\na\n");
  const PlainTrace p = parse_plain(in);
  CHECK(p.trace.size() == 10);
  CHECK(p.symbols == std::vector<std::string>{"a", "b", "c"});
  CHECK(p.trace.blocks() == oracle::worked_trace().blocks());

  std::istringstream nums("5\n5\n7\n");
  const PlainTrace q = parse_plain(nums);
  CHECK(q.trace.size() == 3);
  CHECK(trace_stats(q.trace).unique_blocks == 2);

  std::istringstream empty("# nothing\n\n");
  CHECK_THROWS_AS(parse_plain(empty), ParseError);
}

TEST_CASE("plain round trip reproduces the token sequence") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::ostringstream src;
    const std::size_t n = 1 + rng.next() % 200;
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = rng.next() % 30;
      if (v % 3 == 0) src << "sym" << v << '\n';
      else src << v << '\n';
    }
    std::istringstream in(src.str());
    std::ostringstream back;
    write_plain(back, parse_plain(in));
    CHECK(back.str() == src.str());
  }
}

TEST_CASE("trace stats") {
  const TraceStats s = trace_stats(oracle::worked_trace());
  CHECK(s.length == 10);
  CHECK(s.unique_blocks == 3);
  CHECK(s.mean_accesses_per_block == doctest::Approx(10.0 / 3.0));

  const TraceStats r = trace_stats(Trace({0, 4, 8, 12}));
  CHECK(r.unique_blocks == 4);
  CHECK(r.unique_deltas == 2);
  CHECK(r.delta_compression_ratio == doctest::Approx(-0.5));

  CHECK_THROWS(trace_stats(Trace{}));
}

TEST_CASE("compression ratio sign follows unique delta count") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Trace t = oracle::random_trace(rng, 1 + rng.next() % 300, 1 + rng.next() % 50);
    const TraceStats s = trace_stats(t);
    CHECK((s.delta_compression_ratio < 0) == (s.unique_deltas < s.unique_blocks));
  }
}
