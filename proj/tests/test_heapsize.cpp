#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "gcdistill/heapsize.hpp"

using namespace gcd;

namespace {

int calls = 0;

HeapRunner threshold_runner(std::int64_t threshold) {
  calls = 0;
  return [threshold](std::int64_t mb) {
    ++calls;
    return mb >= threshold;
  };
}

}  // namespace

TEST(MinHeap, FindsH2Threshold) {
  auto r = find_min_heap(threshold_runner(773), 1, 4096);
  EXPECT_EQ(r.min_mb, 773);
  EXPECT_LE(calls, min_heap_budget(1, 4096, 1, 1));
  EXPECT_EQ(r.probe_collector, "g1");
  EXPECT_EQ(static_cast<int>(r.trials.size()), calls);
}

TEST(MinHeap, RandomThresholdsWithinBudget) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 100; ++k) {
    std::int64_t lo = std::uniform_int_distribution<std::int64_t>(1, 64)(rng);
    std::int64_t hi = lo + std::uniform_int_distribution<std::int64_t>(1, 20000)(rng);
    std::int64_t th = std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    auto r = find_min_heap(threshold_runner(th), lo, hi);
    ASSERT_EQ(r.min_mb, th);
    std::int64_t log = static_cast<std::int64_t>(std::ceil(std::log2(static_cast<double>(hi - lo))));
    ASSERT_LE(calls, log + 2) << lo << " " << hi << " " << th;
  }
}

TEST(MinHeap, Boundaries) {
  EXPECT_EQ(find_min_heap(threshold_runner(10), 10, 20).min_mb, 10);
  EXPECT_EQ(find_min_heap(threshold_runner(20), 10, 20).min_mb, 20);
  EXPECT_THROW(find_min_heap(threshold_runner(21), 10, 20), ConfigError);
  EXPECT_THROW(find_min_heap(threshold_runner(5), 20, 10), ConfigError);
}

TEST(MinHeap, GranularityAndRepeats) {
  auto r = find_min_heap(threshold_runner(773), 1, 4096, 8, 1);
  EXPECT_EQ(r.min_mb, 777);  // first grid point 1 + 8j at or above 773
  int flips = 0;
  auto flaky = [&](std::int64_t mb) { return mb >= 500 || (mb >= 400 && (flips++ % 2 == 0)); };
  auto strict = find_min_heap(flaky, 1, 1024, 1, 3);
  EXPECT_EQ(strict.min_mb, 500);
}

TEST(HeapLadder, CeilingOfFactorTimesMin) {
  auto ladder = heap_ladder(773, default_heap_factors());
  ASSERT_EQ(ladder.size(), 8u);
  const std::int64_t expect[] = {1083, 1469, 1856, 2319, 2861, 3402, 4020, 4638};
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(ladder[i].second, expect[i]) << ladder[i].first.to_string();
  EXPECT_EQ(heap_ladder(8, {HeapFactor(7, 5)})[0].second, 12);
  EXPECT_THROW(heap_ladder(8, {HeapFactor(1, 2)}), ConfigError);
}

TEST(MinHeapCsv, RoundTrip) {
  auto dir = std::filesystem::temp_directory_path() / "gcd_heap_test";
  std::filesystem::create_directories(dir);
  std::vector<MinHeapResult> rows{{"h2", "g1", 773, 1, {}}, {"xalan", "g1", 8, 1, {}}, {"lusearch", "g1", 21, 1, {}}};
  write_min_heap_csv(dir / "mh.csv", rows);
  auto table = read_min_heap_table(dir / "mh.csv");
  EXPECT_EQ(table.at("h2"), 773);
  EXPECT_EQ(table.at("xalan"), 8);
  EXPECT_EQ(table.at("lusearch"), 21);
  std::istringstream bad("nope\n");
  EXPECT_THROW(read_min_heap_csv(bad), ParseError);
  std::filesystem::remove_all(dir);
}
