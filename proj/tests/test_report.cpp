#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "gcdistill/report.hpp"
#include "support.hpp"

using namespace gcd;
namespace fs = std::filesystem;

namespace {

std::vector<InvocationRecord> h2_table_records(int invocations = 1) {
  struct Row {
    const char* c;
    std::uint64_t total, stw;
  };
  const Row rows[] = {{"parallel", 108'330'000'000, 4'460'000'000},
                      {"serial", 108'120'000'000, 2'750'000'000},
                      {"shenandoah", 218'720'000'000, 30'000'000}};
  std::vector<InvocationRecord> out;
  for (int i = 0; i < invocations; ++i)
    for (const auto& r : rows)
      out.push_back(fixture::single_pause_record(fixture::key("h2", r.c, 2319, HeapFactor(3)), metrics::cycles, r.total, r.stw, i));
  return out;
}

AnalysisResult analyze_cycles(const std::vector<InvocationRecord>& recs) {
  AnalysisOptions opt;
  opt.metrics = {metrics::cycles};
  return analyze(recs, opt);
}

SummaryRow row(const std::string& c, HeapFactor f, std::optional<double> g) {
  SummaryRow r;
  r.collector = c;
  r.heap_factor = f;
  r.metric = metrics::cycles;
  r.geomean = g;
  r.included_benchmarks = {"h2"};
  if (!g) r.blank = {BlankReason::oom};
  return r;
}

}  // namespace

TEST(WorkedExample, ReproducesBreakdownTable) {
  auto res = analyze_cycles(h2_table_records());
  ASSERT_EQ(res.cells.size(), 3u);
  auto w = render_worked_example(res.cells);
  ASSERT_EQ(w.table.rows.size(), 3u);
  EXPECT_EQ(w.table.rows[0], (std::vector<std::string>{"parallel", "108.33", "4.46", "103.87", "4.46", "1.043"}));
  EXPECT_EQ(w.table.rows[1], (std::vector<std::string>{"serial", "108.12", "2.75", "105.37", "4.25", "1.041"}));
  EXPECT_EQ(w.table.rows[2], (std::vector<std::string>{"shenandoah", "218.72", "0.03", "218.69", "114.85", "2.106"}));
  EXPECT_EQ(w.table.header[1], "Total (×10⁹ cycles)");
  EXPECT_TRUE(w.table.flagged[0][3]);   // minimum distilled: parallel
  EXPECT_TRUE(w.table.flagged[1][4]);   // minimum LBO: serial
  EXPECT_FALSE(w.table.flagged[0][4]);
  auto md = w.table.to_markdown();
  EXPECT_NE(md.find("**103.87**"), std::string::npos);
  EXPECT_NE(md.find("**4.25**"), std::string::npos);
  ASSERT_EQ(res.pools.size(), 1u);
  EXPECT_EQ(res.pools[0].mdc->argmin.collector, "parallel");
}

TEST(WorkedExample, BlankCellsStayEmpty) {
  auto recs = h2_table_records();
  recs[2].outcome = Outcome::oom;
  auto res = analyze_cycles(recs);
  auto w = render_worked_example(res.cells);
  EXPECT_EQ(w.table.rows[2], (std::vector<std::string>{"shenandoah", "", "", "", "", ""}));
  EXPECT_NE(w.csv.find(",oom\n"), std::string::npos);
  EXPECT_EQ(w.table.rows[0][5], "1.043");
}

TEST(WorkedExample, MeansAndIntervalsOverInvocations) {
  auto res = analyze_cycles(h2_table_records(20));
  for (const auto& c : res.cells) {
    EXPECT_EQ(c.n(), 20u);
    ASSERT_TRUE(c.total.ci_half_width);
    EXPECT_EQ(*c.total.ci_half_width, 0.0);
  }
}

TEST(Summary, TableFourColumnValues) {
  auto t = render_summary({row("parallel", HeapFactor(12, 5), 1.07), row("shenandoah", HeapFactor(12, 5), 1.64)});
  EXPECT_EQ(t.table.header, (std::vector<std::string>{"GC", "2.4×"}));
  EXPECT_EQ(t.table.rows[0], (std::vector<std::string>{"parallel", "1.07"}));
  EXPECT_EQ(t.table.rows[1], (std::vector<std::string>{"shenandoah", "1.64"}));
  EXPECT_TRUE(t.table.flagged[0][1]);
  EXPECT_FALSE(t.table.flagged[1][1]);
}

TEST(Summary, TiesAndBlanks) {
  auto t = render_summary({row("serial", HeapFactor(3), 1.05), row("parallel", HeapFactor(3), 1.05),
                           row("zgc", HeapFactor(3), std::nullopt), row("zgc", HeapFactor(6), 1.2)});
  EXPECT_TRUE(t.table.flagged[0][1]);
  EXPECT_TRUE(t.table.flagged[1][1]);
  EXPECT_EQ(t.table.rows[2][1], "");
  EXPECT_EQ(t.table.rows[0][2], "");
  EXPECT_NE(t.csv.find("zgc,3,cycles,,oom,h2\n"), std::string::npos);
}

TEST(Summary, GeomeanAcrossBenchmarksWithExclusions) {
  auto recs = h2_table_records();
  for (auto r : h2_table_records()) {
    r.config.benchmark = "xalan";
    recs.push_back(r);
  }
  auto res = analyze_cycles(recs);
  auto rows = summary_rows(res, metrics::cycles, {"xalan"}, Quantity::nlbo_reported);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].included_benchmarks, std::vector<std::string>{"h2"});
  EXPECT_NEAR(*rows[0].geomean, 108.33 / 103.87, 1e-9);
  auto stw = summary_rows(res, metrics::cycles, {}, Quantity::stw_fraction);
  EXPECT_NEAR(*stw[0].geomean, 4.46 / 108.33, 1e-9);
}

TEST(Report, WritesFilesAndCurves) {
  auto dir = fs::temp_directory_path() / "gcd_report_test";
  fs::remove_all(dir);
  auto recs = h2_table_records();
  auto& it = recs[0].iterations[0];
  it.requests = std::vector<RequestRecord>{{0, it.start_ns, it.start_ns + 5, it.start_ns + 50}};
  auto res = analyze_cycles(recs);
  auto curves = latency_curves(recs);
  auto files = write_report(res, curves, dir);
  for (const auto& f : files) EXPECT_TRUE(fs::exists(f)) << f;
  EXPECT_TRUE(fs::exists(dir / "report" / "cycles" / "worked_example.md"));
  EXPECT_TRUE(fs::exists(dir / "report" / "summary_cycles.csv"));
  EXPECT_TRUE(fs::exists(dir / "report" / "curves" / "h2_pause.csv"));
  std::ifstream in(dir / "report" / "curves" / "h2_metered.csv");
  auto back = read_curves_csv(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].label, "parallel@3.0x");
  EXPECT_EQ(back[0].points.back().value_ns, 50);
  fs::remove_all(dir);
}

TEST(Pipeline, FactorlessConfigJoinsEveryPool) {
  auto recs = h2_table_records();
  auto eps = fixture::single_pause_record(fixture::key("h2", "epsilon", 100000), metrics::cycles, 100'000'000'000, 0);
  recs.push_back(eps);
  auto r6 = h2_table_records()[0];
  r6.config.heap_mb = 4638;
  r6.config.heap_factor = HeapFactor(6);
  recs.push_back(r6);
  auto res = analyze_cycles(recs);
  ASSERT_EQ(res.pools.size(), 2u);
  for (const auto& p : res.pools) {
    EXPECT_EQ(p.mdc->argmin.collector, "epsilon");
    EXPECT_EQ(p.mdc->mdc, 1e11);
  }
  AnalysisOptions global;
  global.metrics = {metrics::cycles};
  global.pool = PoolPolicy::global;
  EXPECT_EQ(analyze(recs, global).pools.size(), 1u);
}
