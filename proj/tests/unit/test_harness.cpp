#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "mhb/harness.hpp"
#include "oracle.hpp"

using namespace mhb;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mhb_harness_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<double> one_to_hundred_plus_outlier() {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  v.push_back(10000.0);
  return v;
}

}  // namespace

TEST(Trials, DiscardsWarmupAndCountsInvocations) {
  int calls = 0;
  const auto samples = run_trials([&] { ++calls; }, TrialOptions{3, 1, 1.5});
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(samples.size(), 3u);
}

TEST(Trials, ZeroWarmupKeepsEverySample) {
  std::int64_t now = 0;
  int calls = 0;
  // Each invocation advances the fake clock by its own index.
  const auto samples = run_trials([&] { now += ++calls; }, TrialOptions{4, 0, 1.5}, [&] { return now; });
  EXPECT_EQ(samples, (std::vector<double>{1, 2, 3, 4}));
}

TEST(Trials, ConstantClockGivesEqualSamples) {
  std::int64_t now = 0;
  const auto samples = run_trials([&] { now += 250; }, TrialOptions{5, 2, 1.5}, [&] { return now; });
  EXPECT_EQ(samples, std::vector<double>(5, 250.0));
}

TEST(Trials, WarmupSamplesAreTheFirstOnes) {
  int index = 0;
  const auto samples = run_measured_trials([&] { return static_cast<double>(index++); }, TrialOptions{3, 2, 1.5});
  EXPECT_EQ(samples, (std::vector<double>{2, 3, 4}));
}

TEST(Trials, FailureCarriesPartialSamples) {
  int index = 0;
  try {
    run_measured_trials(
        [&] {
          if (index == 4) throw std::runtime_error("sensor unplugged");
          return static_cast<double>(index++);
        },
        TrialOptions{10, 2, 1.5});
    FAIL() << "expected TrialError";
  } catch (const TrialError& e) {
    EXPECT_EQ(e.partial(), (std::vector<double>{2, 3}));
    EXPECT_NE(std::string(e.what()).find("sensor unplugged"), std::string::npos);
  }
}

TEST(Trials, RejectsBadCounts) {
  EXPECT_THROW(run_trials([] {}, TrialOptions{0, 1, 1.5}), std::invalid_argument);
  EXPECT_THROW(run_trials([] {}, TrialOptions{1, -1, 1.5}), std::invalid_argument);
}

TEST(Stats, QuartilesOfFourValues) {
  const RunStats s = summarize(std::vector<double>{4, 1, 3, 2});
  EXPECT_EQ(s.median, 2.5);
  EXPECT_EQ(s.q1, 1.75);
  EXPECT_EQ(s.q3, 3.25);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.max, 4.0);
}

TEST(Stats, QuantilesAgreeWithIndependentRule) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(0.0, 1000.0);
  for (int n : {1, 2, 3, 7, 50, 101}) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = dist(rng);
    const RunStats s = summarize(v);
    EXPECT_DOUBLE_EQ(s.q1, oracle::quantile(v, 0.25));
    EXPECT_DOUBLE_EQ(s.median, oracle::quantile(v, 0.5));
    EXPECT_DOUBLE_EQ(s.q3, oracle::quantile(v, 0.75));
    EXPECT_LE(s.q1, s.median);
    EXPECT_LE(s.median, s.q3);
  }
}

TEST(Stats, TukeyRemovesOnlyThePlantedOutlier) {
  const auto v = one_to_hundred_plus_outlier();
  // 101 points: q1 = x[25] = 26, q3 = x[75] = 76, fences [-49, 151].
  const Fences f = tukey_fences(v);
  EXPECT_EQ(f.low, -49.0);
  EXPECT_EQ(f.high, 151.0);
  const auto kept = tukey_filter(v);
  ASSERT_EQ(kept.size(), 100u);
  EXPECT_EQ(kept.back(), 100.0);
}

TEST(Stats, TukeyKeepsValuesOnTheFence) {
  EXPECT_EQ(tukey_filter(std::vector<double>{5, 5, 5, 5}).size(), 4u);
  // q1 = 1.75, q3 = 3.25, IQR 1.5: upper fence 5.5 exactly.
  EXPECT_EQ(tukey_filter(std::vector<double>{1, 2, 3, 4, 5.5}, 1.5).size(), 5u);
}

TEST(Stats, HugeKKeepsEverything) {
  const auto v = one_to_hundred_plus_outlier();
  EXPECT_EQ(tukey_filter(v, 1e9), v);
}

TEST(Stats, TukeyIsSinglePass) {
  // A second pass with the same fences changes nothing, even though a
  // fresh pass on the kept set would fence tighter.
  std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 20, 40};
  const Fences f = tukey_fences(v);
  const auto once = apply_fences(v, f);
  EXPECT_EQ(apply_fences(once, f), once);
  EXPECT_EQ(tukey_filter(v), once);
}

TEST(Stats, TukeyPreservesOrder) {
  const std::vector<double> v{9, 1, 8, 2, 1000, 7};
  EXPECT_EQ(tukey_filter(v), (std::vector<double>{9, 1, 8, 2, 7}));
}

TEST(Stats, HarmonicMean) {
  EXPECT_EQ(harmonic_mean(std::vector<double>{1, 3}), 1.5);
  EXPECT_EQ(harmonic_mean(std::vector<double>{4}), 4.0);
  EXPECT_THROW(harmonic_mean(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(harmonic_mean(std::vector<double>{1, 0}), std::domain_error);
}

TEST(Stats, SummarizeConstantSeries) {
  const RunStats s = summarize(std::vector<double>{2, 2, 2});
  EXPECT_EQ(s.mean, 2.0);
  EXPECT_EQ(s.std, 0.0);
  EXPECT_EQ(summarize(std::vector<double>(7, 0.1)).mean, 0.1);
}

TEST(Stats, PopulationStandardDeviation) {
  EXPECT_EQ(summarize(std::vector<double>{1, 3}).std, 1.0);
}

TEST(Stats, ThroughputHarmonicMean) {
  // 10 bytes in 10 ns and in 10/3 ns: 1e9 and 3e9 B/s.
  const RunStats s = summarize(std::vector<double>{10.0, 10.0 / 3.0}, 10.0);
  ASSERT_TRUE(s.hmean_Bps);
  EXPECT_DOUBLE_EQ(*s.hmean_Bps, 1.5e9);
  EXPECT_FALSE(summarize(std::vector<double>{1.0}).hmean_Bps);
  EXPECT_THROW(summarize(std::vector<double>{1.0, 0.0}, 8.0), std::domain_error);
  EXPECT_THROW(summarize(std::vector<double>{}), std::invalid_argument);
}

TEST(Stats, AnalyzeCountsRawAndKept) {
  const RunStats s = analyze(one_to_hundred_plus_outlier(), 1.5);
  EXPECT_EQ(s.n_raw, 101u);
  EXPECT_EQ(s.n_kept, 100u);
  EXPECT_EQ(s.mean, 50.5);
}

TEST(Params, FormatAndParse) {
  const Params p{{"np", "4"}, {"backend", "tcp"}};
  EXPECT_EQ(format_params(p), "np=4;backend=tcp");
  EXPECT_EQ(parse_params("np=4;backend=tcp"), p);
  EXPECT_TRUE(parse_params("").empty());
  EXPECT_THROW(format_params({{"a;b", "1"}}), std::invalid_argument);
  EXPECT_THROW(parse_params("novalue"), std::invalid_argument);
}

TEST(Csv, EmptyRecordListWritesHeadersOnly) {
  const auto dir = scratch_dir("empty");
  const CsvFiles f = write_csv(dir.string(), "none", {});
  EXPECT_EQ(slurp(f.raw), std::string(kRawHeader) + "\n");
  EXPECT_EQ(slurp(f.summary), std::string(kSummaryHeader) + "\n");
  EXPECT_FALSE(f.breakdown);
}

TEST(Csv, HundredSamplesGiveHundredRawRows) {
  TrialSeries s;
  s.label = "bench";
  s.params = {{"n", "1"}};
  for (int i = 0; i < 100; ++i) s.samples.push_back(1000.0 + i);
  const std::vector<SeriesRecord> records{make_record(s, 1.5)};
  const auto dir = scratch_dir("hundred");
  const CsvFiles f = write_csv(dir.string(), "b", records);
  const auto raw = read_raw_csv(f.raw);
  ASSERT_EQ(raw.size(), 100u);
  EXPECT_EQ(raw[99].trial_index, 99u);
  EXPECT_EQ(raw[0].params, "n=1;tukey_k=1.5");
  EXPECT_EQ(read_summary_csv(f.summary).size(), 1u);
  EXPECT_EQ(slurp(f.raw).find('\r'), std::string::npos);
}

TEST(Csv, SummaryRoundTripsExactly) {
  TrialSeries s;
  s.label = "pingpong";
  s.params = {{"bytes", "64"}};
  s.samples = {1234.5, 1.0 / 3.0 * 1e4, 999.25, 1e6};
  s.bytes_per_sample = 128.0;
  s.breakdown = {{"comm", 12.5}, {"flop", 0.1}};
  const SeriesRecord rec = make_record(s, 1.5);
  const auto dir = scratch_dir("roundtrip");
  const CsvFiles f = write_csv(dir.string(), "rt", std::vector<SeriesRecord>{rec});
  const auto rows = read_summary_csv(f.summary);
  ASSERT_EQ(rows.size(), 1u);
  const RunStats& got = rows[0].stats;
  EXPECT_EQ(got.n_raw, rec.stats.n_raw);
  EXPECT_EQ(got.n_kept, rec.stats.n_kept);
  EXPECT_EQ(got.mean, rec.stats.mean);
  EXPECT_EQ(got.std, rec.stats.std);
  EXPECT_EQ(got.q1, rec.stats.q1);
  EXPECT_EQ(got.q3, rec.stats.q3);
  EXPECT_EQ(got.hmean_Bps, rec.stats.hmean_Bps);
  ASSERT_TRUE(f.breakdown);
  const auto bd = read_breakdown_csv(*f.breakdown);
  ASSERT_EQ(bd.size(), 2u);
  EXPECT_EQ(bd[1].op, "flop");
  EXPECT_EQ(bd[1].total_ns, 0.1);
}

// Every summary field can be recomputed from the raw rows alone.
TEST(Csv, SummaryIsDerivableFromRawRows) {
  std::mt19937 rng(11);
  std::lognormal_distribution<double> dist(8.0, 0.5);
  std::vector<SeriesRecord> records;
  for (int bytes : {8, 4096}) {
    TrialSeries s;
    s.label = "pingpong";
    s.params = {{"bytes", std::to_string(bytes)}};
    for (int i = 0; i < 60; ++i) s.samples.push_back(dist(rng));
    s.samples.push_back(1e7);
    s.bytes_per_sample = 2.0 * bytes;
    records.push_back(make_record(s, 1.5));
  }
  const auto dir = scratch_dir("derive");
  const CsvFiles f = write_csv(dir.string(), "d", records);
  const auto raw = read_raw_csv(f.raw);
  for (const auto& row : read_summary_csv(f.summary)) {
    std::vector<double> samples;
    for (const auto& r : raw)
      if (r.benchmark == row.benchmark && r.params == row.params) samples.push_back(r.value_ns);
    double bytes = 0.0;
    for (const auto& [k, v] : parse_params(row.params))
      if (k == "bytes") bytes = 2.0 * std::stod(v);
    const RunStats again = analyze(samples, 1.5, bytes);
    EXPECT_EQ(again.n_raw, row.stats.n_raw);
    EXPECT_EQ(again.n_kept, row.stats.n_kept);
    EXPECT_EQ(again.mean, row.stats.mean);
    EXPECT_EQ(again.median, row.stats.median);
    EXPECT_EQ(again.std, row.stats.std);
    EXPECT_EQ(again.max, row.stats.max);
    EXPECT_EQ(again.hmean_Bps, row.stats.hmean_Bps);
    EXPECT_LT(row.stats.max, 1e7);
  }
}

TEST(Csv, UnwritableDirectoryNamesThePath) {
  try {
    write_csv("/proc/mhb_no_such_dir", "x", {});
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/proc/mhb_no_such_dir"), std::string::npos);
  }
}

TEST(Csv, ReaderRejectsWrongHeader) {
  const auto dir = scratch_dir("header");
  std::filesystem::create_directories(dir);
  const auto path = (dir / "bad.csv").string();
  std::ofstream(path) << "a,b\n";
  EXPECT_THROW(read_raw_csv(path), std::runtime_error);
}
