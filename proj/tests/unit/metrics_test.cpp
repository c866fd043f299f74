#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>

#include "ippo/metrics/curves.hpp"
#include "ippo/util/random.hpp"

namespace ippo::metrics {
namespace {

namespace fs = std::filesystem;

// 0.2 + 0.5 * (0.4 - 0.2) rounds to 0.30000000000000004 in binary.
constexpr double kQuantileTol = 1e-12;

double weighted_order_statistic(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = static_cast<double>(v.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(h);
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double w = h - static_cast<double>(lo);
  return (1.0 - w) * v[lo] + w * v[hi];
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ippo_metrics_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Quantiles, ThreeSeedExample) {
  const auto b = quantile_band(std::vector<double>{0.6, 0.2, 0.4});
  EXPECT_NEAR(b.median, 0.4, kQuantileTol);
  EXPECT_NEAR(b.q25, 0.3, kQuantileTol);
  EXPECT_NEAR(b.q75, 0.5, kQuantileTol);
}

TEST(Quantiles, DegenerateInputs) {
  const auto one = quantile_band(std::vector<double>{0.7});
  EXPECT_EQ(one.median, 0.7);
  EXPECT_EQ(one.q25, 0.7);
  EXPECT_EQ(one.q75, 0.7);
  const auto flat = quantile_band(std::vector<double>{2.5, 2.5, 2.5, 2.5});
  EXPECT_EQ(flat.q25, 2.5);
  EXPECT_EQ(flat.q75, 2.5);
  EXPECT_THROW(quantile_band(std::vector<double>{}), std::invalid_argument);
}

TEST(Quantiles, MatchOracleAndStayOrderedUnderPermutation) {
  Rng rng(9);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(1 + trial % 11));
    for (auto& x : v) x = u(rng);
    const auto b = quantile_band(v);
    EXPECT_NEAR(b.q25, weighted_order_statistic(v, 0.25), kQuantileTol);
    EXPECT_NEAR(b.median, weighted_order_statistic(v, 0.5), kQuantileTol);
    EXPECT_NEAR(b.q75, weighted_order_statistic(v, 0.75), kQuantileTol);
    EXPECT_LE(b.q25, b.median);
    EXPECT_LE(b.median, b.q75);
    std::shuffle(v.begin(), v.end(), rng);
    const auto p = quantile_band(v);
    EXPECT_EQ(p.median, b.median);
    EXPECT_EQ(p.q25, b.q25);
    EXPECT_EQ(p.q75, b.q75);
  }
}

CurveSet curves(const std::string& label, int n_seeds, Rng& rng) {
  CurveSet c;
  c.label = label;
  c.x = {1024, 2048, 3072, 4096};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < n_seeds; ++s) {
    c.seed_names.push_back("seed_" + std::to_string(s));
    std::vector<double> y(c.x.size());
    for (auto& v : y) v = u(rng);
    c.seeds.push_back(y);
  }
  return c;
}

TEST(Emit, TwoVariantsThreeSeedsGiveTwoCsvsAndOnePlot) {
  Rng rng(10);
  const auto dir = fresh_dir("emit");
  Figure f{"ablation", "skirmish", "win_rate", true, {curves("ippo", 3, rng), curves("iac", 3, rng)}};
  const auto files = emit(f, dir);
  ASSERT_EQ(files.size(), 3u);
  int csv = 0, svg = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    csv += e.path().extension() == ".csv";
    svg += e.path().extension() == ".svg";
  }
  EXPECT_EQ(csv, 2);
  EXPECT_EQ(svg, 1);
  EXPECT_TRUE(fs::exists(dir / "ablation" / "skirmish" / "win_rate.svg"));
  std::ifstream svg_in(dir / "ablation" / "skirmish" / "win_rate.svg");
  const std::string text((std::istreambuf_iterator<char>(svg_in)), {});
  EXPECT_NE(text.find("<svg"), std::string::npos);
  EXPECT_NE(text.find("iac"), std::string::npos);

  const auto loaded = load_figures(dir);
  ASSERT_EQ(loaded.size(), 1u);
  EXPECT_EQ(loaded[0].curves.size(), 2u);
  fs::remove_all(dir);
}

TEST(Emit, CsvRoundTripIsExact) {
  const auto dir = fresh_dir("roundtrip");
  fs::create_directories(dir);
  CurveSet c;
  c.label = "ippo";
  c.x = {128, 256, 384};
  c.seed_names = {"seed_0", "seed_1"};
  c.seeds = {{0.1, 1.0 / 3.0, std::numeric_limits<double>::denorm_min()}, {-2.5e-300, 0.30000000000000004, 1e17}};
  write_csv(c, dir / "ippo.mean_return.csv");
  const auto back = read_csv(dir / "ippo.mean_return.csv");
  EXPECT_EQ(back.label, "ippo");
  EXPECT_EQ(back.x, c.x);
  EXPECT_EQ(back.seed_names, c.seed_names);
  EXPECT_EQ(back.seeds, c.seeds);

  std::ifstream in(dir / "ippo.mean_return.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "env_steps,median,q25,q75,seed_0,seed_1");
  fs::remove_all(dir);
}

TEST(Emit, InvalidCurvesWriteNothing) {
  Rng rng(11);
  const auto dir = fresh_dir("invalid");
  auto empty = curves("ippo", 3, rng);
  empty.x.clear();
  for (auto& s : empty.seeds) s.clear();
  Figure f{"main", "matrix", "mean_return", false, {curves("iac", 2, rng), empty}};
  EXPECT_THROW(emit(f, dir), std::invalid_argument);
  EXPECT_FALSE(fs::exists(dir));

  auto out_of_range = curves("ippo", 2, rng);
  out_of_range.seeds[1][2] = 1.5;
  Figure g{"main", "matrix", "win_rate", true, {out_of_range}};
  EXPECT_THROW(emit(g, dir), std::invalid_argument);
  EXPECT_FALSE(fs::exists(dir));

  auto ragged = curves("ippo", 2, rng);
  ragged.seeds[0].pop_back();
  EXPECT_THROW(ragged.validate(false), std::invalid_argument);
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(40.0), "40");
  EXPECT_TRUE(is_unit_interval_metric("win_rate"));
  EXPECT_FALSE(is_unit_interval_metric("mean_return"));
}

}  // namespace
}  // namespace ippo::metrics
