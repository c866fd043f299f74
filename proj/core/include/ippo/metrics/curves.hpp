#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ippo::metrics {

struct Band {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Type-7 quantile: linear interpolation between order statistics at (n - 1) q.
double quantile(std::span<const double> values, double q);

/// Median and [0.25, 0.75] quantiles across seeds. Throws on empty input.
Band quantile_band(std::span<const double> values);

/// One learning curve family: a shared x grid and one y series per seed.
struct CurveSet {
  std::string label;
  std::vector<double> x;
  std::vector<std::string> seed_names;
  std::vector<std::vector<double>> seeds;  // seeds[s][i] is the value at x[i]

  /// Checks grid alignment and, when `unit_interval`, that every value lies in [0, 1].
  void validate(bool unit_interval) const;
  std::vector<Band> bands() const;
};

/// Curves that share one plot: <experiment>/<env>/<metric>.svg.
struct Figure {
  std::string experiment;
  std::string env;
  std::string metric;
  bool unit_interval = false;
  std::vector<CurveSet> curves;
};

/// Writes <out>/<experiment>/<env>/<label>.<metric>.csv for every curve and
/// <out>/<experiment>/<env>/<metric>.svg. Everything is validated before the
/// first file is created. Returns the written paths.
std::vector<std::filesystem::path> emit(const Figure& figure, const std::filesystem::path& out_dir);

void write_csv(const CurveSet& curves, const std::filesystem::path& path);
/// Inverse of write_csv; the label is taken from the file name up to the first '.'.
CurveSet read_csv(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

std::string render_svg(const Figure& figure);

/// Regroups every <experiment>/<env>/<label>.<metric>.csv below `root` into figures.
std::vector<Figure> load_figures(const std::filesystem::path& root);

bool is_unit_interval_metric(const std::string& metric);

}  // namespace ippo::metrics
