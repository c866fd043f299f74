#include "ippo/metrics/curves.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace ippo::metrics {

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double h = static_cast<double>(v.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Band quantile_band(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("quantile_band needs at least one seed");
  return {quantile(values, 0.5), quantile(values, 0.25), quantile(values, 0.75)};
}

void CurveSet::validate(bool unit_interval) const {
  if (x.empty()) throw std::invalid_argument("curve '" + label + "' has an empty x grid");
  if (seeds.empty()) throw std::invalid_argument("curve '" + label + "' has no seeds");
  if (!seed_names.empty() && seed_names.size() != seeds.size()) {
    throw std::invalid_argument("curve '" + label + "' has mismatched seed names");
  }
  for (const auto& s : seeds) {
    if (s.size() != x.size()) throw std::invalid_argument("curve '" + label + "' has seeds off the shared x grid");
    for (double y : s) {
      if (!std::isfinite(y)) throw std::invalid_argument("curve '" + label + "' has a non-finite value");
      if (unit_interval && (y < 0.0 || y > 1.0)) {
        throw std::invalid_argument("curve '" + label + "' has a rate outside [0, 1]");
      }
    }
  }
}

std::vector<Band> CurveSet::bands() const {
  std::vector<Band> out;
  std::vector<double> column(seeds.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t s = 0; s < seeds.size(); ++s) column[s] = seeds[s][i];
    out.push_back(quantile_band(column));
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

namespace {

double parse_double(const std::string& s, const std::filesystem::path& path) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error(path.string() + ": bad number '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string seed_name(const CurveSet& c, std::size_t s) {
  return c.seed_names.empty() ? "seed_" + std::to_string(s) : c.seed_names[s];
}

}  // namespace

void write_csv(const CurveSet& curves, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "env_steps,median,q25,q75";
  for (std::size_t s = 0; s < curves.seeds.size(); ++s) os << ',' << seed_name(curves, s);
  os << '\n';
  const auto bands = curves.bands();
  for (std::size_t i = 0; i < curves.x.size(); ++i) {
    os << format_double(curves.x[i]) << ',' << format_double(bands[i].median) << ',' << format_double(bands[i].q25)
       << ',' << format_double(bands[i].q75);
    for (const auto& s : curves.seeds) os << ',' << format_double(s[i]);
    os << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

CurveSet read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path.string() + ": empty file");
  const auto header = split(line);
  if (header.size() < 5 || header[0] != "env_steps" || header[1] != "median" || header[2] != "q25" ||
      header[3] != "q75") {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  CurveSet c;
  const auto name = path.filename().string();
  c.label = name.substr(0, name.find('.'));
  c.seed_names.assign(header.begin() + 4, header.end());
  c.seeds.resize(c.seed_names.size());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw std::runtime_error(path.string() + ": ragged row");
    c.x.push_back(parse_double(cells[0], path));
    for (std::size_t s = 0; s < c.seeds.size(); ++s) c.seeds[s].push_back(parse_double(cells[4 + s], path));
  }
  return c;
}

std::string render_svg(const Figure& figure) {
  constexpr double W = 640, H = 400, L = 64, R = 160, T = 36, B = 48;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

  double x0 = 0, x1 = 0, y0 = 0, y1 = 1;
  bool first = true;
  std::vector<std::vector<Band>> bands;
  for (const auto& c : figure.curves) {
    bands.push_back(c.bands());
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      const auto& b = bands.back()[i];
      if (first) {
        x0 = x1 = c.x[i];
        if (!figure.unit_interval) y0 = y1 = b.median;
        first = false;
      }
      x0 = std::min(x0, c.x[i]);
      x1 = std::max(x1, c.x[i]);
      y0 = std::min(y0, b.q25);
      y1 = std::max(y1, b.q75);
    }
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  auto num = [](double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << L << "\" y=\"22\" font-size=\"14\">" << figure.experiment << " / " << figure.env << " / "
      << figure.metric << "</text>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = y0 + (y1 - y0) * k / 4.0;
    const double xv = x0 + (x1 - x0) * k / 4.0;
    svg << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    svg << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << num(xv)
        << "</text>\n";
  }
  svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">env steps</text>\n";

  for (std::size_t c = 0; c < figure.curves.size(); ++c) {
    const auto& curve = figure.curves[c];
    const char* color = palette[c % std::size(palette)];
    svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < curve.x.size(); ++i) svg << px(curve.x[i]) << ',' << py(bands[c][i].q75) << ' ';
    for (std::size_t i = curve.x.size(); i-- > 0;) svg << px(curve.x[i]) << ',' << py(bands[c][i].q25) << ' ';
    svg << "\"/>\n";
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < curve.x.size(); ++i) svg << px(curve.x[i]) << ',' << py(bands[c][i].median) << ' ';
    svg << "\"/>\n";
    const double ly = T + 16.0 * static_cast<double>(c);
    svg << "<rect x=\"" << W - R + 12 << "\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\"" << color
        << "\"/>\n";
    svg << "<text x=\"" << W - R + 30 << "\" y=\"" << ly + 10 << "\">" << curve.label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::filesystem::path> emit(const Figure& figure, const std::filesystem::path& out_dir) {
  if (figure.curves.empty()) throw std::invalid_argument("figure has no curves");
  for (const auto& c : figure.curves) c.validate(figure.unit_interval);
  const auto svg = render_svg(figure);

  const auto dir = out_dir / figure.experiment / figure.env;
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& c : figure.curves) {
    const auto path = dir / (c.label + "." + figure.metric + ".csv");
    write_csv(c, path);
    written.push_back(path);
  }
  const auto plot = dir / (figure.metric + ".svg");
  std::ofstream os(plot);
  if (!os) throw std::runtime_error("cannot open " + plot.string() + " for writing");
  os << svg;
  if (!os) throw std::runtime_error("write failed: " + plot.string());
  written.push_back(plot);
  return written;
}

bool is_unit_interval_metric(const std::string& metric) {
  return metric == "win_rate" || metric == "cooperative_rate";
}

std::vector<Figure> load_figures(const std::filesystem::path& root) {
  std::map<std::tuple<std::string, std::string, std::string>, Figure> grouped;
  if (!std::filesystem::is_directory(root)) return {};
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const auto rel = std::filesystem::relative(entry.path(), root);
    std::vector<std::string> parts;
    for (const auto& p : rel) parts.push_back(p.string());
    if (parts.size() < 3) continue;
    const auto& file = parts.back();
    const auto stem = file.substr(0, file.size() - 4);
    const auto dot = stem.find('.');
    if (dot == std::string::npos) continue;
    const auto metric = stem.substr(dot + 1);
    const auto& env = parts[parts.size() - 2];
    std::string experiment;
    for (std::size_t i = 0; i + 2 < parts.size(); ++i) experiment += (i ? "/" : "") + parts[i];
    auto& fig = grouped[{experiment, env, metric}];
    fig.experiment = experiment;
    fig.env = env;
    fig.metric = metric;
    fig.unit_interval = is_unit_interval_metric(metric);
    fig.curves.push_back(read_csv(entry.path()));
  }
  std::vector<Figure> out;
  for (auto& [key, fig] : grouped) {
    std::sort(fig.curves.begin(), fig.curves.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
    out.push_back(std::move(fig));
  }
  return out;
}

}  // namespace ippo::metrics
