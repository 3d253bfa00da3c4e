#include "crl/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "crl/runner.hpp"

namespace crl::cli {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::vector<double> read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read curve file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("curve file '" + path.string() + "' is empty");
  const auto header = split(line);
  const auto it = std::find(header.begin(), header.end(), "mean_extrinsic_return");
  if (it == header.end()) {
    throw std::runtime_error("curve file '" + path.string() + "' has no mean_extrinsic_return column");
  }
  const auto column = static_cast<std::size_t>(it - header.begin());
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() <= column) throw std::runtime_error("curve file '" + path.string() + "' has a short row");
    values.push_back(std::stod(cells[column]));
  }
  return values;
}

CurveBand summarize(const LabeledCurves& curves) {
  CurveBand band;
  band.label = curves.label;
  if (curves.seeds.empty()) return band;
  const auto [shortest, longest] = std::minmax_element(
      curves.seeds.begin(), curves.seeds.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  band.truncated = shortest->size() != longest->size();
  runner::mean_and_std(curves.seeds, band.mean, band.stddev);
  return band;
}

std::string render_svg(const std::vector<CurveBand>& bands, const std::string& title) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t length = 1;
  for (const auto& b : bands) {
    length = std::max(length, b.mean.size());
    for (std::size_t t = 0; t < b.mean.size(); ++t) {
      lo = std::min(lo, b.mean[t] - b.stddev[t]);
      hi = std::max(hi, b.mean[t] + b.stddev[t]);
    }
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto x_of = [&](std::size_t t) {
    return kLeft + (length > 1 ? plot_w * static_cast<double>(t) / static_cast<double>(length - 1) : plot_w / 2);
  };
  const auto y_of = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

  nlohmann::json data = nlohmann::json::array();
  for (const auto& b : bands) data.push_back({{"label", b.label}, {"mean", b.mean}, {"std", b.stddev}, {"truncated", b.truncated}});

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  svg << "<metadata id=\"curve-data\">" << escape(data.dump()) << "</metadata>\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  if (!title.empty()) {
    svg << "<text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << escape(title)
        << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(y_of(v) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(v) << "</text>\n";
  }
  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">iteration (0.." << length - 1
      << ")</text>\n";

  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& b = bands[i];
    const char* color = kPalette[i % std::size(kPalette)];
    if (b.mean.empty()) continue;
    std::ostringstream area;
    for (std::size_t t = 0; t < b.mean.size(); ++t) area << num(x_of(t)) << ',' << num(y_of(b.mean[t] + b.stddev[t])) << ' ';
    for (std::size_t t = b.mean.size(); t-- > 0;) area << num(x_of(t)) << ',' << num(y_of(b.mean[t] - b.stddev[t])) << ' ';
    std::ostringstream line;
    for (std::size_t t = 0; t < b.mean.size(); ++t) line << num(x_of(t)) << ',' << num(y_of(b.mean[t])) << ' ';
    svg << "<g class=\"series\" data-label=\"" << escape(b.label) << "\">\n";
    svg << "  <polygon class=\"band\" points=\"" << area.str() << "\" fill=\"" << color
        << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    svg << "  <polyline class=\"mean\" points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    const double ly = kTop + 16.0 + 18.0 * static_cast<double>(i);
    svg << "  <line x1=\"" << kWidth - kRight + 12 << "\" y1=\"" << ly << "\" x2=\"" << kWidth - kRight + 32
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "  <text x=\"" << kWidth - kRight + 38 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(b.label) << "</text>\n";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<CurveBand> read_svg_data(const std::string& svg) {
  const std::string open = "<metadata id=\"curve-data\">";
  const auto begin = svg.find(open);
  const auto end = svg.find("</metadata>", begin);
  if (begin == std::string::npos || end == std::string::npos) throw std::runtime_error("SVG has no curve data");
  std::string payload = svg.substr(begin + open.size(), end - begin - open.size());
  for (const auto& [entity, ch] : {std::pair<std::string, std::string>{"&quot;", "\""}, {"&lt;", "<"}, {"&gt;", ">"},
                                   {"&amp;", "&"}}) {
    std::size_t pos = 0;
    while ((pos = payload.find(entity, pos)) != std::string::npos) {
      payload.replace(pos, entity.size(), ch);
      pos += ch.size();
    }
  }
  std::vector<CurveBand> bands;
  for (const auto& item : nlohmann::json::parse(payload)) {
    CurveBand b;
    b.label = item.at("label").get<std::string>();
    b.mean = item.at("mean").get<std::vector<double>>();
    b.stddev = item.at("std").get<std::vector<double>>();
    b.truncated = item.value("truncated", false);
    bands.push_back(std::move(b));
  }
  return bands;
}

}  // namespace crl::cli
