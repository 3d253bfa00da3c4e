#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace crl::cli {

/// Learning curves of one algorithm label, one vector per seed.
struct LabeledCurves {
  std::string label;
  std::vector<std::vector<double>> seeds;
};

/// Per-label mean and population standard deviation, truncated to the
/// shortest seed curve.
struct CurveBand {
  std::string label;
  std::vector<double> mean;
  std::vector<double> stddev;
  bool truncated = false;
};

/// Reads the mean_extrinsic_return column of a per-seed CSV.
std::vector<double> read_curve_csv(const std::filesystem::path& path);

CurveBand summarize(const LabeledCurves& curves);

/// Static SVG: a mean line and a +/-1 std band per label. The numeric data is
/// embedded as JSON inside <metadata id="curve-data">.
std::string render_svg(const std::vector<CurveBand>& bands, const std::string& title = "");

/// Parses the embedded data layer back out of an SVG produced by render_svg.
std::vector<CurveBand> read_svg_data(const std::string& svg);

}  // namespace crl::cli
