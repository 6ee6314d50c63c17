#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace flockmeter::svg {

/// Values below this are drawn at the floor on a log axis.
inline constexpr double kLogFloor = 1e-16;

struct Curve {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_err;  // optional half-widths of error bars
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Curve> curves;
};

struct Rendered {
  std::string svg;
  std::vector<std::string> warnings;
};

/// Static SVG 1.1 line chart with axes, ticks, a legend and optional
/// error bars. Non-positive values on a log axis are clamped to kLogFloor
/// and reported as warnings.
Rendered render(const Chart& chart);

/// Plot kinds read from CSV files written by report_io:
///   errx, errv      coupling.csv, one curve per J against t
///   errx-final      coupling.csv, errX at the last time against J, +-2 stderr
///   w2rate          w2rate.csv, E W2^2 at t = 0 against J, +-2 stderr
///   stability       stability.csv, distance and c_stab bound against t
///   telescope       telescope.csv, increment norms against t_n
/// Throws InvalidArgument naming a missing column or an unknown kind.
Rendered plot_csv(const std::filesystem::path& csv_path, const std::string& kind);

const std::vector<std::string>& plot_kinds();

}  // namespace flockmeter::svg
