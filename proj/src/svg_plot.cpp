#include "flockmeter/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "flockmeter/error.hpp"
#include "flockmeter/report_io.hpp"

namespace flockmeter::svg {
namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 440;
constexpr double kLeft = 80;
constexpr double kRight = 170;
constexpr double kTop = 40;
constexpr double kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Axis {
  bool log = false;
  double lo = 0.0;  // in transformed units
  double hi = 1.0;
  std::vector<double> ticks;  // data units

  double transform(double v) const { return log ? std::log10(v) : v; }
  double fraction(double v) const { return (transform(v) - lo) / (hi - lo); }
};

Axis make_axis(std::vector<double> values, bool log) {
  Axis a;
  a.log = log;
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }), values.end());
  if (values.empty()) values = {log ? 1.0 : 0.0, log ? 10.0 : 1.0};
  const auto [mn, mx] = std::ranges::minmax(values);
  if (log) {
    a.lo = std::floor(std::log10(mn));
    a.hi = std::ceil(std::log10(mx));
    if (a.hi <= a.lo) a.hi = a.lo + 1;
    const double span = a.hi - a.lo;
    const int stride = std::max(1, static_cast<int>(std::ceil(span / 8)));
    for (double e = a.lo; e <= a.hi + 1e-9; e += stride) a.ticks.push_back(std::pow(10.0, e));
    return a;
  }
  double lo = mn;
  double hi = mx;
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double raw = (hi - lo) / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  a.lo = std::floor(lo / step) * step;
  a.hi = std::ceil(hi / step) * step;
  for (double t = a.lo; t <= a.hi + step * 1e-9; t += step) a.ticks.push_back(std::abs(t) < step * 1e-12 ? 0.0 : t);
  return a;
}

}  // namespace

Rendered render(const Chart& chart) {
  Rendered out;
  // Clamp non-positive values on log axes.
  Chart c = chart;
  std::size_t clamped = 0;
  for (auto& curve : c.curves) {
    if (c.log_y) {
      for (double& y : curve.y) {
        if (!(y >= kLogFloor)) {
          y = kLogFloor;
          ++clamped;
        }
      }
    }
    if (c.log_x) {
      for (double& x : curve.x) {
        if (!(x >= kLogFloor)) {
          x = kLogFloor;
          ++clamped;
        }
      }
    }
  }
  if (clamped > 0) {
    out.warnings.push_back(std::to_string(clamped) + " non-positive value(s) clamped to " + tick_label(kLogFloor) +
                           " on a log axis");
  }

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& curve : c.curves) {
    xs.insert(xs.end(), curve.x.begin(), curve.x.end());
    for (std::size_t i = 0; i < curve.y.size(); ++i) {
      ys.push_back(curve.y[i]);
      if (i < curve.y_err.size()) {
        ys.push_back(curve.y[i] + curve.y_err[i]);
        const double lower = curve.y[i] - curve.y_err[i];
        ys.push_back(c.log_y ? std::max(lower, kLogFloor) : lower);
      }
    }
  }
  const Axis ax = make_axis(xs, c.log_x);
  const Axis ay = make_axis(ys, c.log_y);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + ax.fraction(x) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - ay.fraction(y)) * ph; };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(c.title)
    << "</text>\n";

  // Grid and ticks.
  for (double t : ax.ticks) {
    const double x = px(t);
    s << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(x) << "\" y2=\"" << num(kTop + ph)
      << "\" stroke=\"#e0e0e0\"/>\n";
    s << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">" << tick_label(t)
      << "</text>\n";
  }
  for (double t : ay.ticks) {
    const double y = py(t);
    s << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\"" << num(y)
      << "\" stroke=\"#e0e0e0\"/>\n";
    s << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick_label(t)
      << "</text>\n";
  }
  s << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 16) << "\" text-anchor=\"middle\">"
    << escape(c.x_label) << "</text>\n";
  s << "<text x=\"18\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << num(kTop + ph / 2) << ")\">" << escape(c.y_label) << "</text>\n";

  for (std::size_t k = 0; k < c.curves.size(); ++k) {
    const auto& curve = c.curves[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    // Dash pattern varies too, so curves stay distinguishable in greyscale.
    const char* dash = (k / std::size(kPalette)) % 2 == 0 ? "" : " stroke-dasharray=\"6 3\"";
    s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.8\"" << dash << " points=\"";
    for (std::size_t i = 0; i < curve.x.size() && i < curve.y.size(); ++i) {
      s << (i ? " " : "") << num(px(curve.x[i])) << ',' << num(py(curve.y[i]));
    }
    s << "\"/>\n";
    for (std::size_t i = 0; i < curve.y_err.size() && i < curve.y.size(); ++i) {
      const double x = px(curve.x[i]);
      const double top = py(curve.y[i] + curve.y_err[i]);
      const double lower = curve.y[i] - curve.y_err[i];
      const double bottom = py(c.log_y ? std::max(lower, kLogFloor) : lower);
      s << "<line class=\"errorbar\" x1=\"" << num(x) << "\" y1=\"" << num(top) << "\" x2=\"" << num(x) << "\" y2=\""
        << num(bottom) << "\" stroke=\"" << colour << "\"/>\n";
      s << "<line x1=\"" << num(x - 4) << "\" y1=\"" << num(top) << "\" x2=\"" << num(x + 4) << "\" y2=\"" << num(top)
        << "\" stroke=\"" << colour << "\"/>\n";
      s << "<line x1=\"" << num(x - 4) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(x + 4) << "\" y2=\""
        << num(bottom) << "\" stroke=\"" << colour << "\"/>\n";
    }
    if (curve.x.size() == 1 || !curve.y_err.empty()) {
      for (std::size_t i = 0; i < curve.x.size() && i < curve.y.size(); ++i) {
        s << "<circle cx=\"" << num(px(curve.x[i])) << "\" cy=\"" << num(py(curve.y[i])) << "\" r=\"3\" fill=\"" << colour
          << "\"/>\n";
      }
    }
    const double ly = kTop + 14 + 18.0 * static_cast<double>(k);
    const double lx = kLeft + pw + 14;
    s << "<g class=\"legend-entry\"><line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 24)
      << "\" y2=\"" << num(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"1.8\"" << dash << "/><text x=\""
      << num(lx + 30) << "\" y=\"" << num(ly + 4) << "\">" << escape(curve.label) << "</text></g>\n";
  }
  s << "</svg>\n";
  out.svg = s.str();
  return out;
}

const std::vector<std::string>& plot_kinds() {
  static const std::vector<std::string> kinds = {"errx", "errv", "errx-final", "w2rate", "stability", "telescope"};
  return kinds;
}

Rendered plot_csv(const std::filesystem::path& csv_path, const std::string& kind) {
  const auto table = report_io::read_csv(csv_path);
  Chart chart;
  auto by_J = [&](const std::string& x_col, const std::string& y_col, const std::string& err_col) {
    std::map<double, Curve> curves;
    const std::size_t cj = table.column("J");
    const std::size_t cx = table.column(x_col);
    const std::size_t cy = table.column(y_col);
    const std::size_t ce = err_col.empty() ? 0 : table.column(err_col);
    for (const auto& row : table.rows) {
      auto& curve = curves[row[cj]];
      curve.label = "J = " + tick_label(row[cj]);
      curve.x.push_back(row[cx]);
      curve.y.push_back(row[cy]);
      if (!err_col.empty()) curve.y_err.push_back(2.0 * row[ce]);
    }
    for (auto& [j, curve] : curves) chart.curves.push_back(std::move(curve));
  };

  if (kind == "errx" || kind == "errv") {
    report_io::require_schema(table, "coupling");
    const std::string y = kind == "errx" ? "errX_mean" : "errV_mean";
    chart.title = kind == "errx" ? "E errX(t)" : "E errV(t)";
    chart.x_label = "t";
    chart.y_label = kind == "errx" ? "E errX" : "E errV";
    chart.log_y = true;
    by_J("t", y, "");
  } else if (kind == "errx-final") {
    report_io::require_schema(table, "coupling");
    const auto t = table.values("t");
    const double t_end = t.empty() ? 0.0 : *std::ranges::max_element(t);
    Curve curve{"E errX(T) +- 2 s.e.", {}, {}, {}};
    for (const auto& row : table.rows) {
      if (row[table.column("t")] != t_end) continue;
      curve.x.push_back(row[table.column("J")]);
      curve.y.push_back(row[table.column("errX_mean")]);
      curve.y_err.push_back(2.0 * row[table.column("errX_stderr")]);
    }
    chart.title = "E errX(T), T = " + tick_label(t_end);
    chart.x_label = "J";
    chart.y_label = "E errX(T)";
    chart.log_x = true;
    chart.curves.push_back(std::move(curve));
  } else if (kind == "w2rate") {
    report_io::require_schema(table, "w2rate");
    Curve curve{"E W2^2 at t = 0 +- 2 s.e.", {}, {}, {}};
    for (const auto& row : table.rows) {
      if (row[table.column("t")] != 0.0) continue;
      curve.x.push_back(row[table.column("J")]);
      curve.y.push_back(row[table.column("w2sq_mean")]);
      curve.y_err.push_back(2.0 * row[table.column("w2sq_stderr")]);
    }
    chart.title = "Empirical W2 rate";
    chart.x_label = "J";
    chart.y_label = "E W2^2";
    chart.log_x = chart.log_y = true;
    chart.curves.push_back(std::move(curve));
  } else if (kind == "stability") {
    report_io::require_schema(table, "stability");
    chart.title = "Stability of two perturbed systems";
    chart.x_label = "t";
    chart.y_label = "distance";
    chart.log_y = true;
    chart.curves.push_back({"mean distance", table.values("t"), table.values("dist_mean"), {}});
    chart.curves.push_back({"c_stab x distance(0)", table.values("t"), table.values("cstab_bound"), {}});
  } else if (kind == "telescope") {
    report_io::require_schema(table, "telescope");
    chart.title = "Telescoping increments";
    chart.x_label = "t_n";
    chart.y_label = "E_n";
    chart.log_y = true;
    auto err = table.values("increment_stderr");
    for (double& e : err) e *= 2.0;
    chart.curves.push_back({"E_n +- 2 s.e.", table.values("t_n"), table.values("increment_mean"), std::move(err)});
  } else {
    throw InvalidArgument("unknown plot kind '" + kind + "'");
  }
  return render(chart);
}

}  // namespace flockmeter::svg
