#include "flockmeter/report_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "flockmeter/error.hpp"

namespace flockmeter::report_io {

const std::vector<std::string>& schema(const std::string& kind) {
  static const std::map<std::string, std::vector<std::string>> schemas = {
      {"coupling", {"t", "J", "errX_mean", "errX_stderr", "errV_mean", "errV_stderr"}},
      {"w2rate", {"J", "t", "w2sq_mean", "w2sq_stderr"}},
      {"stability", {"t", "dist_mean", "dist_stderr", "LX_mean", "LV_mean", "cstab_bound"}},
      {"telescope", {"n", "t_n", "increment_mean", "increment_stderr"}},
  };
  const auto it = schemas.find(kind);
  if (it == schemas.end()) throw InvalidArgument("unknown report kind '" + kind + "'");
  return it->second;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line + '\n';
}

}  // namespace

namespace {

// J values in the order their series appear in the report.
std::vector<std::size_t> series_sizes(const ExperimentReport& report, const std::string& name) {
  std::vector<std::size_t> js;
  for (const auto& s : report.series) {
    if (s.name == name) js.push_back(s.J);
  }
  return js;
}

const SeriesSummary& first_named(const ExperimentReport& report, const std::string& name) {
  for (const auto& s : report.series) {
    if (s.name == name) return s;
  }
  throw InvalidArgument("report has no series '" + name + "'");
}

}  // namespace

std::string to_csv(const ExperimentReport& report) {
  std::string out = join(schema(report.kind));
  const auto& times = report.times;
  const auto f = format_double;
  if (report.kind == "coupling") {
    for (std::size_t J : series_sizes(report, "errX")) {
      const auto& ex = report.find("errX", J);
      const auto& ev = report.find("errV", J);
      for (std::size_t k = 0; k < times.size(); ++k) {
        out += join({f(times[k]), std::to_string(J), f(ex.mean[k]), f(ex.stderr_[k]), f(ev.mean[k]), f(ev.stderr_[k])});
      }
    }
  } else if (report.kind == "w2rate") {
    for (std::size_t J : series_sizes(report, "w2sq")) {
      const auto& s = report.find("w2sq", J);
      for (std::size_t k = 0; k < times.size(); ++k) {
        out += join({std::to_string(J), f(times[k]), f(s.mean[k]), f(s.stderr_[k])});
      }
    }
  } else if (report.kind == "stability") {
    const auto& dist = first_named(report, "dist");
    const auto& lx = first_named(report, "LX");
    const auto& lv = first_named(report, "LV");
    const auto& bound = first_named(report, "cstab_bound");
    for (std::size_t k = 0; k < times.size(); ++k) {
      out += join({f(times[k]), f(dist.mean[k]), f(dist.stderr_[k]), f(lx.mean[k]), f(lv.mean[k]), f(bound.mean[k])});
    }
  } else if (report.kind == "telescope") {
    const auto& inc = first_named(report, "increment");
    for (std::size_t k = 0; k < times.size(); ++k) {
      out += join({std::to_string(k + 1), f(times[k]), f(inc.mean[k]), f(inc.stderr_[k])});
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw Error("write failed for " + path.string());
}

void emit_csv(const ExperimentReport& report, const std::filesystem::path& path) { write_text(path, to_csv(report)); }

std::string trajectory_csv(const Trajectory& traj) {
  const std::size_t d = traj.states.empty() ? 0 : traj.states.front().dim();
  std::vector<std::string> header{"t", "D_X", "D_V"};
  for (std::size_t c = 0; c < d; ++c) header.push_back("mean_v_" + std::to_string(c));
  for (std::size_t c = 0; c < d; ++c) header.push_back("barycenter_" + std::to_string(c));
  std::string out = join(header);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    std::vector<std::string> row{format_double(traj.states[k].time()), format_double(traj.diameters[k].x),
                                 format_double(traj.diameters[k].v)};
    for (double m : traj.conserved[k].mean_velocity) row.push_back(format_double(m));
    for (double b : traj.conserved[k].barycenter) row.push_back(format_double(b));
    out += join(row);
  }
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InvalidArgument("CSV is missing column '" + name + "'");
}

std::vector<double> CsvTable::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw InvalidArgument("CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw InvalidArgument("CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(table.header.size()));
    }
    std::vector<double> row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double v = 0.0;
      const auto* first = cells[i].data();
      const auto* last = first + cells[i].size();
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last) {
        // Leading '+' and similar spellings.
        char* end = nullptr;
        v = std::strtod(cells[i].c_str(), &end);
        if (end == cells[i].c_str() || *end != '\0') {
          throw InvalidArgument("CSV column '" + table.header[i] + "' line " + std::to_string(line_no) +
                                ": not a number");
        }
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

void require_schema(const CsvTable& table, const std::string& kind) {
  for (const auto& col : schema(kind)) table.column(col);
}

}  // namespace flockmeter::report_io
