#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flockmeter/dynamics.hpp"
#include "flockmeter/experiments.hpp"

namespace flockmeter::report_io {

/// Column layout per report kind:
///   coupling:  t,J,errX_mean,errX_stderr,errV_mean,errV_stderr
///   w2rate:    J,t,w2sq_mean,w2sq_stderr
///   stability: t,dist_mean,dist_stderr,LX_mean,LV_mean,cstab_bound
///   telescope: n,t_n,increment_mean,increment_stderr
const std::vector<std::string>& schema(const std::string& kind);

/// 17 significant digits, '.' decimal separator, locale independent.
std::string format_double(double value);

/// CSV text for a report; rows grouped by J in J_list order, then by time.
std::string to_csv(const ExperimentReport& report);

/// Writes to_csv(report) to path. Throws Error naming the path on failure.
void emit_csv(const ExperimentReport& report, const std::filesystem::path& path);

/// t, D_X, D_V, mean velocity and barycenter components per snapshot.
std::string trajectory_csv(const Trajectory& trajectory);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a column; throws InvalidArgument naming it when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

/// Throws InvalidArgument naming the first column of `kind`'s schema that
/// the table lacks.
void require_schema(const CsvTable& table, const std::string& kind);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace flockmeter::report_io
