#pragma once

#include <string>
#include <vector>

#include "relpose/scenario.hpp"

namespace relpose {

/// Column names of the run CSV, in file order.  Units live in the names;
/// rotation entries are row-major (R_11 is the first row, first column).
const std::vector<std::string>& run_csv_columns();

/// Writes a header row plus one row per post-step record, numbers at 17
/// significant digits so the file parses back bit for bit.  An N-step run
/// at stride 1 yields N + 1 lines.  Throws std::invalid_argument when there
/// are no records and IoError on filesystem trouble.
void write_run_csv(const RunResult& result, const std::string& path);

/// Parses a file produced by write_run_csv.  The header must match
/// run_csv_columns exactly; every row must carry every column.
std::vector<RunRecord> read_run_csv(const std::string& path);

}  // namespace relpose
