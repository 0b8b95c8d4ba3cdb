#include "relpose/run_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "relpose/errors.hpp"

namespace relpose {
namespace {

std::vector<std::string> build_columns() {
  std::vector<std::string> columns;
  columns.reserve(40);
  columns.push_back("time_s");
  auto rotation = [&columns](const std::string& prefix) {
    for (int r = 1; r <= 3; ++r) {
      for (int c = 1; c <= 3; ++c) {
        columns.push_back(prefix + "_" + std::to_string(r) +
                          std::to_string(c));
      }
    }
  };
  auto triple = [&columns](const std::string& prefix,
                           const std::string& unit) {
    for (const char* axis : {"x", "y", "z"}) {
      columns.push_back(prefix + "_" + axis + "_" + unit);
    }
  };
  rotation("R_true");
  triple("b_true", "m");
  rotation("R_est");
  triple("b_est", "m");
  columns.push_back("principal_angle_rad");
  triple("pos_err", "m");
  triple("pos_err_raw", "m");
  triple("omega_err", "rad_s");
  triple("nu_err", "m_s");
  columns.push_back("newton_iters");
  columns.push_back("energy");
  return columns;
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void append_vec3(std::string& row, const Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    row += ',';
    row += format_double(v[i]);
  }
}

void append_mat3(std::string& row, const Mat3& m) {
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      row += ',';
      row += format_double(m(r, c));
    }
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      tokens.push_back(line.substr(start));
      return tokens;
    }
    tokens.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& token, const std::string& path,
                    std::size_t line_number) {
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw IoError(path + ":" + std::to_string(line_number) +
                  ": not a number: \"" + token + "\"");
  }
  return value;
}

}  // namespace

const std::vector<std::string>& run_csv_columns() {
  static const std::vector<std::string> columns = build_columns();
  return columns;
}

void write_run_csv(const RunResult& result, const std::string& path) {
  if (result.records.empty()) {
    throw std::invalid_argument("write_run_csv: no records");
  }
  std::ofstream file(path);
  if (!file) {
    throw IoError(path + ": cannot open for writing");
  }

  const std::vector<std::string>& columns = run_csv_columns();
  std::string header;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i > 0) {
      header += ',';
    }
    header += columns[i];
  }
  file << header << '\n';

  for (const RunRecord& record : result.records) {
    std::string row = format_double(record.t);
    append_mat3(row, record.truth.R);
    append_vec3(row, record.truth.b);
    append_mat3(row, record.estimate.R);
    append_vec3(row, record.estimate.b);
    row += ',';
    row += format_double(record.error.principal_angle);
    append_vec3(row, record.error.position);
    append_vec3(row, record.error.position_raw);
    append_vec3(row, record.error.omega);
    append_vec3(row, record.error.nu);
    row += ',';
    row += std::to_string(record.newton_iterations);
    row += ',';
    row += format_double(record.energy);
    file << row << '\n';
  }
  if (!file.good()) {
    throw IoError(path + ": write failed");
  }
}

std::vector<RunRecord> read_run_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw IoError(path + ": cannot open for reading");
  }

  const std::vector<std::string>& columns = run_csv_columns();
  std::string line;
  if (!std::getline(file, line)) {
    throw IoError(path + ": empty file");
  }
  {
    const std::vector<std::string> header = split_csv_line(line);
    if (header != columns) {
      throw IoError(path + ": header does not match the run CSV schema");
    }
  }

  std::vector<RunRecord> records;
  std::size_t line_number = 1;
  while (std::getline(file, line)) {
    ++line_number;
    if (line.empty()) {
      continue;
    }
    const std::vector<std::string> tokens = split_csv_line(line);
    if (tokens.size() != columns.size()) {
      throw IoError(path + ":" + std::to_string(line_number) + ": expected " +
                    std::to_string(columns.size()) + " columns, got " +
                    std::to_string(tokens.size()));
    }
    std::size_t k = 0;
    auto next = [&]() { return parse_double(tokens[k++], path, line_number); };
    auto next_vec3 = [&]() {
      Vec3 v;
      for (int i = 0; i < 3; ++i) {
        v[i] = next();
      }
      return v;
    };
    auto next_mat3 = [&]() {
      Mat3 m;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          m(r, c) = next();
        }
      }
      return m;
    };

    RunRecord record;
    record.t = next();
    record.truth.R = next_mat3();
    record.truth.b = next_vec3();
    record.estimate.R = next_mat3();
    record.estimate.b = next_vec3();
    record.error.principal_angle = next();
    record.error.position = next_vec3();
    record.error.position_raw = next_vec3();
    record.error.omega = next_vec3();
    record.error.nu = next_vec3();
    record.newton_iterations = static_cast<int>(next());
    record.energy = next();
    records.push_back(record);
  }
  return records;
}

}  // namespace relpose
