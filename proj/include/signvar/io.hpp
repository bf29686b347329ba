#pragma once

#include "signvar/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace signvar {

struct CsvTable {
  std::vector<std::string> columns;  // numeric columns only
  std::vector<std::string> labels;   // leading label/date column, if present
  std::string label_column;
  Eigen::MatrixXd values;            // rows x columns, in file order
};

/// Reads a CSV with one header row. A first column that is non-numeric in
/// every data row is treated as a label (e.g. a date) and kept aside. Throws
/// DataError naming the row and column of ragged rows or bad cells.
CsvTable load_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::istream& in, const std::string& source = "<stream>");

/// Writes with 17 significant digits.
void write_csv(std::ostream& out, const Eigen::MatrixXd& values,
               const std::vector<std::string>& columns);

/// Writes through a temporary file in the same directory and renames it over
/// `path`, so a partially written file is never visible at `path`.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer);

// Binary draws file, little-endian:
//   char[8] "SVARDRW1", u32 version, u32 n, u32 m, u32 p, u64 count,
//   then per draw B (m x n), Sigma (n x n), Q (n x n) as float64, column-major.
inline constexpr char kDrawsMagic[8] = {'S', 'V', 'A', 'R', 'D', 'R', 'W', '1'};
inline constexpr std::uint32_t kDrawsVersion = 1;

struct DrawsFile {
  int n = 0;
  int m = 0;
  int p = 0;
  std::vector<OrthogonalParams> draws;
};

void write_draws(std::ostream& out, const DrawsFile& file);
DrawsFile read_draws(std::istream& in);
DrawsFile read_draws_file(const std::filesystem::path& path);

/// One row per draw: vec(B), vec(Sigma), vec(Q), column-major.
void write_draws_csv(std::ostream& out, const DrawsFile& file);

}  // namespace signvar
