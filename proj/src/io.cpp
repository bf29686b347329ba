#include "signvar/io.hpp"

#include "signvar/error.hpp"
#include "signvar/format.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace signvar {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& cell, double& out) {
  const std::string s = trim(cell);
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

static_assert(std::endian::native == std::endian::little,
              "draws files are written in native order and assume a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw DataError(std::string("draws file truncated while reading ") + what);
  }
  return v;
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Eigen::MatrixXd get_matrix(std::istream& in, int rows, int cols, long long k) {
  Eigen::MatrixXd m(rows, cols);
  if (!in.read(reinterpret_cast<char*>(m.data()),
               static_cast<std::streamsize>(m.size() * sizeof(double)))) {
    throw DataError("draws file truncated in draw " + std::to_string(k));
  }
  return m;
}

}  // namespace

CsvTable parse_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (header.empty()) {
      header = split_line(line);
      for (auto& h : header) h = trim(h);
      continue;
    }
    rows.push_back(split_line(line));
    line_numbers.push_back(line_no);
  }
  if (header.empty()) throw DataError(source + ": empty file");
  if (rows.empty()) throw DataError(source + ": no data rows after the header");

  const std::size_t width = header.size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw DataError(source + ": line " + std::to_string(line_numbers[r]) + " has " +
                      std::to_string(rows[r].size()) + " fields, header has " +
                      std::to_string(width));
    }
  }

  bool label_col = width > 1;
  for (const auto& row : rows) {
    double v = 0.0;
    if (parse_number(row[0], v)) {
      label_col = false;
      break;
    }
  }

  CsvTable t;
  const std::size_t first = label_col ? 1 : 0;
  if (label_col) t.label_column = header[0];
  t.columns.assign(header.begin() + static_cast<std::ptrdiff_t>(first), header.end());
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - first));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (label_col) t.labels.push_back(trim(rows[r][0]));
    for (std::size_t c = first; c < width; ++c) {
      double v = 0.0;
      if (!parse_number(rows[r][c], v)) {
        throw DataError(source + ": line " + std::to_string(line_numbers[r]) + ", column " +
                        std::to_string(c + 1) + " ('" + header[c] +
                        "'): not a finite number: '" + trim(rows[r][c]) + "'");
      }
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - first)) = v;
    }
  }
  return t;
}

CsvTable load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file " + path.string());
  return parse_csv(in, path.string());
}

void write_csv(std::ostream& out, const Eigen::MatrixXd& values,
               const std::vector<std::string>& columns) {
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      out << (c ? "," : "") << format_double(values(r, c));
    }
    out << '\n';
  }
}

void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    try {
      writer(out);
    } catch (...) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw;
    }
    out.flush();
    if (!out) throw DataError("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path);
}

void write_draws(std::ostream& out, const DrawsFile& file) {
  out.write(kDrawsMagic, sizeof kDrawsMagic);
  put<std::uint32_t>(out, kDrawsVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(file.n));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(file.m));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(file.p));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(file.draws.size()));
  for (const auto& d : file.draws) {
    if (d.B.rows() != file.m || d.B.cols() != file.n || d.Sigma.rows() != file.n ||
        d.Q.rows() != file.n) {
      throw DataError("write_draws: draw dimensions do not match the header");
    }
    put_matrix(out, d.B);
    put_matrix(out, d.Sigma);
    put_matrix(out, d.Q);
  }
}

DrawsFile read_draws(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + 8, kDrawsMagic)) {
    throw DataError("not a draws file (bad magic)");
  }
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kDrawsVersion) {
    throw DataError("unsupported draws file version " + std::to_string(version));
  }
  DrawsFile f;
  f.n = static_cast<int>(get<std::uint32_t>(in, "n"));
  f.m = static_cast<int>(get<std::uint32_t>(in, "m"));
  f.p = static_cast<int>(get<std::uint32_t>(in, "p"));
  const auto count = get<std::uint64_t>(in, "count");
  if (f.n < 1 || f.n > 10000 || f.m < 0 || f.m > 1000000) {
    throw DataError("draws file header has implausible dimensions");
  }
  f.draws.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t k = 0; k < count; ++k) {
    OrthogonalParams d;
    d.B = get_matrix(in, f.m, f.n, static_cast<long long>(k));
    d.Sigma = get_matrix(in, f.n, f.n, static_cast<long long>(k));
    d.Q = get_matrix(in, f.n, f.n, static_cast<long long>(k));
    f.draws.push_back(std::move(d));
  }
  return f;
}

DrawsFile read_draws_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open draws file " + path.string());
  return read_draws(in);
}

void write_draws_csv(std::ostream& out, const DrawsFile& file) {
  std::vector<std::string> cols;
  for (int j = 0; j < file.n; ++j) {
    for (int i = 0; i < file.m; ++i) cols.push_back("B_" + std::to_string(i) + "_" + std::to_string(j));
  }
  for (const char* name : {"Sigma", "Q"}) {
    for (int j = 0; j < file.n; ++j) {
      for (int i = 0; i < file.n; ++i) {
        cols.push_back(std::string(name) + "_" + std::to_string(i) + "_" + std::to_string(j));
      }
    }
  }
  const Eigen::Index row_len = static_cast<Eigen::Index>(file.m + 2 * file.n) * file.n;
  Eigen::MatrixXd values(static_cast<Eigen::Index>(file.draws.size()), row_len);
  for (std::size_t k = 0; k < file.draws.size(); ++k) {
    const auto& d = file.draws[k];
    Eigen::VectorXd row(row_len);
    row << Eigen::Map<const Eigen::VectorXd>(d.B.data(), d.B.size()),
        Eigen::Map<const Eigen::VectorXd>(d.Sigma.data(), d.Sigma.size()),
        Eigen::Map<const Eigen::VectorXd>(d.Q.data(), d.Q.size());
    values.row(static_cast<Eigen::Index>(k)) = row.transpose();
  }
  write_csv(out, values, cols);
}

}  // namespace signvar
