#include "pigp/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "pigp/error.hpp"

namespace pigp {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& field, const std::string& origin, std::size_t line) {
  if (field.empty() || field == "nan" || field == "NaN" || field == "NA") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end)
    fail(ErrorKind::Data, origin + ":" + std::to_string(line) + ": not a number: '" + field + "'");
  return v;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

bool Table::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

Eigen::Index Table::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  require(it != names.end(), ErrorKind::Data, "missing column '" + name + "'");
  return static_cast<Eigen::Index>(it - names.begin());
}

Eigen::VectorXd Table::column(const std::string& name) const { return values.col(index_of(name)); }

Eigen::MatrixXd Table::columns(const std::vector<std::string>& cols) const {
  Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = column(cols[j]);
  return out;
}

void Table::add(const std::string& name, const Eigen::VectorXd& col) {
  require(!has(name), ErrorKind::InvalidArgument, "duplicate column '" + name + "'");
  if (names.empty() && values.size() == 0) values.resize(col.size(), 0);
  require(col.size() == values.rows(), ErrorKind::InvalidArgument, "column '" + name + "' has the wrong length");
  values.conservativeResize(Eigen::NoChange, values.cols() + 1);
  values.col(values.cols() - 1) = col;
  names.push_back(name);
}

Table Table::rows_subset(const std::vector<Eigen::Index>& rows) const {
  Table out;
  out.names = names;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.values.row(static_cast<Eigen::Index>(i)) = values.row(rows[i]);
  return out;
}

Table parse_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  Table t;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (t.names.empty()) {
      for (const auto& f : fields) require(!f.empty(), ErrorKind::Data, origin + ": empty column name in header");
      t.names = std::move(fields);
      continue;
    }
    require(fields.size() == t.names.size(), ErrorKind::Data,
            origin + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.names.size()) + " fields, found " +
                std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, origin, lineno));
    rows.push_back(std::move(row));
  }
  require(!t.names.empty(), ErrorKind::Data, origin + ": no header row");
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return t;
}

Table read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::Data, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str(), path);
}

std::string format_csv(const Table& table) {
  std::string out;
  for (std::size_t j = 0; j < table.names.size(); ++j) {
    if (j) out += ',';
    out += table.names[j];
  }
  out += '\n';
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
      if (j) out += ',';
      out += format_number(table.values(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    require(!ec, ErrorKind::Io, "cannot create directory '" + target.parent_path().string() + "': " + ec.message());
  }
  const fs::path tmp = target.string() + ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(f), ErrorKind::Io, "cannot write '" + tmp.string() + "'");
    f << contents;
    f.flush();
    if (!f) {
      f.close();
      std::remove(tmp.c_str());
      fail(ErrorKind::Io, "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::remove(tmp.c_str());
    fail(ErrorKind::Io, "cannot rename onto '" + path + "': " + ec.message());
  }
}

}  // namespace pigp
