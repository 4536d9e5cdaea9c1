#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pigp {

/// Named numeric columns. Generators may mark where their natural training
/// window ends.
struct Table {
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // rows x names.size()
  std::optional<Eigen::Index> train_end;

  Eigen::Index rows() const { return values.rows(); }
  bool has(const std::string& name) const;
  Eigen::Index index_of(const std::string& name) const;  // ErrorKind::Data when absent
  Eigen::VectorXd column(const std::string& name) const;
  Eigen::MatrixXd columns(const std::vector<std::string>& names) const;
  void add(const std::string& name, const Eigen::VectorXd& values);
  Table rows_subset(const std::vector<Eigen::Index>& rows) const;
};

/// Header row then comma-separated numbers. Empty fields and "nan" read as NaN.
Table read_csv(const std::string& path);
Table parse_csv(const std::string& text, const std::string& origin);
std::string format_csv(const Table& table);

/// Write to a sibling temporary file then rename over the target.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace pigp
