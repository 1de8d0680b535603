#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace subshape {

/// Cluster-labeled point table. Rows are points, columns are numeric
/// attributes. Labels are contiguous 0..k-1.
struct Dataset {
  std::vector<std::string> column_names;
  Eigen::MatrixXd values;           // n_points x n_dims
  std::vector<int> labels;          // cluster id per row
  std::vector<int> point_ids;       // stable id per row (source row index)
  std::vector<std::string> label_names;  // label id -> original category text
  std::size_t rejected_rows = 0;

  Eigen::Index n_points() const { return values.rows(); }
  Eigen::Index n_dims() const { return values.cols(); }
  int n_clusters() const;
};

/// Parses comma- or tab-delimited text with one header row. The delimiter is
/// detected from the header. Quoted fields follow RFC 4180. Without a label
/// column every row gets cluster 0.
Dataset load_table(std::string_view text, const std::optional<std::string>& label_column);

Dataset load_table_file(const std::string& path, const std::optional<std::string>& label_column);

/// Min-max maps each column to [0,1]; constant columns become 0.5.
Dataset normalize_columns(Dataset data);

/// Renumbers labels to 0..k-1 in order of first appearance.
std::vector<int> compact_labels(const std::vector<int>& labels);

}  // namespace subshape
