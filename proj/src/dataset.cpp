#include "subshape/dataset.hpp"

#include "subshape/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace subshape {

namespace {

using Row = std::vector<std::string>;

// RFC 4180 style record splitter. Handles quoted fields containing the
// delimiter, doubled quotes and embedded newlines.
std::vector<Row> parse_records(std::string_view text, char delim) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    const bool blank = row.size() == 1 && row[0].empty();
    if (!blank) rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\r') {
      // swallowed; '\n' terminates the record
    } else if (c == '\n') {
      end_row();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw Error("malformed header: unterminated quoted field");
  if (!row.empty() || !field.empty()) end_row();
  return rows;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

int Dataset::n_clusters() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

Dataset load_table(std::string_view text, const std::optional<std::string>& label_column) {
  const auto first_newline = text.find('\n');
  const std::string_view header_line = text.substr(0, first_newline);
  const char delim = header_line.find('\t') != std::string_view::npos ? '\t' : ',';

  const std::vector<Row> records = parse_records(text, delim);
  if (records.empty()) throw Error("malformed header: no header row");

  const Row& header = records.front();
  std::vector<std::string> names;
  for (const auto& h : header) names.emplace_back(trim(h));
  for (const auto& n : names) {
    if (n.empty()) throw Error("malformed header: empty column name");
  }

  std::optional<std::size_t> label_index;
  if (label_column) {
    const auto it = std::find(names.begin(), names.end(), *label_column);
    if (it == names.end()) throw Error("label column missing: '" + *label_column + "'");
    label_index = static_cast<std::size_t>(it - names.begin());
  }

  std::vector<std::size_t> numeric_columns;
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c != label_index) numeric_columns.push_back(c);
  }

  Dataset out;
  for (const auto c : numeric_columns) out.column_names.push_back(names[c]);

  std::vector<double> flat;
  std::unordered_map<std::string, int> label_ids;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const Row& rec = records[r];
    if (rec.size() != names.size()) {
      ++out.rejected_rows;
      continue;
    }
    std::vector<double> parsed;
    parsed.reserve(numeric_columns.size());
    bool ok = true;
    for (const auto c : numeric_columns) {
      const auto v = parse_number(rec[c]);
      if (!v) {
        ok = false;
        break;
      }
      parsed.push_back(*v);
    }
    if (!ok) {
      ++out.rejected_rows;
      continue;
    }
    int label = 0;
    if (label_index) {
      const std::string key(trim(rec[*label_index]));
      const auto [it, inserted] = label_ids.emplace(key, static_cast<int>(label_ids.size()));
      if (inserted) out.label_names.push_back(key);
      label = it->second;
    }
    flat.insert(flat.end(), parsed.begin(), parsed.end());
    out.labels.push_back(label);
    out.point_ids.push_back(static_cast<int>(r - 1));
  }

  if (out.labels.empty()) throw Error("zero usable rows");
  if (!label_index) out.label_names = {"all"};

  const auto n = static_cast<Eigen::Index>(out.labels.size());
  const auto d = static_cast<Eigen::Index>(numeric_columns.size());
  out.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), n, d);
  return out;
}

Dataset load_table_file(const std::string& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open input file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_table(buffer.str(), label_column);
}

Dataset normalize_columns(Dataset data) {
  for (Eigen::Index c = 0; c < data.values.cols(); ++c) {
    auto col = data.values.col(c);
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    if (hi > lo) {
      col = ((col.array() - lo) / (hi - lo)).matrix();
    } else {
      col.setConstant(0.5);
    }
  }
  return data;
}

std::vector<int> compact_labels(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const int l : labels) {
    const auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

}  // namespace subshape
