#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "webcolor/common.hpp"
#include "webcolor/features.hpp"

namespace webcolor {

/// Feature rows plus optional ratings, as exchanged through CSV. `y` is
/// empty for target (unlabeled) data.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> feature_names;
  std::string schema_version;
  std::string origin;

  bool labeled() const { return y.size() == X.rows() && X.rows() > 0; }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace detail

/// Reads a feature CSV: header row of dimension names, optionally ending in
/// a `rating` column. The schema version is inferred when the header matches
/// the built-in feature schema.
inline Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("FileRead", "cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw Error("BadCsv", path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = detail::split_csv_line(line);
  bool labeled = !header.empty() && header.back() == "rating";
  std::size_t dims = header.size() - (labeled ? 1 : 0);
  if (dims == 0) throw Error("BadCsv", path + " has no feature columns");

  std::vector<std::vector<double>> rows;
  std::vector<double> ratings;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw Error("BadCsv", path + ":" + std::to_string(line_no) + " has " +
                                std::to_string(fields.size()) + " fields, expected " +
                                std::to_string(header.size()));
    std::vector<double> row(dims);
    for (std::size_t i = 0; i < dims; ++i) {
      try {
        row[i] = std::stod(fields[i]);
      } catch (const std::exception&) {
        throw Error("BadCsv", path + ":" + std::to_string(line_no) + " bad number '" + fields[i] + "'");
      }
    }
    if (labeled) ratings.push_back(std::stod(fields.back()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("BadCsv", path + " has no data rows");

  Dataset ds;
  ds.feature_names.assign(header.begin(), header.begin() + static_cast<long>(dims));
  ds.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dims));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < dims; ++c) ds.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  if (labeled)
    ds.y = Eigen::Map<const Eigen::VectorXd>(ratings.data(), static_cast<Eigen::Index>(ratings.size()));
  ds.schema_version = ds.feature_names == feature_schema()
                          ? kFeatureSchemaVersion
                          : "custom/" + std::to_string(dims) + "d";
  return ds;
}

inline void save_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("FileWrite", "cannot open " + path + " for writing");
  for (std::size_t i = 0; i < ds.feature_names.size(); ++i) {
    if (i) out << ',';
    out << ds.feature_names[i];
  }
  bool labeled = ds.labeled();
  if (labeled) out << ",rating";
  out << '\n';
  for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.X.cols(); ++c) {
      if (c) out << ',';
      out << detail::format_double(ds.X(r, c));
    }
    if (labeled) out << ',' << detail::format_double(ds.y[r]);
    out << '\n';
  }
  if (!out) throw Error("FileWrite", "write failed: " + path);
}

} // namespace webcolor
