#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <string_view>

#include "ser/dataset.hpp"
#include "ser/detail/text.hpp"
#include "ser/error.hpp"
#include "ser/functionals.hpp"

namespace ser {

// `#version=1`, then the header `file,label,<352 feature names>`; values in
// shortest round-trip form.
inline std::string format_features_csv(const LabeledDataset& data) {
  std::string out = "#version=1\nfile,label";
  for (const auto& n : feature_names()) out += "," + n;
  out += '\n';
  for (const auto& row : data.rows) {
    if (row.values.size() != kNumFeatures)
      throw Error(ErrorCode::SchemaMismatch, "row '" + row.source_id + "' does not have 352 values");
    if (row.source_id.find_first_of(",\n\"") != std::string::npos)
      throw Error(ErrorCode::SchemaMismatch, "file id '" + row.source_id + "' contains a CSV delimiter");
    out += row.source_id;
    out += ',';
    if (row.label) out += class_name(*row.label);
    for (double v : row.values) {
      out += ',';
      out += detail::format_double(v);
    }
    out += '\n';
  }
  return out;
}

inline LabeledDataset parse_features_csv(std::string_view text) {
  auto lines = detail::lines(text);
  if (!lines.empty() && lines[0].starts_with('#')) {
    if (detail::trim(lines[0]) != "#version=1")
      throw Error(ErrorCode::SchemaMismatch, "unsupported feature file version '" + std::string(lines[0]) + "'");
    lines.erase(lines.begin());
  }
  if (lines.empty()) throw Error(ErrorCode::SchemaMismatch, "empty feature file");
  const auto header = detail::split(lines[0], ',');
  const auto& names = feature_names();
  if (header.size() != names.size() + 2)
    throw Error(ErrorCode::SchemaMismatch, "expected " + std::to_string(names.size()) + " feature columns, found " +
                                               std::to_string(header.size() < 2 ? 0 : header.size() - 2));
  if (header[0] != "file" || header[1] != "label")
    throw Error(ErrorCode::SchemaMismatch, "header must start with file,label");
  for (std::size_t j = 0; j < names.size(); ++j)
    if (header[j + 2] != names[j])
      throw Error(ErrorCode::SchemaMismatch, "column " + std::to_string(j + 3) + " is '" + std::string(header[j + 2]) +
                                                 "', expected '" + names[j] + "'");
  LabeledDataset data;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (detail::trim(lines[i]).empty()) continue;
    const std::size_t row_no = i;  // 1-based data row
    const auto cells = detail::split(lines[i], ',');
    if (cells.size() != header.size())
      throw MalformedRowError(row_no, std::to_string(cells.size()) + " cells, expected " + std::to_string(header.size()));
    FeatureVector fv;
    fv.source_id = std::string(cells[0]);
    if (!cells[1].empty()) {
      fv.label = parse_class(cells[1]);
      if (!fv.label) throw MalformedRowError(row_no, "unknown label '" + std::string(cells[1]) + "'");
    }
    fv.values.reserve(kNumFeatures);
    for (std::size_t j = 2; j < cells.size(); ++j) {
      const auto v = detail::parse_double(cells[j]);
      if (!v || !std::isfinite(*v))
        throw MalformedRowError(row_no, "column '" + names[j - 2] + "' is not a finite number");
      fv.values.push_back(*v);
    }
    data.rows.push_back(std::move(fv));
  }
  return data;
}

inline void export_features(const LabeledDataset& data, const std::filesystem::path& path) {
  detail::write_file(path.string(), format_features_csv(data));
}

inline LabeledDataset import_features(const std::filesystem::path& path) {
  return parse_features_csv(detail::read_file(path.string()));
}

}  // namespace ser
