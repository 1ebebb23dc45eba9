#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eegkit/error.hpp"
#include "eegkit/io.hpp"
#include "eegkit/recording.hpp"

namespace eegkit {

/// Samples x named features, with optional class labels and ADOS-2 scores.
struct FeatureTable {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd rows;
  std::vector<std::string> subject_ids;
  std::optional<std::vector<Diagnosis>> labels;
  std::optional<std::vector<int>> scores;

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows.rows()); }
  std::size_t width() const noexcept { return static_cast<std::size_t>(rows.cols()); }

  void check() const {
    if (feature_names.size() != width())
      throw Error("feature table: " + std::to_string(feature_names.size()) + " names for " + std::to_string(width()) +
                  " columns");
    if (subject_ids.size() != size()) throw Error("feature table: subject id count does not match row count");
    if (labels && labels->size() != size()) throw Error("feature table: label count does not match row count");
    if (scores && scores->size() != size()) throw Error("feature table: score count does not match row count");
  }

  std::optional<std::size_t> column(const std::string& name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i)
      if (feature_names[i] == name) return i;
    return std::nullopt;
  }

  /// Binary class vector with ASD = 1 (the positive class), TD = 0.
  std::vector<int> binary_labels() const {
    if (!labels) throw Error("feature table has no labels");
    std::vector<int> y;
    y.reserve(labels->size());
    for (auto d : *labels) y.push_back(d == Diagnosis::ASD ? 1 : 0);
    return y;
  }

  /// Table restricted to the named columns, in the given order.
  FeatureTable select(const std::vector<std::string>& names) const {
    FeatureTable out;
    out.subject_ids = subject_ids;
    out.labels = labels;
    out.scores = scores;
    out.rows.resize(rows.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
      auto c = column(names[j]);
      if (!c) throw Error("feature table: no column '" + names[j] + "'");
      out.rows.col(static_cast<Eigen::Index>(j)) = rows.col(static_cast<Eigen::Index>(*c));
      out.feature_names.push_back(names[j]);
    }
    return out;
  }
};

/// CSV with header `subject_id,label,ados2,<features...>`; empty cells for absent label/score.
inline std::string to_csv(const FeatureTable& t) {
  t.check();
  std::string out = "subject_id,label,ados2";
  for (const auto& n : t.feature_names) out += "," + n;
  out += '\n';
  for (std::size_t r = 0; r < t.size(); ++r) {
    out += t.subject_ids[r];
    out += ',';
    if (t.labels) out += to_string((*t.labels)[r]);
    out += ',';
    if (t.scores) out += std::to_string((*t.scores)[r]);
    for (Eigen::Index c = 0; c < t.rows.cols(); ++c) {
      out += ',';
      out += io::format_double(t.rows(static_cast<Eigen::Index>(r), c));
    }
    out += '\n';
  }
  return out;
}

inline FeatureTable feature_table_from_csv(const std::string& text, const std::string& file = "<features>") {
  FeatureTable t;
  std::vector<std::vector<double>> values;
  std::vector<std::optional<Diagnosis>> labels;
  std::vector<std::optional<int>> scores;
  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line = std::string_view(text).substr(pos, nl - pos);
    pos = nl + 1;
    ++row;
    if (io::trim(line).empty()) continue;
    auto cells = io::split(line);
    if (row == 1) {
      if (cells.size() < 3 || io::trim(cells[0]) != "subject_id" || io::trim(cells[1]) != "label" ||
          io::trim(cells[2]) != "ados2")
        throw ParseError(file, 1, 0, "expected header 'subject_id,label,ados2,...'");
      for (std::size_t c = 3; c < cells.size(); ++c) t.feature_names.emplace_back(io::trim(cells[c]));
      continue;
    }
    if (cells.size() != t.feature_names.size() + 3)
      throw ParseError(file, row, 0, "wrong number of cells");
    t.subject_ids.emplace_back(io::trim(cells[0]));
    auto lab = io::trim(cells[1]);
    labels.push_back(lab.empty() ? std::nullopt : std::optional(parse_diagnosis(lab)));
    auto sc = io::trim(cells[2]);
    if (sc.empty()) {
      scores.push_back(std::nullopt);
    } else {
      auto v = io::parse_double(sc);
      if (!v || *v != static_cast<int>(*v)) throw ParseError(file, row, 3, "ados2 must be an integer");
      scores.push_back(static_cast<int>(*v));
    }
    std::vector<double> r;
    for (std::size_t c = 3; c < cells.size(); ++c) {
      auto v = io::parse_double(cells[c]);
      if (!v) throw ParseError(file, row, c + 1, "non-numeric cell");
      r.push_back(*v);
    }
    values.push_back(std::move(r));
  }
  t.rows.resize(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(t.feature_names.size()));
  for (std::size_t r = 0; r < values.size(); ++r)
    for (std::size_t c = 0; c < values[r].size(); ++c)
      t.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r][c];
  auto all = [](const auto& v) {
    for (const auto& x : v)
      if (!x) return false;
    return !v.empty();
  };
  if (all(labels)) {
    t.labels.emplace();
    for (const auto& l : labels) t.labels->push_back(*l);
  }
  if (all(scores)) {
    t.scores.emplace();
    for (const auto& s : scores) t.scores->push_back(*s);
  }
  t.check();
  return t;
}

}  // namespace eegkit
