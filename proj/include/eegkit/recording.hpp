#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "eegkit/error.hpp"
#include "eegkit/io.hpp"

namespace eegkit {

enum class Diagnosis { ASD, TD };

inline std::string_view to_string(Diagnosis d) { return d == Diagnosis::ASD ? "ASD" : "TD"; }

inline Diagnosis parse_diagnosis(std::string_view s) {
  if (s == "ASD") return Diagnosis::ASD;
  if (s == "TD") return Diagnosis::TD;
  throw Error("unknown diagnosis '" + std::string(s) + "' (expected ASD or TD)");
}

/// Named sample range [start, end) within a recording.
struct Epoch {
  std::string name;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start; }
};

struct ElectrodeSet {
  std::vector<std::string> names;

  /// Ten 10/20 electrodes over the social brain system.
  static ElectrodeSet homan() { return {{"F7", "F8", "T7", "T8", "TP9", "TP10", "P7", "P8", "C3", "C4"}}; }
  static ElectrodeSet left_hemisphere() { return {{"F7", "T7", "TP9", "P7", "C3"}}; }
  static ElectrodeSet right_hemisphere() { return {{"F8", "T8", "TP10", "P8", "C4"}}; }
};

/// 32-channel 10/20 montage used by the synthetic cohort generator.
inline std::vector<std::string> standard_montage_32() {
  return {"Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "FC5", "FC1", "FC2", "FC6",
          "T7",  "C3",  "Cz", "C4", "T8", "TP9", "CP5", "CP1", "CP2", "CP6", "TP10",
          "P7",  "P3",  "Pz", "P4", "P8", "PO9", "O1",  "Oz",  "O2",  "PO10"};
}

/// Channels x samples signal matrix in microvolts, plus subject metadata.
struct Recording {
  std::vector<std::vector<double>> data;
  double fs = 0.0;
  std::vector<std::string> labels;
  std::vector<Epoch> epochs;

  std::string subject_id;
  std::optional<Diagnosis> diagnosis;
  std::optional<int> ados2_score;

  std::size_t channels() const noexcept { return data.size(); }
  std::size_t samples() const noexcept { return data.empty() ? 0 : data.front().size(); }

  std::optional<std::size_t> index_of(std::string_view label) const {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels.begin());
  }

  std::span<const double> channel(std::string_view label) const {
    auto idx = index_of(label);
    if (!idx) throw Error("unknown electrode '" + std::string(label) + "'");
    return data[*idx];
  }

  const Epoch* find_epoch(std::string_view name) const {
    for (const auto& e : epochs)
      if (e.name == name) return &e;
    return nullptr;
  }
};

/// Throws if any structural invariant of `rec` is violated.
inline void check_invariants(const Recording& rec) {
  if (!(rec.fs > 0.0) || !std::isfinite(rec.fs)) throw Error("recording: sampling rate must be positive");
  if (rec.labels.size() != rec.data.size())
    throw Error("recording: " + std::to_string(rec.labels.size()) + " labels for " +
                std::to_string(rec.data.size()) + " channels");
  const std::size_t n = rec.samples();
  for (std::size_t c = 0; c < rec.data.size(); ++c)
    if (rec.data[c].size() != n) throw Error("recording: channel '" + rec.labels[c] + "' has a different length");
  std::unordered_set<std::string> seen;
  for (const auto& l : rec.labels)
    if (!seen.insert(l).second) throw Error("recording: duplicate label '" + l + "'");
  bool baseline = false;
  for (const auto& e : rec.epochs) {
    if (e.start >= e.end) throw Error("recording: epoch '" + e.name + "' is empty or inverted");
    if (e.end > n)
      throw Error("recording: epoch '" + e.name + "' end " + std::to_string(e.end) + " exceeds " +
                  std::to_string(n) + " samples");
    if (e.name == "BASELINE") {
      if (baseline) throw Error("recording: more than one BASELINE epoch");
      baseline = true;
    }
  }
}

struct LoadOptions {
  /// Admit NaN/Inf cells; validate() will still report them.
  bool allow_non_finite = false;
};

namespace detail {

inline std::size_t json_index(const nlohmann::json& j, const char* key, const std::string& file) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 0)
    throw ParseError(file, 0, 0, std::string("epoch field '") + key + "' must be a non-negative integer");
  return j[key].get<std::size_t>();
}

}  // namespace detail

/// Reads a JSON manifest and the channel CSV it references (relative to the manifest).
inline Recording load_recording(const std::filesystem::path& manifest_path, const LoadOptions& opts = {}) {
  const std::string mfile = manifest_path.string();
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(io::read_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(mfile, 0, 0, e.what());
  }

  Recording rec;
  if (!m.contains("fs_hz") || !m["fs_hz"].is_number()) throw ParseError(mfile, 0, 0, "missing numeric 'fs_hz'");
  rec.fs = m["fs_hz"].get<double>();
  if (!(rec.fs > 0.0)) throw ParseError(mfile, 0, 0, "'fs_hz' must be positive");
  if (!m.contains("channels") || !m["channels"].is_array() || m["channels"].empty())
    throw ParseError(mfile, 0, 0, "missing non-empty 'channels' list");
  for (const auto& c : m["channels"]) rec.labels.push_back(c.get<std::string>());
  if (!m.contains("data") || !m["data"].is_string()) throw ParseError(mfile, 0, 0, "missing 'data' CSV path");
  rec.subject_id = m.value("subject_id", manifest_path.stem().string());
  if (m.contains("diagnosis")) rec.diagnosis = parse_diagnosis(m["diagnosis"].get<std::string>());
  if (m.contains("ados2_score")) {
    if (!m["ados2_score"].is_number_integer() || m["ados2_score"].get<long long>() < 0)
      throw ParseError(mfile, 0, 0, "'ados2_score' must be a non-negative integer");
    rec.ados2_score = m["ados2_score"].get<int>();
  }
  if (m.contains("epochs")) {
    for (const auto& e : m["epochs"]) {
      Epoch ep;
      ep.name = e.at("name").get<std::string>();
      ep.start = detail::json_index(e, "start_sample", mfile);
      ep.end = detail::json_index(e, "end_sample", mfile);
      rec.epochs.push_back(std::move(ep));
    }
  }

  const auto csv_path = manifest_path.parent_path() / m["data"].get<std::string>();
  const std::string cfile = csv_path.string();
  if (!std::filesystem::exists(csv_path)) throw ParseError(cfile, 0, 0, "data file not found");
  const std::string text = io::read_file(csv_path);

  std::size_t pos = 0;
  std::size_t row = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    line = std::string_view(text).substr(pos, nl - pos);
    pos = nl + 1;
    ++row;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw ParseError(cfile, 1, 0, "empty file, expected a header row");
  auto header = io::split(line);
  if (header.size() != rec.labels.size())
    throw ParseError(cfile, 1, 0, "header has " + std::to_string(header.size()) + " columns, manifest declares " +
                                      std::to_string(rec.labels.size()) + " channels");
  std::unordered_map<std::string, std::size_t> column_of;
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto name = std::string(io::trim(header[c]));
    if (name.empty()) throw ParseError(cfile, 1, c + 1, "empty column label");
    if (!column_of.emplace(name, c).second) throw ParseError(cfile, 1, c + 1, "duplicate column '" + name + "'");
  }
  std::vector<std::size_t> channel_for_column(header.size());
  for (std::size_t ch = 0; ch < rec.labels.size(); ++ch) {
    auto it = column_of.find(rec.labels[ch]);
    if (it == column_of.end())
      throw ParseError(cfile, 1, 0, "channel '" + rec.labels[ch] + "' declared in manifest is absent from header");
    channel_for_column[it->second] = ch;
  }

  rec.data.assign(rec.labels.size(), {});
  while (next_line(line)) {
    if (io::trim(line).empty()) continue;
    auto cells = io::split(line);
    if (cells.size() != header.size())
      throw ParseError(cfile, row, 0,
                       "expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      auto v = io::parse_double(cells[c]);
      if (!v) throw ParseError(cfile, row, c + 1, "non-numeric cell '" + std::string(io::trim(cells[c])) + "'");
      if (!std::isfinite(*v) && !opts.allow_non_finite) throw ParseError(cfile, row, c + 1, "non-finite value");
      rec.data[channel_for_column[c]].push_back(*v);
    }
  }

  for (const auto& e : rec.epochs) {
    if (e.start >= e.end || e.end > rec.samples())
      throw ParseError(mfile, 0, 0,
                       "epoch '" + e.name + "' range [" + std::to_string(e.start) + ", " + std::to_string(e.end) +
                           ") out of range for " + std::to_string(rec.samples()) + " samples");
  }
  check_invariants(rec);
  return rec;
}

/// Writes `<stem>.json` + `<stem>.csv` next to each other; returns the manifest path.
inline std::filesystem::path save_recording(const Recording& rec, const std::filesystem::path& manifest_path) {
  check_invariants(rec);
  auto csv_path = manifest_path;
  csv_path.replace_extension(".csv");

  std::string csv;
  csv.reserve(rec.samples() * rec.channels() * 12 + 256);
  for (std::size_t c = 0; c < rec.labels.size(); ++c) {
    if (c) csv += ',';
    csv += rec.labels[c];
  }
  csv += '\n';
  for (std::size_t i = 0; i < rec.samples(); ++i) {
    for (std::size_t c = 0; c < rec.channels(); ++c) {
      if (c) csv += ',';
      csv += io::format_double(rec.data[c][i]);
    }
    csv += '\n';
  }
  io::write_file_atomic(csv_path, csv);

  nlohmann::ordered_json m;
  m["subject_id"] = rec.subject_id;
  m["fs_hz"] = rec.fs;
  m["channels"] = rec.labels;
  m["data"] = csv_path.filename().string();
  auto epochs = nlohmann::ordered_json::array();
  for (const auto& e : rec.epochs)
    epochs.push_back({{"name", e.name}, {"start_sample", e.start}, {"end_sample", e.end}});
  m["epochs"] = epochs;
  if (rec.diagnosis) m["diagnosis"] = std::string(to_string(*rec.diagnosis));
  if (rec.ados2_score) m["ados2_score"] = *rec.ados2_score;
  io::write_file_atomic(manifest_path, m.dump(2) + "\n");
  return manifest_path;
}

enum class EpochMode {
  literal,
  /// A fixed-length slice starting one third of the way into the epoch.
  middle_third,
};

/// Copies the samples of epoch `name` into a new recording with a single re-based epoch.
inline Recording extract_epoch(const Recording& rec, std::string_view name, EpochMode mode = EpochMode::literal,
                               double slice_s = 180.0) {
  const Epoch* ep = rec.find_epoch(name);
  if (!ep) throw Error("unknown epoch '" + std::string(name) + "'");

  std::size_t first = ep->start;
  std::size_t last = ep->end;
  if (mode == EpochMode::middle_third) {
    const auto want = static_cast<std::size_t>(std::llround(slice_s * rec.fs));
    if (want == 0) throw Error("extract_epoch: slice length must be positive");
    if (ep->length() < want)
      throw Error("epoch '" + ep->name + "' has " + std::to_string(ep->length()) + " samples, shorter than the " +
                  std::to_string(want) + "-sample slice");
    // Clamp so a slice from an epoch shorter than 1.5x the slice still fits.
    first = ep->start + std::min(ep->length() / 3, ep->length() - want);
    last = first + want;
  }

  Recording out;
  out.fs = rec.fs;
  out.labels = rec.labels;
  out.subject_id = rec.subject_id;
  out.diagnosis = rec.diagnosis;
  out.ados2_score = rec.ados2_score;
  out.data.reserve(rec.channels());
  for (const auto& ch : rec.data)
    out.data.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(first), ch.begin() + static_cast<std::ptrdiff_t>(last));
  out.epochs.push_back({ep->name, 0, last - first});
  return out;
}

/// Rows reordered to `set` order.
inline Recording select_channels(const Recording& rec, const ElectrodeSet& set) {
  if (set.names.empty()) throw Error("select_channels: empty electrode set");
  Recording out;
  out.fs = rec.fs;
  out.epochs = rec.epochs;
  out.subject_id = rec.subject_id;
  out.diagnosis = rec.diagnosis;
  out.ados2_score = rec.ados2_score;
  for (const auto& name : set.names) {
    auto idx = rec.index_of(name);
    if (!idx) throw Error("select_channels: unknown electrode '" + name + "'");
    out.labels.push_back(name);
    out.data.push_back(rec.data[*idx]);
  }
  check_invariants(out);
  return out;
}

struct Finding {
  enum class Kind { non_finite, flat_channel, duplicate_label };
  Kind kind;
  std::string label;
  std::size_t channel = 0;
  std::size_t sample = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool empty() const noexcept { return findings.empty(); }
};

/// Reports NaN/Inf cells, channels constant over any 5 s window, and duplicate labels.
inline ValidationReport validate(const Recording& rec) {
  ValidationReport report;
  std::unordered_set<std::string> seen;
  for (std::size_t c = 0; c < rec.labels.size(); ++c)
    if (!seen.insert(rec.labels[c]).second)
      report.findings.push_back({Finding::Kind::duplicate_label, rec.labels[c], c, 0, "duplicate label"});

  const auto window = static_cast<std::size_t>(std::max(1.0, std::round(5.0 * rec.fs)));
  for (std::size_t c = 0; c < rec.data.size(); ++c) {
    const auto& x = rec.data[c];
    const std::string label = c < rec.labels.size() ? rec.labels[c] : std::to_string(c);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!std::isfinite(x[i]))
        report.findings.push_back({Finding::Kind::non_finite, label, c, i,
                                   "non-finite value at channel " + std::to_string(c) + ", sample " + std::to_string(i)});

    // Zero variance over a window <=> a run of identical values at least as long as the window
    // (or the whole channel, when it is shorter than one window).
    const std::size_t need = std::min(window, x.size());
    std::size_t run = 1;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i > 0) run = (x[i] == x[i - 1]) ? run + 1 : 1;
      if (need > 0 && run >= need) {
        report.findings.push_back({Finding::Kind::flat_channel, label, c, i + 1 - run,
                                   "channel '" + label + "' is flat from sample " + std::to_string(i + 1 - run)});
        break;
      }
    }
  }
  return report;
}

}  // namespace eegkit
