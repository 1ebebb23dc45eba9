#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "eegkit/coherence.hpp"
#include "eegkit/error.hpp"
#include "eegkit/filters.hpp"
#include "eegkit/io.hpp"
#include "eegkit/ml/classifiers.hpp"
#include "eegkit/recording.hpp"
#include "eegkit/synth.hpp"
#include "eegkit/wavelet.hpp"

namespace eegkit::pipeline {

enum class Stage { synth, preprocess, bandpower, wavelet, coherence, features, train, eval };

inline constexpr std::array kStageOrder = {Stage::synth,     Stage::preprocess, Stage::bandpower, Stage::wavelet,
                                           Stage::coherence, Stage::features,   Stage::train,     Stage::eval};

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::synth: return "synth";
    case Stage::preprocess: return "preprocess";
    case Stage::bandpower: return "bandpower";
    case Stage::wavelet: return "wavelet";
    case Stage::coherence: return "coherence";
    case Stage::features: return "features";
    case Stage::train: return "train";
    case Stage::eval: return "eval";
  }
  return "?";
}

inline Stage parse_stage(std::string_view s) {
  for (auto st : kStageOrder)
    if (s == stage_name(st)) return st;
  throw Error("config: unknown stage '" + std::string(s) + "'");
}

/// Raised for invalid configurations; nothing has been executed when it is thrown.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct EpochConfig {
  std::string name = "TASK1";
  EpochMode mode = EpochMode::literal;
  double slice_s = 180.0;
  /// Resting epoch used to reference scalograms; skipped for recordings that lack it.
  std::string baseline = "BASELINE";
};

struct FilterConfig {
  double highpass_hz = 1.0;
  std::optional<double> line_hz = 60.0;
  int order = kDefaultFilterOrder;
};

struct BandpowerConfig {
  double window_s = 5.0;
  double step_s = 2.0;
};

struct WaveletConfig {
  std::size_t scales = 150;
  std::size_t columns = 256;
  bool reference = true;
  std::vector<std::string> electrodes;  // empty: every selected electrode
  MorletParams morlet;
};

struct FeatureConfig {
  std::vector<std::string> sources;  // empty: every source backed by a planned stage
  bool normalize = false;
  std::size_t entropy_bins = 64;
};

struct TrainConfig {
  std::vector<std::string> classifiers = {"gnb", "logistic", "knn"};
  std::string cv = "loocv";
  std::size_t folds = 10;
  bool standardize = true;
  std::size_t knn_k = 5;
  std::optional<double> pca_variance;  // in-fold PCA when set
  ml::LogisticOptions logistic;
};

struct EvalConfig {
  std::vector<std::string> features = {"coh_right_delta", "coh_right_theta"};
  std::string cv = "loocv";
  std::size_t folds = 10;
};

struct Config {
  std::uint64_t seed = 1;
  std::optional<synth::CohortSpec> synth;
  std::vector<std::string> inputs;  // manifest paths, relative to base_dir
  std::filesystem::path base_dir = ".";
  std::vector<Stage> stages;
  EpochConfig epoch;
  std::string electrode_set = "homan";
  std::vector<BandSpec> bands = default_bands();
  FilterConfig filters;
  BandpowerConfig bandpower;
  WaveletConfig wavelet;
  WelchParams coherence;
  FeatureConfig features;
  TrainConfig train;
  EvalConfig eval;

  bool has(Stage s) const { return std::find(stages.begin(), stages.end(), s) != stages.end(); }
};

inline const std::vector<std::string>& known_sources() {
  static const std::vector<std::string> s = {"bandpower", "coherence", "mean", "std", "entropy", "fft"};
  return s;
}

/// Stage that must run for a feature source to exist; nullopt when the epoch data suffices.
inline std::optional<Stage> source_stage(const std::string& source) {
  if (source == "bandpower") return Stage::bandpower;
  if (source == "coherence") return Stage::coherence;
  return std::nullopt;
}

namespace detail {

// Reads an object's keys one at a time and rejects any key left unread.
class Reader {
 public:
  Reader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError("config: '" + where_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config: '" + path(key) + "' has the wrong type (" + e.what() + ")");
    }
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    T v{};
    get(key, v);
    out = v;
  }

  const nlohmann::json* sub(const char* key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  std::string path(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw ConfigError("config: unknown key '" + (where_.empty() ? k : where_ + "." + k) + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> used_;
};

inline std::vector<BandSpec> parse_bands(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("config: 'bands' must be a non-empty array");
  std::vector<BandSpec> out;
  for (const auto& b : j) {
    Reader r(b, "bands[]");
    BandSpec s;
    r.get("name", s.name);
    r.get("lo", s.lo);
    r.get("hi", s.hi);
    r.finish();
    out.push_back(s);
  }
  return out;
}

inline void parse_group(const nlohmann::json& j, const std::string& where, synth::GroupEffect& g) {
  Reader r(j, where);
  r.get("band_multipliers", g.band_multipliers);
  r.get("right_lambda", g.right_lambda);
  r.finish();
}

inline synth::CohortSpec parse_synth(const nlohmann::json& j) {
  synth::CohortSpec spec;
  Reader r(j, "synth");
  r.get("n_asd", spec.n_asd);
  r.get("n_td", spec.n_td);
  r.get("fs", spec.fs);
  r.get("duration_s", spec.duration_s);
  r.get("baseline_s", spec.baseline_s);
  if (const auto* ch = r.sub("channels")) {
    if (ch->is_string()) {
      const auto name = ch->get<std::string>();
      if (name == "homan")
        spec.channels = ElectrodeSet::homan().names;
      else if (name == "montage32")
        spec.channels = standard_montage_32();
      else
        throw ConfigError("config: 'synth.channels' must be 'homan', 'montage32' or a list of labels");
    } else {
      try {
        spec.channels = ch->get<std::vector<std::string>>();
      } catch (const nlohmann::json::exception&) {
        throw ConfigError("config: 'synth.channels' must be 'homan', 'montage32' or a list of labels");
      }
    }
  }
  r.get("base_powers", spec.base_powers);
  if (const auto* g = r.sub("asd")) parse_group(*g, "synth.asd", spec.asd);
  if (const auto* g = r.sub("td")) parse_group(*g, "synth.td", spec.td);
  r.get("left_lambda", spec.left_lambda);
  r.get("lambda_jitter", spec.lambda_jitter);
  r.get("power_jitter", spec.power_jitter);
  if (const auto* a = r.sub("ados")) {
    Reader ar(*a, "synth.ados");
    ar.get("intercept", spec.ados.intercept);
    ar.get("slope", spec.ados.slope);
    ar.get("sigma", spec.ados.sigma);
    ar.finish();
  }
  r.finish();
  return spec;
}

inline void check_cv(const std::string& where, const std::string& cv, std::size_t folds) {
  if (cv != "loocv" && cv != "kfold") throw ConfigError("config: '" + where + ".cv' must be 'loocv' or 'kfold'");
  if (cv == "kfold" && folds < 2) throw ConfigError("config: '" + where + ".folds' must be >= 2");
}

}  // namespace detail

/// Parses a config document. Unknown keys and wrongly typed values are errors.
inline Config config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = ".") {
  Config c;
  c.base_dir = base_dir;
  detail::Reader r(j, "");
  r.get("seed", c.seed);
  if (const auto* s = r.sub("synth")) c.synth = detail::parse_synth(*s);
  r.get("inputs", c.inputs);
  std::vector<std::string> stages;
  r.get("stages", stages);
  for (const auto& s : stages) {
    try {
      c.stages.push_back(parse_stage(s));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (const auto* e = r.sub("epoch")) {
    detail::Reader er(*e, "epoch");
    er.get("name", c.epoch.name);
    std::string mode = "literal";
    er.get("mode", mode);
    if (mode == "literal")
      c.epoch.mode = EpochMode::literal;
    else if (mode == "middle_third")
      c.epoch.mode = EpochMode::middle_third;
    else
      throw ConfigError("config: 'epoch.mode' must be 'literal' or 'middle_third'");
    er.get("slice_s", c.epoch.slice_s);
    er.get("baseline", c.epoch.baseline);
    er.finish();
  }
  r.get("electrode_set", c.electrode_set);
  if (const auto* b = r.sub("bands")) c.bands = detail::parse_bands(*b);
  if (const auto* f = r.sub("filters")) {
    detail::Reader fr(*f, "filters");
    fr.get("highpass_hz", c.filters.highpass_hz);
    fr.get("line_hz", c.filters.line_hz);
    fr.get("order", c.filters.order);
    fr.finish();
  }
  if (const auto* b = r.sub("bandpower")) {
    detail::Reader br(*b, "bandpower");
    br.get("window_s", c.bandpower.window_s);
    br.get("step_s", c.bandpower.step_s);
    br.finish();
  }
  if (const auto* w = r.sub("wavelet")) {
    detail::Reader wr(*w, "wavelet");
    wr.get("scales", c.wavelet.scales);
    wr.get("columns", c.wavelet.columns);
    wr.get("reference", c.wavelet.reference);
    wr.get("electrodes", c.wavelet.electrodes);
    wr.get("center_hz", c.wavelet.morlet.center_hz);
    wr.get("bandwidth", c.wavelet.morlet.bandwidth);
    wr.finish();
  }
  if (const auto* h = r.sub("coherence")) {
    detail::Reader hr(*h, "coherence");
    hr.get("segment_s", c.coherence.segment_s);
    hr.get("overlap", c.coherence.overlap);
    hr.finish();
  }
  if (const auto* f = r.sub("features")) {
    detail::Reader fr(*f, "features");
    fr.get("sources", c.features.sources);
    fr.get("normalize", c.features.normalize);
    fr.get("entropy_bins", c.features.entropy_bins);
    fr.finish();
  }
  if (const auto* t = r.sub("train")) {
    detail::Reader tr(*t, "train");
    tr.get("classifiers", c.train.classifiers);
    tr.get("cv", c.train.cv);
    tr.get("folds", c.train.folds);
    tr.get("standardize", c.train.standardize);
    tr.get("knn_k", c.train.knn_k);
    tr.get("pca_variance", c.train.pca_variance);
    if (const auto* l = tr.sub("logistic")) {
      detail::Reader lr(*l, "train.logistic");
      lr.get("l2", c.train.logistic.l2);
      lr.get("learning_rate", c.train.logistic.learning_rate);
      lr.get("max_iter", c.train.logistic.max_iter);
      lr.get("tol", c.train.logistic.tol);
      lr.finish();
    }
    tr.finish();
  }
  if (const auto* e = r.sub("eval")) {
    detail::Reader er(*e, "eval");
    er.get("features", c.eval.features);
    er.get("cv", c.eval.cv);
    er.get("folds", c.eval.folds);
    er.finish();
  }
  r.finish();
  if (c.synth) c.synth->bands = c.bands;
  return c;
}

inline Config load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON (" + e.what() + ")");
  }
  return config_from_json(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

/// Stages in execution order plus the feature sources the features stage will assemble.
struct Plan {
  std::vector<Stage> stages;
  std::vector<std::string> sources;

  std::vector<std::string> describe(const Config& c) const {
    std::vector<std::string> out;
    std::size_t k = 1;
    for (auto s : stages) {
      std::string line = std::to_string(k++) + ". " + stage_name(s);
      switch (s) {
        case Stage::synth:
          line += ": " + std::to_string(c.synth->n_asd) + " ASD + " + std::to_string(c.synth->n_td) + " TD subjects";
          break;
        case Stage::features: {
          line += ":";
          for (const auto& src : sources) line += " " + src;
          break;
        }
        case Stage::train: {
          line += ": " + c.train.cv;
          for (const auto& name : c.train.classifiers) line += " " + name;
          break;
        }
        case Stage::eval: line += ": linear regression of ADOS-2 on " + std::to_string(c.eval.features.size()) + " features"; break;
        default: break;
      }
      out.push_back(line);
    }
    return out;
  }
};

/// Static checks: stage dependencies, data source, parameter ranges and input paths.
inline Plan make_plan(const Config& c) {
  Plan plan;
  if (c.stages.empty()) throw ConfigError("config: no stages requested");
  for (auto s : kStageOrder) {
    const auto n = std::count(c.stages.begin(), c.stages.end(), s);
    if (n > 1) throw ConfigError(std::string("config: stage '") + stage_name(s) + "' listed twice");
    if (n == 1) plan.stages.push_back(s);
  }
  auto need = [&](Stage s, Stage dep) {
    if (c.has(s) && !c.has(dep))
      throw ConfigError(std::string("config: stage '") + stage_name(s) + "' requires stage '" + stage_name(dep) +
                        "', which is not in the plan");
  };
  need(Stage::train, Stage::features);
  need(Stage::eval, Stage::features);

  const bool needs_data = std::any_of(plan.stages.begin(), plan.stages.end(), [](Stage s) { return s != Stage::synth; });
  if (c.has(Stage::synth)) {
    if (!c.synth) throw ConfigError("config: stage 'synth' requires a 'synth' section");
    if (!c.inputs.empty()) throw ConfigError("config: give either 'inputs' or the synth stage, not both");
    try {
      c.synth->check();
    } catch (const Error& e) {
      throw ConfigError(std::string("config: synth: ") + e.what());
    }
  } else if (needs_data && c.inputs.empty()) {
    throw ConfigError("config: no data source; list 'inputs' or add the synth stage");
  }
  for (const auto& in : c.inputs)
    if (!std::filesystem::exists(c.base_dir / in)) throw ConfigError("config: input '" + in + "' does not exist");

  if (c.electrode_set != "homan" && c.electrode_set != "all")
    throw ConfigError("config: 'electrode_set' must be 'homan' or 'all'");
  for (const auto& b : c.bands)
    if (b.name.empty() || !(b.lo >= 0.0) || !(b.lo < b.hi)) throw ConfigError("config: band '" + b.name + "' is invalid");
  if (!(c.epoch.slice_s > 0.0)) throw ConfigError("config: 'epoch.slice_s' must be positive");
  if (!(c.filters.highpass_hz > 0.0)) throw ConfigError("config: 'filters.highpass_hz' must be positive");
  if (c.filters.line_hz && !(*c.filters.line_hz > 1.0)) throw ConfigError("config: 'filters.line_hz' must exceed 1 Hz");
  if (c.filters.order < 1 || c.filters.order > 10) throw ConfigError("config: 'filters.order' must be in [1, 10]");
  if (!(c.bandpower.window_s > 0.0) || !(c.bandpower.step_s > 0.0))
    throw ConfigError("config: bandpower window and step must be positive");
  if (c.wavelet.scales < 1 || c.wavelet.columns < 1) throw ConfigError("config: wavelet scales and columns must be >= 1");
  if (!(c.wavelet.morlet.center_hz > 0.0) || !(c.wavelet.morlet.bandwidth > 0.0))
    throw ConfigError("config: wavelet center_hz and bandwidth must be positive");
  if (!(c.coherence.segment_s > 0.0) || !(c.coherence.overlap >= 0.0) || !(c.coherence.overlap < 1.0))
    throw ConfigError("config: coherence segment_s must be positive and overlap in [0, 1)");
  if (c.features.entropy_bins < 2) throw ConfigError("config: 'features.entropy_bins' must be >= 2");

  if (c.has(Stage::features)) {
    if (c.features.sources.empty()) {
      for (const auto& s : known_sources())
        if (auto st = source_stage(s); st && c.has(*st)) plan.sources.push_back(s);
      if (plan.sources.empty()) plan.sources = {"mean", "std", "entropy"};
    } else {
      for (const auto& s : c.features.sources) {
        if (std::find(known_sources().begin(), known_sources().end(), s) == known_sources().end())
          throw ConfigError("config: unknown feature source '" + s + "'");
        if (std::count(c.features.sources.begin(), c.features.sources.end(), s) > 1)
          throw ConfigError("config: feature source '" + s + "' listed twice");
        if (auto st = source_stage(s); st && !c.has(*st))
          throw ConfigError("config: feature source '" + s + "' requires stage '" + stage_name(*st) +
                            "', which is not in the plan");
        plan.sources.push_back(s);
      }
    }
  }
  if (c.has(Stage::train)) {
    if (c.train.classifiers.empty()) throw ConfigError("config: 'train.classifiers' is empty");
    for (const auto& name : c.train.classifiers) {
      if (name != "gnb" && name != "logistic" && name != "knn")
        throw ConfigError("config: unknown classifier '" + name + "' (expected gnb, logistic or knn)");
      if (std::count(c.train.classifiers.begin(), c.train.classifiers.end(), name) > 1)
        throw ConfigError("config: classifier '" + name + "' listed twice");
    }
    detail::check_cv("train", c.train.cv, c.train.folds);
    if (c.train.knn_k < 1) throw ConfigError("config: 'train.knn_k' must be >= 1");
    if (c.train.pca_variance && !(*c.train.pca_variance > 0.0 && *c.train.pca_variance <= 1.0))
      throw ConfigError("config: 'train.pca_variance' must be in (0, 1]");
  }
  if (c.has(Stage::eval)) {
    if (c.eval.features.empty()) throw ConfigError("config: 'eval.features' is empty");
    detail::check_cv("eval", c.eval.cv, c.eval.folds);
  }
  return plan;
}

}  // namespace eegkit::pipeline
