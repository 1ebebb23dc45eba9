#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "eegkit/bandpower.hpp"
#include "eegkit/coherence.hpp"
#include "eegkit/error.hpp"
#include "eegkit/features.hpp"
#include "eegkit/filters.hpp"
#include "eegkit/io.hpp"
#include "eegkit/ml/classifiers.hpp"
#include "eegkit/ml/metrics.hpp"
#include "eegkit/ml/pca.hpp"
#include "eegkit/ml/regression.hpp"
#include "eegkit/ml/serialize.hpp"
#include "eegkit/ml/validation.hpp"
#include "eegkit/pipeline/config.hpp"
#include "eegkit/pipeline/parallel.hpp"
#include "eegkit/recording.hpp"
#include "eegkit/synth.hpp"
#include "eegkit/wavelet.hpp"

namespace eegkit::pipeline {

/// A stage failed while executing. The message starts with the stage name.
class StageError : public Error {
 public:
  StageError(Stage s, const std::string& what) : Error(std::string(stage_name(s)) + ": " + what), stage_(s) {}
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

struct RunOptions {
  std::size_t jobs = 1;
  bool dry_run = false;
  std::ostream* log = nullptr;
};

struct RunResult {
  std::vector<std::string> plan;
  nlohmann::json summary;  // null for dry runs
};

// Sub-seed streams derived from the top-level seed.
inline constexpr std::uint64_t kSynthStream = 1;
inline constexpr std::uint64_t kTrainStream = 2;
inline constexpr std::uint64_t kEvalStream = 3;

/// Top-level entries a run owns inside its output directory.
inline const std::vector<std::string>& run_entries() {
  static const std::vector<std::string> e = {"recordings", "preprocess", "bandpower", "wavelet", "coherence",
                                             "features",   "train",      "eval",      "summary.json"};
  return e;
}

inline std::string classifier_title(const std::string& name) {
  if (name == "gnb") return "NaiveBayes";
  if (name == "logistic") return "Logistic";
  if (name == "knn") return "KNN";
  return name;
}

namespace detail {

namespace fs = std::filesystem;

struct Subject {
  Recording task;
  std::optional<Recording> baseline;
};

struct Context {
  const Config& cfg;
  Plan plan;
  fs::path out;
  std::size_t jobs = 1;
  std::ostream* log = nullptr;

  std::vector<Recording> raw;
  std::vector<Subject> subjects;
  std::vector<std::vector<PowerMatrix>> power;
  std::vector<CoherenceReport> coherence;
  std::optional<FeatureTable> features;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> warnings;

  void write(const fs::path& rel, std::string_view content) const { io::write_file_atomic(out / rel, content); }
  void note(const std::string& msg) const {
    if (log) *log << msg << '\n';
  }
  void warn(std::string msg) {
    note("warning: " + msg);
    warnings.push_back(std::move(msg));
  }
  const std::string& sid(std::size_t i) const { return subjects[i].task.subject_id; }
};

inline void check_subject_ids(const std::vector<Recording>& recs) {
  std::set<std::string> seen;
  for (const auto& r : recs) {
    if (r.subject_id.empty() || r.subject_id.find_first_of("/\\") != std::string::npos)
      throw Error("invalid subject id '" + r.subject_id + "'");
    if (!seen.insert(r.subject_id).second) throw Error("duplicate subject id '" + r.subject_id + "'");
  }
}

inline void load_data(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.has(Stage::synth)) {
    auto spec = *cfg.synth;
    spec.seed = synth::mix_seed(cfg.seed, kSynthStream);
    ctx.raw.resize(spec.n_asd + spec.n_td);
    parallel_for(ctx.raw.size(), ctx.jobs, [&](std::size_t i) { ctx.raw[i] = synth::gen_subject(spec, i); });
    synth::write_cohort(ctx.raw, ctx.out / "recordings");
    ctx.results["synth"] = {{"subjects", ctx.raw.size()}, {"asd", spec.n_asd}, {"td", spec.n_td}};
    return;
  }
  ctx.raw.resize(cfg.inputs.size());
  parallel_for(ctx.raw.size(), ctx.jobs, [&](std::size_t i) { ctx.raw[i] = load_recording(cfg.base_dir / cfg.inputs[i]); });
  check_subject_ids(ctx.raw);
}

inline void preprocess(Context& ctx) {
  const auto& f = ctx.cfg.filters;
  std::vector<std::string> rows(ctx.raw.size());
  parallel_for(ctx.raw.size(), ctx.jobs, [&](std::size_t i) {
    auto& rec = ctx.raw[i];
    const auto report = validate(rec);
    std::string notes;
    for (const auto& finding : report.findings) {
      if (finding.kind == Finding::Kind::non_finite)
        throw Error("subject '" + rec.subject_id + "': " + finding.message);
      notes += (notes.empty() ? "" : "; ") + finding.message;
    }
    const auto hp = design_butterworth(FilterKind::highpass, {f.highpass_hz}, f.order, rec.fs);
    for (auto& ch : rec.data) {
      ch = apply_zero_phase(hp, ch);
      if (f.line_hz) ch = remove_line_noise(ch, rec.fs, *f.line_hz, f.order);
    }
    rows[i] = rec.subject_id + "," + io::format_double(rec.fs) + "," + std::to_string(rec.channels()) + "," +
              std::to_string(rec.samples()) + "," + std::to_string(report.findings.size()) + ",\"" + notes + "\"\n";
  });
  std::string csv = "subject_id,fs_hz,channels,samples,findings,notes\n";
  for (const auto& r : rows) csv += r;
  ctx.write("preprocess/report.csv", csv);
}

// Cuts the analysis epoch (and the baseline epoch when present) and applies the electrode set.
inline void prepare_subjects(Context& ctx) {
  const auto& cfg = ctx.cfg;
  ctx.subjects.resize(ctx.raw.size());
  parallel_for(ctx.raw.size(), ctx.jobs, [&](std::size_t i) {
    const auto& rec = ctx.raw[i];
    Subject s;
    s.task = extract_epoch(rec, cfg.epoch.name, cfg.epoch.mode, cfg.epoch.slice_s);
    if (rec.find_epoch(cfg.epoch.baseline) && cfg.epoch.baseline != cfg.epoch.name)
      s.baseline = extract_epoch(rec, cfg.epoch.baseline);
    if (cfg.electrode_set == "homan") {
      s.task = select_channels(s.task, ElectrodeSet::homan());
      if (s.baseline) s.baseline = select_channels(*s.baseline, ElectrodeSet::homan());
    }
    ctx.subjects[i] = std::move(s);
  });
  ctx.raw.clear();
  ctx.raw.shrink_to_fit();
}

inline void bandpower(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto n = ctx.subjects.size();
  ctx.power.assign(n, {});
  std::vector<std::vector<std::string>> warn(n);
  parallel_for(n, ctx.jobs, [&](std::size_t i) {
    const auto& task = ctx.subjects[i].task;
    for (const auto& b : cfg.bands) {
      bool clipped = false;
      const auto applied = fit_band(b, task.fs, &clipped);
      if (clipped)
        warn[i].push_back(ctx.sid(i) + ": band '" + b.name + "' upper edge clipped to " + io::format_double(applied.hi) +
                          " Hz");
    }
    ctx.power[i] = power_matrices(task, cfg.bands, cfg.bandpower.window_s, cfg.bandpower.step_s, cfg.filters.order);
    for (const auto& m : ctx.power[i]) ctx.write(fs::path("bandpower") / ctx.sid(i) / (m.electrode + ".csv"), to_csv(m));
    ctx.write(fs::path("bandpower") / (ctx.sid(i) + "_short_term.csv"),
              to_csv(short_term_samples(ctx.power[i], ElectrodeSet{task.labels}, ctx.sid(i))));
  });
  for (const auto& w : warn)
    for (const auto& m : w) ctx.warn(m);
  ctx.results["bandpower"] = {{"windows", ctx.power.empty() || ctx.power[0].empty() ? 0 : ctx.power[0][0].windows()}};
}

inline void wavelet(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto n = ctx.subjects.size();
  std::vector<std::string> rows(n);
  std::vector<char> unreferenced(n, 0);  // not vector<bool>: written from several threads
  parallel_for(n, ctx.jobs, [&](std::size_t i) {
    const auto& subj = ctx.subjects[i];
    const auto& task = subj.task;
    const auto electrodes = cfg.wavelet.electrodes.empty() ? task.labels : cfg.wavelet.electrodes;
    const auto scales = scale_grid(task.fs, cfg.wavelet.scales);
    for (const auto& e : electrodes) {
      auto sg = cwt(task.channel(e), task.fs, scales, cfg.wavelet.morlet, e);
      const auto dom = dominant_scale(sg);
      rows[i] += ctx.sid(i) + "," + e + "," + io::format_double(sg.scales[dom]) + "," +
                 io::format_double(scale_to_freq(sg.scales[dom], task.fs, cfg.wavelet.morlet)) + "\n";
      if (cfg.wavelet.reference) {
        if (subj.baseline)
          sg = baseline_reference(sg, cwt(subj.baseline->channel(e), task.fs, scales, cfg.wavelet.morlet, e));
        else
          unreferenced[i] = 1;
      }
      const auto cols = std::min<std::size_t>(cfg.wavelet.columns, static_cast<std::size_t>(sg.values.cols()));
      export_image(downsample_max(sg, cols), ctx.out / "wavelet" / ctx.sid(i) / (e + ".pgm"));
    }
  });
  std::string csv = "subject_id,electrode,dominant_scale,dominant_hz\n";
  for (std::size_t i = 0; i < n; ++i) {
    csv += rows[i];
    if (unreferenced[i]) ctx.warn(ctx.sid(i) + ": no '" + cfg.epoch.baseline + "' epoch, scalograms left unreferenced");
  }
  ctx.write("wavelet/dominant.csv", csv);
}

inline void coherence(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto n = ctx.subjects.size();
  ctx.coherence.assign(n, {});
  parallel_for(n, ctx.jobs, [&](std::size_t i) {
    ctx.coherence[i] = hemispheric_scores(ctx.subjects[i].task, Montage::social_brain(), cfg.bands, cfg.coherence);
    ctx.write(fs::path("coherence") / (ctx.sid(i) + ".csv"), to_csv(ctx.coherence[i]));
  });
  std::string csv = "subject_id,label,ados2,left_mean,right_mean";
  for (const auto* side : {"left", "right"})
    for (const auto& b : cfg.bands) csv += std::string(",") + side + "_" + b.name;
  csv += '\n';
  double left = 0.0, right = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = ctx.subjects[i].task;
    const auto& r = ctx.coherence[i];
    csv += t.subject_id + "," + (t.diagnosis ? std::string(to_string(*t.diagnosis)) : "") + "," +
           (t.ados2_score ? std::to_string(*t.ados2_score) : "") + "," + io::format_double(r.left_mean) + "," +
           io::format_double(r.right_mean);
    for (double v : r.left_band_means) csv += "," + io::format_double(v);
    for (double v : r.right_band_means) csv += "," + io::format_double(v);
    csv += '\n';
    left += r.left_mean;
    right += r.right_mean;
  }
  ctx.write("coherence/summary.csv", csv);
  ctx.results["coherence"] = {{"left_mean", left / static_cast<double>(n)}, {"right_mean", right / static_cast<double>(n)}};
}

inline std::vector<std::string> band_columns(const std::string& prefix, const std::vector<std::string>& labels,
                                             const std::vector<BandSpec>& bands) {
  std::vector<std::string> out;
  for (const auto& l : labels)
    for (const auto& b : bands) out.push_back(prefix + "_" + l + "_" + b.name);
  return out;
}

inline void features(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto n = ctx.subjects.size();
  const auto& labels = ctx.subjects.front().task.labels;
  for (std::size_t i = 1; i < n; ++i)
    if (ctx.subjects[i].task.labels != labels)
      throw Error("subject '" + ctx.sid(i) + "' has a different electrode list than '" + ctx.sid(0) + "'");

  std::vector<FeatureSource> sources;
  for (const auto& s : ctx.plan.sources) {
    if (s == "bandpower") sources.push_back({s, band_columns("pow", labels, cfg.bands)});
    if (s == "coherence") {
      std::vector<std::string> cols = {"coh_left", "coh_right"};
      for (const auto* side : {"left", "right"})
        for (const auto& b : cfg.bands) cols.push_back(std::string("coh_") + side + "_" + b.name);
      sources.push_back({s, cols});
    }
    if (s == "mean" || s == "std" || s == "entropy") sources.push_back({s, per_channel_columns(s, labels)});
    if (s == "fft") sources.push_back({s, band_columns("fft", labels, cfg.bands)});
  }

  std::vector<SubjectFeatures> subj(n);
  parallel_for(n, ctx.jobs, [&](std::size_t i) {
    const auto& task = ctx.subjects[i].task;
    auto& sf = subj[i];
    sf.subject_id = task.subject_id;
    sf.label = task.diagnosis;
    sf.score = task.ados2_score;
    for (const auto& s : ctx.plan.sources) {
      auto& v = sf.sources[s];
      if (s == "bandpower") {
        for (const auto& m : ctx.power[i])
          for (Eigen::Index b = 0; b < m.values.rows(); ++b) v.push_back(m.values.row(b).mean());
      } else if (s == "coherence") {
        const auto& r = ctx.coherence[i];
        v = {r.left_mean, r.right_mean};
        v.insert(v.end(), r.left_band_means.begin(), r.left_band_means.end());
        v.insert(v.end(), r.right_band_means.begin(), r.right_band_means.end());
      } else if (s == "mean") {
        v = channel_means(task);
      } else if (s == "std") {
        v = channel_stds(task);
      } else if (s == "entropy") {
        for (const auto& ch : task.data) v.push_back(shannon_entropy(ch, cfg.features.entropy_bins));
      } else if (s == "fft") {
        for (const auto& ch : task.data) {
          const auto f = fft_band_features(ch, task.fs, cfg.bands);
          v.insert(v.end(), f.begin(), f.end());
        }
      }
    }
  });
  auto assembled = assemble(subj, sources, cfg.features.normalize);
  ctx.write("features/features.csv", to_csv(assembled.table));
  if (assembled.normalization)
    ctx.write("features/normalization.json", ml::to_json(*assembled.normalization).dump(2) + "\n");
  ctx.results["features"] = {{"rows", assembled.table.size()}, {"columns", assembled.table.width()}};
  ctx.features = std::move(assembled.table);
}

// Fits PCA on the training rows of each fold, then the inner classifier on the projected rows.
inline ml::ClassifierFitter with_pca(ml::ClassifierFitter inner, double variance) {
  return [inner = std::move(inner), variance](const Eigen::MatrixXd& X, std::span<const int> y) -> ml::Predictor {
    auto pca = std::make_shared<ml::PcaModel>(ml::pca_fit(X, ml::PcaSelection::variance(variance)));
    ml::Predictor p = inner(ml::pca_transform(*pca, X), y);
    return [pca, p = std::move(p)](const Eigen::RowVectorXd& r) { return p(ml::pca_transform(*pca, r).row(0)); };
  };
}

inline ml::CvScheme scheme_of(const std::string& cv, std::size_t folds) {
  return cv == "loocv" ? ml::CvScheme::loocv() : ml::CvScheme::kfold(folds);
}

inline void train(Context& ctx) {
  const auto& tc = ctx.cfg.train;
  const auto& t = *ctx.features;
  const auto y = t.binary_labels();
  if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0)
    throw Error("training needs both ASD and TD subjects");

  std::vector<std::pair<std::string, ml::Metrics>> rows;
  std::vector<std::vector<int>> preds;
  for (const auto& name : tc.classifiers) {
    ml::ClassifierFitter fitter = name == "gnb"        ? ml::gnb_fitter()
                                  : name == "logistic" ? ml::logistic_fitter(tc.logistic)
                                                       : ml::knn_fitter(tc.knn_k);
    if (tc.pca_variance) fitter = with_pca(fitter, *tc.pca_variance);
    if (tc.standardize) fitter = ml::standardized(fitter);
    const auto cv = ml::cross_validate(t.rows, y, fitter, scheme_of(tc.cv, tc.folds),
                                       synth::mix_seed(ctx.cfg.seed, kTrainStream));
    for (const auto& w : cv.folds.warnings) ctx.warn(name + ": " + w);
    rows.emplace_back(classifier_title(name), cv.metrics);
    preds.push_back(cv.predictions);
    const auto& m = cv.metrics;
    ctx.results["train"][name] = {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
                                  {"f1", m.f1},             {"tp", m.tp()},             {"fp", m.fp()},
                                  {"fn", m.fn()},           {"tn", m.tn()}};

    // Final model on every row, stored with the transforms it expects.
    nlohmann::json doc = {{"classifier", name}, {"features", t.feature_names}};
    Eigen::MatrixXd X = t.rows;
    if (tc.standardize) {
      const auto z = ZScore::fit(X);
      X = z.apply(X);
      doc["zscore"] = ml::to_json(z);
    }
    if (tc.pca_variance) {
      const auto p = ml::pca_fit(X, ml::PcaSelection::variance(*tc.pca_variance));
      X = ml::pca_transform(p, X);
      doc["pca"] = ml::to_json(p);
    }
    if (name == "gnb")
      doc["model"] = ml::to_json(ml::gnb_fit(X, y));
    else if (name == "logistic")
      doc["model"] = ml::to_json(ml::logistic_fit(X, y, tc.logistic));
    else
      doc["model"] = ml::to_json(ml::knn_fit(X, y, std::min<std::size_t>(tc.knn_k, t.size())));
    ctx.write(fs::path("train") / (name + ".json"), doc.dump(2) + "\n");
  }
  ctx.write("train/metrics.csv", ml::metrics_csv(rows));
  std::string csv = "subject_id,label";
  for (const auto& name : tc.classifiers) csv += "," + name;
  csv += '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    csv += t.subject_ids[i] + "," + std::string(to_string((*t.labels)[i]));
    for (const auto& p : preds) csv += "," + std::string(p[i] == 1 ? "ASD" : "TD");
    csv += '\n';
  }
  ctx.write("train/predictions.csv", csv);
}

inline void eval(Context& ctx) {
  const auto& ec = ctx.cfg.eval;
  const auto& full = *ctx.features;
  if (!full.scores) throw Error("feature table has no ADOS-2 scores");
  const auto t = full.select(ec.features);
  std::vector<double> y(t.scores->begin(), t.scores->end());
  const auto cv = ml::cross_validate(t.rows, std::span<const double>(y), ml::linreg_fitter(),
                                     scheme_of(ec.cv, ec.folds), synth::mix_seed(ctx.cfg.seed, kEvalStream));
  const auto model = ml::linreg_fit(t.rows, y);
  ctx.write("eval/regression.csv", ml::regression_csv({{"Linear Regression", cv.metrics}}));
  ctx.write("eval/model.json",
            nlohmann::json{{"features", ec.features}, {"model", ml::to_json(model)}}.dump(2) + "\n");
  std::string csv = "subject_id,ados2,predicted\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    csv += t.subject_ids[i] + "," + std::to_string((*t.scores)[i]) + "," + io::format_double(cv.predictions[i]) + "\n";
  ctx.write("eval/predictions.csv", csv);
  nlohmann::json coef = nlohmann::json::object();
  for (std::size_t j = 0; j < ec.features.size(); ++j) coef[ec.features[j]] = model.coefficients(static_cast<Eigen::Index>(j));
  ctx.results["eval"] = {{"r2", cv.metrics.r2},          {"mae", cv.metrics.mae},     {"rmse", cv.metrics.rmse},
                         {"coefficients", coef},         {"intercept", model.intercept}, {"rows", t.size()}};
}

inline void clear_run(const fs::path& out) {
  for (const auto& e : run_entries()) fs::remove_all(out / e);
  fs::remove_all(out / "failed");
}

// Moves whatever the run produced under failed/ next to a note naming the stage.
inline void mark_failed(const fs::path& out, Stage stage, const std::string& what) {
  const auto dir = out / "failed";
  fs::create_directories(dir);
  for (const auto& e : run_entries())
    if (fs::exists(out / e)) fs::rename(out / e, dir / e);
  io::write_file_atomic(dir / "error.txt", std::string("stage: ") + stage_name(stage) + "\nerror: " + what + "\n");
}

/// Every regular file under `out` except the summary, as sorted relative paths with digests.
inline nlohmann::json file_manifest(const fs::path& out) {
  std::vector<std::string> paths;
  for (const auto& e : run_entries()) {
    const auto p = out / e;
    if (!fs::exists(p) || e == "summary.json") continue;
    if (fs::is_regular_file(p)) paths.push_back(e);
    else
      for (const auto& f : fs::recursive_directory_iterator(p))
        if (f.is_regular_file()) paths.push_back(fs::relative(f.path(), out).generic_string());
  }
  std::sort(paths.begin(), paths.end());
  nlohmann::json files = nlohmann::json::array();
  for (const auto& p : paths) {
    const auto content = io::read_file(out / p);
    files.push_back({{"path", p}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  }
  return files;
}

}  // namespace detail

/// Validates the config, then executes its stages in order inside `out`.
/// Throws ConfigError before touching anything, or StageError after moving partial outputs to `out/failed`.
inline RunResult run(const Config& cfg, const std::filesystem::path& out, const RunOptions& opt = {}) {
  RunResult result;
  const auto plan = make_plan(cfg);
  result.plan = plan.describe(cfg);
  if (opt.log) {
    *opt.log << (opt.dry_run ? "plan (dry run):" : "plan:") << '\n';
    for (const auto& line : result.plan) *opt.log << "  " << line << '\n';
  }
  if (opt.dry_run) return result;

  detail::Context ctx{cfg, plan, out, std::max<std::size_t>(opt.jobs, 1), opt.log};
  std::filesystem::create_directories(out);
  detail::clear_run(out);

  for (auto stage : plan.stages) {
    ctx.note(std::string("running ") + stage_name(stage));
    try {
      const bool analysis = stage != Stage::synth && stage != Stage::preprocess;
      if (ctx.raw.empty() && ctx.subjects.empty()) detail::load_data(ctx);
      if (analysis && ctx.subjects.empty()) detail::prepare_subjects(ctx);
      switch (stage) {
        case Stage::synth: break;
        case Stage::preprocess: detail::preprocess(ctx); break;
        case Stage::bandpower: detail::bandpower(ctx); break;
        case Stage::wavelet: detail::wavelet(ctx); break;
        case Stage::coherence: detail::coherence(ctx); break;
        case Stage::features: detail::features(ctx); break;
        case Stage::train: detail::train(ctx); break;
        case Stage::eval: detail::eval(ctx); break;
      }
    } catch (const std::exception& e) {
      detail::mark_failed(out, stage, e.what());
      throw StageError(stage, e.what());
    }
  }

  nlohmann::json stages = nlohmann::json::array();
  for (auto s : plan.stages) stages.push_back(stage_name(s));
  nlohmann::json subjects = nlohmann::json::array();
  for (const auto& s : ctx.subjects) subjects.push_back(s.task.subject_id);
  for (const auto& r : ctx.raw) subjects.push_back(r.subject_id);
  result.summary = {{"status", "ok"},
                    {"seed", cfg.seed},
                    {"stages", stages},
                    {"subjects", subjects},
                    {"warnings", ctx.warnings},
                    {"results", ctx.results},
                    {"files", detail::file_manifest(out)}};
  io::write_file_atomic(out / "summary.json", result.summary.dump(2) + "\n");
  return result;
}

}  // namespace eegkit::pipeline
