#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ser/dataset.hpp"
#include "ser/detail/text.hpp"
#include "ser/ensemble.hpp"
#include "ser/error.hpp"
#include "ser/functionals.hpp"
#include "ser/harness/corpus.hpp"
#include "ser/harness/metrics.hpp"
#include "ser/harness/split.hpp"
#include "ser/lld.hpp"
#include "ser/models/serialize.hpp"
#include "ser/selection.hpp"

namespace ser {

struct RunConfig {
  FrameConfig frame;
  SelectionConfig selection;
  std::size_t k = 10;
  double svm_c = 1.0;
  double svm_tol = 1e-3;
  double learning_rate = 0.05;
  std::size_t epochs = 500;
  std::size_t hidden = 10;
  double prune_fraction = 0.2;
  double train_fraction = 0.75;
  std::uint64_t seed = 0;

  // Frame parameters are validated per clip, against its sample rate.
  void validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
    if (!(train_fraction >= 0.5 && train_fraction <= 0.95)) fail("train fraction must lie in [0.5, 0.95]");
    if (selection.bins < 2) fail("bins must be at least 2");
    if (selection.target == 0) fail("target must be positive");
    if (k == 0) fail("k must be positive");
    if (!(svm_c > 0.0)) fail("C must be positive");
    if (!(svm_tol > 0.0)) fail("SVM tolerance must be positive");
    if (!(learning_rate > 0.0)) fail("learning rate must be positive");
    if (hidden == 0) fail("hidden layer must not be empty");
    if (!(prune_fraction >= 0.0 && prune_fraction < 1.0)) fail("prune fraction must lie in [0, 1)");
  }

  // Independent seeds for the split and each stochastic learner.
  std::uint64_t split_seed() const { return seed; }
  std::uint64_t tree_seed() const { return seed + 1; }
  std::uint64_t nn_seed() const { return seed + 2; }
};

struct ExtractionFailure {
  std::string id;
  std::string reason;
};

struct ExtractionResult {
  LabeledDataset dataset;
  std::vector<ExtractionFailure> failures;
};

inline FeatureVector extract_features(const AudioClip& clip, const FrameConfig& cfg, std::string id = {},
                                      std::optional<EmotionClass> label = std::nullopt) {
  return build_feature_vector(extract_lld(clip, cfg), id.empty() ? clip.source_id() : std::move(id), label);
}

// Loads and featurises every listed file, one worker per file. Utterances that
// are unreadable, too short or entirely unvoiced are reported and left out.
// Output order follows the listing regardless of the worker count.
inline ExtractionResult extract_corpus(const CorpusListing& listing, const FrameConfig& cfg, unsigned jobs = 1) {
  const std::size_t n = listing.entries.size();
  std::vector<std::optional<FeatureVector>> rows(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto& e = listing.entries[i];
      try {
        rows[i] = extract_features(load_wav(e.path), cfg, e.id, e.label);
      } catch (const Error& err) {
        errors[i] = err.what();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(work);
  }
  ExtractionResult out;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i]) out.dataset.rows.push_back(std::move(*rows[i]));
    else out.failures.push_back({listing.entries[i].id, errors[i]});
  }
  return out;
}

inline std::vector<EmotionClass> labels_of(const LabeledDataset& data) {
  std::vector<EmotionClass> out;
  out.reserve(data.size());
  for (const auto& r : data.rows) {
    if (!r.label) throw Error(ErrorCode::InvalidDataset, "row '" + r.source_id + "' is unlabelled");
    out.push_back(*r.label);
  }
  return out;
}

// Selection fitted on the training split only, or on all rows.
inline SelectedFeatureSet fit_selection(const LabeledDataset& data, const RunConfig& cfg, bool train_only) {
  if (!train_only) return select_features(data, cfg.selection);
  return select_features(stratified_split(data, cfg.train_fraction, cfg.split_seed()).first, cfg.selection);
}

inline TrainingSet make_training_set(const LabeledDataset& data, const SelectedFeatureSet& selection,
                                     const Standardizer* standardizer) {
  TrainingSet set;
  set.x.reserve(data.size());
  for (const auto& r : data.rows) {
    auto x = selection.project(r.values);
    set.x.push_back(standardizer ? standardizer->apply(x) : std::move(x));
    set.y.push_back(*r.label);
  }
  return set;
}

// Fits the standardiser and all four classifiers on `train`.
inline EnsembleModel train_ensemble(const LabeledDataset& train, const SelectedFeatureSet& selection,
                                    const RunConfig& cfg) {
  cfg.validate();
  train.validate();
  if (train.dimension() != kNumFeatures)
    throw Error(ErrorCode::FeatureMismatch, "training rows must carry 352 features");
  EnsembleModel m;
  m.selection = selection;
  m.standardizer = fit_standardizer(make_training_set(train, selection, nullptr).x);
  const auto set = make_training_set(train, selection, &m.standardizer);
  m.knn = train_knn(set, cfg.k);
  m.tree = train_tree(set, {cfg.prune_fraction, cfg.tree_seed()});
  m.nn = train_nn(set, {cfg.learning_rate, cfg.epochs, cfg.hidden, cfg.nn_seed()});
  m.svm = train_svm(set, {cfg.svm_c, cfg.svm_tol, 100000});
  return m;
}

struct EvaluationReport {
  std::array<ConfusionMatrix, kNumClassifiers> classifiers;
  ConfusionMatrix ensemble;
};

inline EvaluationReport evaluate_ensemble(const EnsembleModel& model, const LabeledDataset& test) {
  if (test.empty()) throw Error(ErrorCode::EmptyTestSet, "no test rows");
  model.check_consistent();
  EvaluationReport report;
  report.ensemble.has_no_decision = true;
  for (const auto& row : test.rows) {
    if (!row.label) throw Error(ErrorCode::InvalidDataset, "row '" + row.source_id + "' is unlabelled");
    const auto scores = model.classify(row);
    for (auto k : kAllClassifiers) {
      const auto i = static_cast<std::size_t>(k);
      report.classifiers[i].add(*row.label, scores[i].label);
    }
    report.ensemble.add(*row.label, decide(scores).outcome);
  }
  return report;
}

inline std::string format_report_text(const EvaluationReport& r) {
  static constexpr std::array<const char*, kNumClassifiers> titles = {
      "Result for KNN", "Result for DT", "Result for NN", "Result for SVM"};
  std::string out;
  for (auto k : kAllClassifiers) {
    out += format_confusion_table(r.classifiers[static_cast<std::size_t>(k)], titles[static_cast<std::size_t>(k)]);
    out += "\n";
  }
  out += format_confusion_table(r.ensemble, "Majority voting (confusion)");
  out += "\n";
  out += format_decision_table(r.ensemble, "Result for majority voting");
  return out;
}

// Long-form CSV: one count row and one percent row per (model, true class),
// then one summary row per model.
inline std::string format_report_csv(const EvaluationReport& r) {
  std::string out = "#version=1\nmodel,true_class,measure,angry,happy,neutral,sad,no_decision\n";
  auto emit = [&](std::string_view model, const ConfusionMatrix& m) {
    for (auto t : kAllClasses) {
      std::string counts = std::string(model) + "," + std::string(class_name(t)) + ",count";
      std::string pct = std::string(model) + "," + std::string(class_name(t)) + ",percent";
      for (std::size_t col = 0; col <= kNumClasses; ++col) {
        counts += "," + std::to_string(m.counts[class_index(t)][col]);
        pct += "," + detail::fixed2(m.percent(t, col));
      }
      out += counts + "\n" + pct + "\n";
    }
  };
  for (auto k : kAllClassifiers) emit(classifier_name(k), r.classifiers[static_cast<std::size_t>(k)]);
  emit("ensemble", r.ensemble);
  out += "#summary\nmodel,average_accuracy,overall_accuracy,cant_decide\n";
  for (auto k : kAllClassifiers) {
    const auto& m = r.classifiers[static_cast<std::size_t>(k)];
    out += std::string(classifier_name(k)) + "," + detail::fixed2(m.average_accuracy()) + "," +
           detail::fixed2(m.overall_accuracy()) + ",0.00\n";
  }
  out += "ensemble," + detail::fixed2(r.ensemble.average_accuracy()) + "," +
         detail::fixed2(r.ensemble.overall_accuracy()) + "," + detail::fixed2(r.ensemble.overall_cant_decide_rate()) +
         "\n";
  return out;
}

// Training provenance stored next to the models: the hyperparameters and the
// ids of the rows the models were fitted on.
struct RunManifest {
  RunConfig config;
  std::vector<std::string> train_ids;
};

inline std::string format_manifest(const RunManifest& m) {
  const auto& c = m.config;
  std::string out = "#version=1\n";
  out += "seed " + std::to_string(c.seed) + "\n";
  out += "train_frac " + detail::format_double(c.train_fraction) + "\n";
  out += "k " + std::to_string(c.k) + "\n";
  out += "c " + detail::format_double(c.svm_c) + "\n";
  out += "lr " + detail::format_double(c.learning_rate) + "\n";
  out += "epochs " + std::to_string(c.epochs) + "\n";
  out += "hidden " + std::to_string(c.hidden) + "\n";
  out += "prune_fraction " + detail::format_double(c.prune_fraction) + "\n";
  for (const auto& id : m.train_ids) out += "train " + id + "\n";
  return out;
}

inline RunManifest parse_manifest(std::string_view text) {
  const auto lines = detail::lines(text);
  if (lines.empty() || detail::trim(lines[0]) != "#version=1")
    throw Error(ErrorCode::MalformedFile, "manifest lacks #version=1 header");
  RunManifest m;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = detail::trim(lines[i]);
    const auto sp = line.find(' ');
    if (sp == std::string_view::npos) continue;
    const auto key = line.substr(0, sp);
    const auto value = line.substr(sp + 1);
    auto num = [&] {
      const auto v = detail::parse_double(value);
      if (!v) throw Error(ErrorCode::MalformedFile, "manifest line " + std::to_string(i + 1));
      return *v;
    };
    auto count = [&] {
      std::uint64_t v = 0;
      const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || end != value.data() + value.size())
        throw Error(ErrorCode::MalformedFile, "manifest line " + std::to_string(i + 1));
      return v;
    };
    if (key == "train") m.train_ids.emplace_back(value);
    else if (key == "seed") m.config.seed = count();
    else if (key == "train_frac") m.config.train_fraction = num();
    else if (key == "k") m.config.k = count();
    else if (key == "c") m.config.svm_c = num();
    else if (key == "lr") m.config.learning_rate = num();
    else if (key == "epochs") m.config.epochs = count();
    else if (key == "hidden") m.config.hidden = count();
    else if (key == "prune_fraction") m.config.prune_fraction = num();
  }
  return m;
}

// Model directory layout: selection.txt, standardizer.txt, knn.txt, tree.txt,
// nn.txt, svm.txt and run.txt (manifest).
inline void save_model_dir(const std::filesystem::path& dir, const EnsembleModel& m, const RunManifest& manifest) {
  std::filesystem::create_directories(dir);
  detail::write_file((dir / "selection.txt").string(), format_selection(m.selection));
  detail::write_file((dir / "standardizer.txt").string(), format_standardizer(m.standardizer));
  detail::write_file((dir / "knn.txt").string(), format_knn(m.knn));
  detail::write_file((dir / "tree.txt").string(), format_tree(m.tree));
  detail::write_file((dir / "nn.txt").string(), format_nn(m.nn));
  detail::write_file((dir / "svm.txt").string(), format_svm(m.svm));
  detail::write_file((dir / "run.txt").string(), format_manifest(manifest));
}

inline EnsembleModel load_model_dir(const std::filesystem::path& dir) {
  auto read = [&](const char* name) { return detail::read_file((dir / name).string()); };
  EnsembleModel m;
  m.selection = parse_selection(read("selection.txt"));
  m.standardizer = parse_standardizer(read("standardizer.txt"));
  m.knn = parse_knn(read("knn.txt"));
  m.tree = parse_tree(read("tree.txt"));
  m.nn = parse_nn(read("nn.txt"));
  m.svm = parse_svm(read("svm.txt"));
  m.check_consistent();
  return m;
}

inline RunManifest load_manifest(const std::filesystem::path& dir) {
  return parse_manifest(detail::read_file((dir / "run.txt").string()));
}

// Rows whose id is not among the manifest's training ids.
inline LabeledDataset held_out_rows(const LabeledDataset& data, const RunManifest& manifest) {
  const std::set<std::string> train(manifest.train_ids.begin(), manifest.train_ids.end());
  LabeledDataset out;
  for (const auto& r : data.rows)
    if (!train.contains(r.source_id)) out.rows.push_back(r);
  return out;
}

struct ExperimentResult {
  SelectedFeatureSet selection;
  EnsembleModel model;
  RunManifest manifest;
  EvaluationReport report;
};

// Split, select on training rows, train, and evaluate on the held-out rows.
inline ExperimentResult run_experiment(const LabeledDataset& data, const RunConfig& cfg) {
  cfg.validate();
  data.validate();
  auto [train, test] = stratified_split(data, cfg.train_fraction, cfg.split_seed());
  ExperimentResult r;
  r.selection = select_features(train, cfg.selection);
  r.model = train_ensemble(train, r.selection, cfg);
  r.manifest.config = cfg;
  for (const auto& row : train.rows) r.manifest.train_ids.push_back(row.source_id);
  r.report = evaluate_ensemble(r.model, test);
  return r;
}

}  // namespace ser
