// Command-line front end: extract, select, train, eval, predict, synth.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ser/ser.hpp"

namespace {

namespace fs = std::filesystem;

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

void add_frame_options(CLI::App* cmd, ser::FrameConfig& frame) {
  cmd->add_option("--frame-ms", frame.frame_ms, "Frame length in milliseconds")->capture_default_str();
  cmd->add_option("--hop-ms", frame.hop_ms, "Hop length in milliseconds")->capture_default_str();
  cmd->add_option("--voicing-threshold", frame.voicing_threshold, "ACF peak ratio above which a frame is voiced")
      ->capture_default_str();
}

void add_split_options(CLI::App* cmd, ser::RunConfig& cfg) {
  cmd->add_option("--seed", cfg.seed, "Seed for the split and the stochastic learners")->capture_default_str();
  cmd->add_option("--train-frac", cfg.train_fraction, "Per-class training fraction")->capture_default_str();
}

std::string class_summary(const ser::ClassCounts& counts) {
  std::string out;
  for (auto c : ser::kAllClasses) {
    if (!out.empty()) out += ", ";
    out += std::string(ser::class_name(c)) + " " + std::to_string(counts[ser::class_index(c)]);
  }
  return out;
}

int run_extract(const std::string& input, const std::string& layout, const std::string& out, unsigned jobs,
                const ser::FrameConfig& frame) {
  frame.validate(16000);
  const auto listing = layout == "berlin" ? ser::scan_berlin(input) : ser::scan_generic(input);
  for (const auto& [code, n] : listing.skipped_codes)
    warn("skipped " + std::to_string(n) + " file(s) with EMO-DB emotion code '" + std::string(1, code) + "'");
  for (const auto& name : listing.unrecognized) warn("could not label '" + name + "'");
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto result = ser::extract_corpus(listing, frame, jobs);
  for (const auto& f : result.failures) warn("rejected '" + f.id + "': " + f.reason);
  if (result.dataset.empty()) throw ser::Error(ser::ErrorCode::EmptyDataset, "no utterance could be featurised");
  ser::export_features(result.dataset, out);
  std::cout << "wrote " << result.dataset.size() << " rows (" << class_summary(result.dataset.class_counts())
            << ") to " << out << "\n";
  return 0;
}

int run_select(const std::string& features, const std::string& out, bool train_only, const ser::RunConfig& cfg) {
  cfg.validate();
  const auto data = ser::import_features(features);
  const auto sel = ser::fit_selection(data, cfg, train_only);
  if (sel.shortfall)
    warn("only " + std::to_string(sel.size()) + " features are ranked highly by both methods (target " +
         std::to_string(sel.target) + ")");
  ser::detail::write_file(out, ser::format_selection(sel));
  const auto& names = ser::feature_names();
  std::cout << "selected " << sel.size() << " of " << sel.fcbf_ranking.size() << " FCBF survivors"
            << (train_only ? " (training rows only)" : "") << ":\n";
  for (auto i : sel.indices)
    std::cout << "  " << names[i] << "  su=" << ser::detail::format_double(sel.su_scores.at(i))
              << "  fisher=" << ser::detail::format_double(sel.fisher_scores.at(i)) << "\n";
  return 0;
}

int run_train(const std::string& features, const std::string& selection, const std::string& out,
              const ser::RunConfig& cfg) {
  cfg.validate();
  const auto data = ser::import_features(features);
  const auto sel = ser::parse_selection(ser::detail::read_file(selection));
  auto [train, test] = ser::stratified_split(data, cfg.train_fraction, cfg.split_seed());
  const auto model = ser::train_ensemble(train, sel, cfg);
  ser::RunManifest manifest{cfg, {}};
  for (const auto& row : train.rows) manifest.train_ids.push_back(row.source_id);
  ser::save_model_dir(out, model, manifest);
  if (!model.svm.converged()) warn("SVM solver hit the update cap before reaching tolerance");
  std::cout << "trained on " << train.size() << " rows (" << class_summary(train.class_counts()) << "), "
            << test.size() << " held out; models in " << out << "\n";
  return 0;
}

int run_eval(const std::vector<std::string>& models, const std::vector<std::string>& features, const std::string& report,
             bool all_rows) {
  if (models.size() != features.size())
    throw ser::Error(ser::ErrorCode::InvalidConfig, "give one --features file per --models directory");
  std::vector<ser::ConfusionMatrix> ensembles;
  std::string csv = "#version=1\n";
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto model = ser::load_model_dir(models[i]);
    const auto data = ser::import_features(features[i]);
    const auto test = all_rows ? data : ser::held_out_rows(data, ser::load_manifest(models[i]));
    const auto r = ser::evaluate_ensemble(model, test);
    if (models.size() > 1) std::cout << "== " << models[i] << " (" << test.size() << " rows) ==\n";
    std::cout << ser::format_report_text(r) << "\n";
    ensembles.push_back(r.ensemble);
    const std::string body = ser::format_report_csv(r).substr(std::string("#version=1\n").size());
    if (models.size() > 1) csv += "#dataset," + models[i] + "\n";
    csv += body;
  }
  if (models.size() > 1) {
    char line[96];
    std::snprintf(line, sizeof(line), "Final result (mean of per-dataset average accuracies): %.2f%%\n",
                  ser::combined_average_accuracy(ensembles));
    std::cout << line;
    csv += "#combined\naverage_accuracy," + ser::detail::format_double(ser::combined_average_accuracy(ensembles)) + "\n";
  }
  if (!report.empty()) ser::detail::write_file(report, csv);
  return 0;
}

int run_predict(const std::string& models, const std::string& wav, const ser::FrameConfig& frame) {
  const auto model = ser::load_model_dir(models);
  const auto clip = ser::load_wav(wav);
  const auto row = ser::extract_features(clip, frame);
  const auto scores = model.classify(row);
  const auto decision = ser::decide(scores);
  for (auto k : ser::kAllClassifiers)
    std::cout << ser::classifier_name(k) << ": " << ser::class_name(scores[static_cast<std::size_t>(k)].label) << "\n";
  std::cout << "ensemble: " << (decision.outcome ? std::string(ser::class_name(*decision.outcome)) : "no-decision");
  if (decision.outcome) std::cout << " (" << decision.agreement << " of 4 agree)";
  std::cout << "\n";
  return 0;
}

// Expands `--config PATH` into the equivalent flags. Keys are long option
// names; a key already given on the command line keeps its command-line value.
// Returns the arguments reversed, as App::parse(std::vector) expects.
std::vector<std::string> with_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path.empty()) {
    if (!fs::is_regular_file(path)) throw CLI::FileError::Missing(path);
    auto given = [&](const std::string& flag) {
      return std::any_of(args.begin(), args.end(),
                         [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
    };
    for (const auto& item : CLI::ConfigINI().from_file(path)) {
      if (item.name == "++" || item.name == "--") continue;
      const std::string flag = "--" + item.name;
      if (given(flag)) continue;
      if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
        if (item.inputs[0] == "true") args.push_back(flag);
        continue;
      }
      args.push_back(flag);
      args.insert(args.end(), item.inputs.begin(), item.inputs.end());
    }
  }
  std::reverse(args.begin(), args.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech emotion recognition: features, selection, four classifiers and a voting ensemble"};
  app.name("ser");
  app.require_subcommand(1);

  ser::RunConfig cfg;
  std::string input, layout = "generic", out, features_path, selection_path, report, wav;
  std::vector<std::string> model_dirs, feature_files;
  unsigned jobs = 0;
  bool train_only = false, all_rows = false;
  std::size_t per_class = 40;

  auto* extract = app.add_subcommand("extract", "Featurise a corpus into a CSV of 352 values per utterance");
  extract->add_option("--input", input, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  extract->add_option("--layout", layout, "berlin (EMO-DB file names) or generic (one folder per class)")
      ->check(CLI::IsMember({"berlin", "generic"}))
      ->capture_default_str();
  extract->add_option("--out", out, "Feature CSV to write")->required();
  extract->add_option("--jobs", jobs, "Worker threads (0 = one per core)")->capture_default_str();
  add_frame_options(extract, cfg.frame);

  auto* select = app.add_subcommand("select", "Rank features by FCBF and Fisher score and keep the common top set");
  select->add_option("--features", features_path, "Feature CSV")->required()->check(CLI::ExistingFile);
  select->add_option("--out", out, "Selection file to write")->required();
  select->add_option("--target", cfg.selection.target, "Number of features to keep")->capture_default_str();
  select->add_option("--bins", cfg.selection.bins, "Equal-frequency bins for SU")->capture_default_str();
  select->add_option("--delta", cfg.selection.delta, "FCBF relevance threshold")->capture_default_str();
  select->add_flag("--train-only", train_only, "Fit on the training split only (same split as train)");
  add_split_options(select, cfg);

  auto* train = app.add_subcommand("train", "Train KNN, tree, network and SVM on the training split");
  train->add_option("--features", features_path, "Feature CSV")->required()->check(CLI::ExistingFile);
  train->add_option("--selection", selection_path, "Selection file")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out, "Model directory to write")->required();
  add_split_options(train, cfg);
  train->add_option("--k", cfg.k, "KNN neighbours")->capture_default_str();
  train->add_option("--c", cfg.svm_c, "SVM soft-margin penalty")->capture_default_str();
  train->add_option("--lr", cfg.learning_rate, "Network learning rate")->capture_default_str();
  train->add_option("--epochs", cfg.epochs, "Network epochs")->capture_default_str();
  train->add_option("--hidden", cfg.hidden, "Network hidden units")->capture_default_str();
  train->add_option("--prune-fraction", cfg.prune_fraction, "Tree pruning holdout fraction")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Evaluate a model directory on held-out rows");
  eval->add_option("--models", model_dirs, "Model directory (repeat for several corpora)")->required();
  eval->add_option("--features", feature_files, "Feature CSV (one per --models)")->required();
  eval->add_option("--report", report, "CSV report to write");
  eval->add_flag("--all-rows", all_rows, "Evaluate every row, including the training rows");

  auto* predict = app.add_subcommand("predict", "Classify one WAV file");
  predict->add_option("--models", model_dirs, "Model directory")->required()->expected(1);
  predict->add_option("--wav", wav, "WAV file")->required()->check(CLI::ExistingFile);
  add_frame_options(predict, cfg.frame);

  auto* synth = app.add_subcommand("synth", "Write a synthetic four-class corpus in the generic layout");
  synth->add_option("--out", out, "Directory to create")->required();
  synth->add_option("--per-class", per_class, "Clips per class")->capture_default_str();
  synth->add_option("--seed", cfg.seed, "Generator seed")->capture_default_str();

  std::string config_path;  // consumed by with_config before parsing; listed here for --help
  for (auto* cmd : app.get_subcommands({}))
    cmd->add_option("--config", config_path, "Read options from a key = value file; command-line flags take precedence");

  std::vector<std::string> args;
  try {
    args = with_config(std::vector<std::string>(argv + 1, argv + argc));
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*extract) return run_extract(input, layout, out, jobs, cfg.frame);
    if (*select) return run_select(features_path, out, train_only, cfg);
    if (*train) return run_train(features_path, selection_path, out, cfg);
    if (*eval) return run_eval(model_dirs, feature_files, report, all_rows);
    if (*predict) return run_predict(model_dirs.front(), wav, cfg.frame);
    if (*synth) {
      ser::write_synthetic_corpus(out, per_class, cfg.seed);
      std::cout << "wrote " << 4 * per_class << " clips to " << out << "\n";
      return 0;
    }
  } catch (const ser::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
