// End-to-end run on a small synthetic corpus: featurise, select, train, evaluate.

#include <iostream>

#include "ser/ser.hpp"

int main() {
  ser::FrameConfig frame;
  ser::LabeledDataset data;
  for (const auto& s : ser::synthesize_corpus(20, 7))
    data.rows.push_back(ser::extract_features(s.clip, frame, s.clip.source_id(), s.label));

  ser::RunConfig cfg;
  cfg.seed = 7;
  const auto result = ser::run_experiment(data, cfg);

  const auto& names = ser::feature_names();
  std::cout << "selected features:";
  for (auto i : result.selection.indices) std::cout << " " << names[i];
  std::cout << "\n\n" << ser::format_report_text(result.report);

  const auto decision = ser::ensemble_predict(result.model, data.rows.front());
  std::cout << "\nfirst clip (" << data.rows.front().source_id << "): "
            << (decision.outcome ? ser::class_name(*decision.outcome) : "no-decision") << "\n";
  return result.report.ensemble.total() > 0 ? 0 : 1;
}
