#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "ser/harness/corpus.hpp"
#include "ser/harness/features_csv.hpp"
#include "ser/harness/metrics.hpp"
#include "ser/harness/pipeline.hpp"
#include "ser/harness/split.hpp"
#include "ser/harness/synth.hpp"

namespace {

namespace fs = std::filesystem;
using ser::EmotionClass;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           (std::string("ser_harness_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ser::AudioClip tone(double hz, double seconds = 0.5) {
  std::vector<double> s(static_cast<std::size_t>(16000 * seconds));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = 0.5 * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / 16000.0);
  return ser::AudioClip(s, 16000);
}

ser::FeatureVector random_row(std::mt19937_64& gen, EmotionClass label, std::string id) {
  std::normal_distribution<double> g(0.0, 100.0);
  ser::FeatureVector fv;
  fv.values.resize(ser::kNumFeatures);
  for (auto& v : fv.values) v = g(gen) * std::pow(10.0, static_cast<double>(gen() % 9) - 4.0);
  fv.label = label;
  fv.source_id = std::move(id);
  return fv;
}

TEST(Corpus, EmoDbCodes) {
  EXPECT_EQ(ser::emodb_emotion_code("03a01Wa"), 'W');
  EXPECT_EQ(ser::emodb_emotion_code("16b10Tb"), 'T');
  EXPECT_FALSE(ser::emodb_emotion_code("03a01Xa"));
  EXPECT_FALSE(ser::emodb_emotion_code("hello"));
  EXPECT_EQ(ser::emodb_class('W'), EmotionClass::Angry);
  EXPECT_EQ(ser::emodb_class('F'), EmotionClass::Happy);
  EXPECT_EQ(ser::emodb_class('N'), EmotionClass::Neutral);
  EXPECT_EQ(ser::emodb_class('T'), EmotionClass::Sad);
  for (char c : {'L', 'E', 'A'}) EXPECT_FALSE(ser::emodb_class(c));
}

TEST(Corpus, BerlinKeepsFourClasses) {
  TempDir dir;
  const auto clip = tone(200.0, 0.1);
  for (char code : std::string("WLEAFTN")) ser::write_wav16(dir.path / (std::string("03a01") + code + "a.wav"), clip);
  ser::write_wav16(dir.path / "10b02Wc.wav", clip);
  ser::write_wav16(dir.path / "readme.wav", clip);
  const auto listing = ser::scan_berlin(dir.path);
  EXPECT_EQ(listing.entries.size(), 5u);
  EXPECT_EQ(listing.skipped_codes.size(), 3u);
  EXPECT_EQ(listing.unrecognized, std::vector<std::string>{"readme.wav"});
  const auto counts = listing.class_counts();
  EXPECT_EQ(counts, (std::array<std::size_t, 4>{2, 1, 1, 1}));
  const auto clips = ser::load_berlin(dir.path);
  EXPECT_EQ(clips.size(), 5u);
  EXPECT_EQ(clips.front().id, "03a01Fa");
}

TEST(Corpus, GenericLayout) {
  TempDir dir;
  const auto clip = tone(200.0, 0.1);
  fs::create_directories(dir.path / "Angry" / "take1");
  fs::create_directories(dir.path / "sad");
  fs::create_directories(dir.path / "happy");
  fs::create_directories(dir.path / "bored");
  ser::write_wav16(dir.path / "Angry" / "a.wav", clip);
  ser::write_wav16(dir.path / "Angry" / "take1" / "a.wav", clip);
  ser::write_wav16(dir.path / "sad" / "s.WAV", clip);
  ser::write_wav16(dir.path / "bored" / "b.wav", clip);
  const auto listing = ser::scan_generic(dir.path);
  ASSERT_EQ(listing.entries.size(), 3u);
  EXPECT_EQ(listing.entries[0].id, "Angry/a");
  EXPECT_EQ(listing.entries[1].id, "Angry/take1/a");
  EXPECT_EQ(listing.entries[2].label, EmotionClass::Sad);
  EXPECT_EQ(listing.unrecognized, std::vector<std::string>{"bored/"});
  EXPECT_EQ(listing.class_counts()[ser::class_index(EmotionClass::Happy)], 0u);
}

TEST(Corpus, EmptyDataset) {
  TempDir dir;
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const ser::Error& e) {
      return e.code();
    }
    return ser::ErrorCode::IoError;
  };
  EXPECT_EQ(code_of([&] { ser::scan_berlin(dir.path); }), ser::ErrorCode::EmptyDataset);
  EXPECT_EQ(code_of([&] { ser::scan_generic(dir.path); }), ser::ErrorCode::EmptyDataset);
  EXPECT_EQ(code_of([&] { ser::scan_generic(dir.path / "missing"); }), ser::ErrorCode::IoError);
}

TEST(Split, StratifiedCounts) {
  std::vector<EmotionClass> labels;
  for (int i = 0; i < 280; ++i) labels.push_back(ser::class_from_index(static_cast<std::size_t>(i % 4)));
  const auto s = ser::stratified_split(labels, 0.75, 42);
  EXPECT_EQ(s.train.size(), 4u * 52);
  EXPECT_EQ(s.test.size(), 4u * 18);
  std::array<int, 4> per{};
  for (auto i : s.train) ++per[ser::class_index(labels[i])];
  for (int n : per) EXPECT_EQ(n, 52);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 280u);

  const auto again = ser::stratified_split(labels, 0.75, 42);
  EXPECT_EQ(again.train, s.train);
  EXPECT_EQ(again.test, s.test);
  EXPECT_NE(ser::stratified_split(labels, 0.75, 43).train, s.train);
}

TEST(Split, Boundaries) {
  const std::vector<EmotionClass> two = {EmotionClass::Sad, EmotionClass::Sad, EmotionClass::Happy, EmotionClass::Happy};
  const auto s = ser::stratified_split(two, 0.5, 1);
  EXPECT_EQ(s.train.size(), 2u);
  EXPECT_EQ(s.test.size(), 2u);
  const auto hi = ser::stratified_split(two, 0.95, 1);
  EXPECT_EQ(hi.test.size(), 2u);  // at least one row per class stays out
  const std::vector<EmotionClass> lonely = {EmotionClass::Sad, EmotionClass::Happy, EmotionClass::Happy};
  try {
    ser::stratified_split(lonely, 0.75, 1);
    FAIL();
  } catch (const ser::Error& e) {
    EXPECT_EQ(e.code(), ser::ErrorCode::TooFewRows);
  }
}

TEST(Split, WithinOneRowOfTarget) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<EmotionClass> labels;
    std::array<std::size_t, 4> n{};
    for (auto& v : n) v = 2 + gen() % 40;
    for (std::size_t c = 0; c < 4; ++c)
      for (std::size_t i = 0; i < n[c]; ++i) labels.push_back(ser::class_from_index(c));
    std::shuffle(labels.begin(), labels.end(), gen);
    const double frac = 0.5 + 0.45 * static_cast<double>(trial) / 29.0;
    const auto s = ser::stratified_split(labels, frac, static_cast<std::uint64_t>(trial));
    std::array<std::size_t, 4> got{};
    for (auto i : s.train) ++got[ser::class_index(labels[i])];
    for (std::size_t c = 0; c < 4; ++c) {
      const double want = std::floor(frac * static_cast<double>(n[c]));
      EXPECT_LE(std::abs(static_cast<double>(got[c]) - want), 1.0);
    }
  }
}

TEST(Metrics, PerfectAndConstantPredictors) {
  std::vector<EmotionClass> truth;
  for (int i = 0; i < 40; ++i) truth.push_back(ser::class_from_index(static_cast<std::size_t>(i % 4)));
  std::vector<std::optional<EmotionClass>> perfect(truth.begin(), truth.end());
  const auto m = ser::evaluate(truth, perfect);
  EXPECT_DOUBLE_EQ(m.average_accuracy(), 100.0);
  for (auto t : ser::kAllClasses)
    for (auto p : ser::kAllClasses) EXPECT_EQ(m.percent(t, ser::class_index(p)), t == p ? 100.0 : 0.0);

  std::vector<std::optional<EmotionClass>> angry(truth.size(), EmotionClass::Angry);
  EXPECT_DOUBLE_EQ(ser::evaluate(truth, angry).average_accuracy(), 25.0);
  EXPECT_THROW(ser::evaluate({}, {}), ser::Error);
}

TEST(Metrics, RowsSumToHundred) {
  std::mt19937_64 gen(3);
  std::vector<EmotionClass> truth;
  std::vector<std::optional<EmotionClass>> pred;
  for (int i = 0; i < 97; ++i) {
    truth.push_back(ser::class_from_index(gen() % 4));
    const auto r = gen() % 5;
    pred.push_back(r == 4 ? std::nullopt : std::optional(ser::class_from_index(r)));
  }
  const auto m = ser::evaluate(truth, pred, true);
  EXPECT_EQ(m.total(), 97u);
  for (auto c : ser::kAllClasses) {
    double row = 0.0;
    for (std::size_t col = 0; col <= 4; ++col) row += m.percent(c, col);
    EXPECT_NEAR(row, 100.0, 1e-6);
    EXPECT_NEAR(m.class_accuracy(c) + m.misclassification_rate(c) + m.cant_decide_rate(c), 100.0, 1e-6);
  }
  const std::array<ser::ConfusionMatrix, 2> runs = {m, ser::evaluate(truth, std::vector<std::optional<EmotionClass>>(truth.begin(), truth.end()))};
  EXPECT_NEAR(ser::combined_average_accuracy(runs), (m.average_accuracy() + 100.0) / 2.0, 1e-12);
  const auto table = ser::format_decision_table(m, "Result for majority voting");
  EXPECT_NE(table.find("Can't Decide (%)"), std::string::npos);
  EXPECT_NE(ser::format_confusion_table(m, "t").find("No decision (%)"), std::string::npos);
}

TEST(FeaturesCsv, RoundTrip) {
  std::mt19937_64 gen(1);
  ser::LabeledDataset d;
  for (int i = 0; i < 6; ++i) d.rows.push_back(random_row(gen, ser::class_from_index(static_cast<std::size_t>(i % 4)), "dir/f" + std::to_string(i)));
  d.rows[2].values[5] = 0.1 + 0.2;
  d.rows[3].values[7] = -1e-300;
  TempDir dir;
  ser::export_features(d, dir.path / "f.csv");
  const auto back = ser::import_features(dir.path / "f.csv");
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back.rows[i].source_id, d.rows[i].source_id);
    EXPECT_EQ(back.rows[i].label, d.rows[i].label);
    for (std::size_t j = 0; j < ser::kNumFeatures; ++j) EXPECT_EQ(back.rows[i].values[j], d.rows[i].values[j]);
  }
  const auto text = ser::format_features_csv(d);
  EXPECT_EQ(text.rfind("#version=1\nfile,label,energy_max,", 0), 0u);
  EXPECT_EQ(ser::format_features_csv(back), text);
}

TEST(FeaturesCsv, SchemaAndRowErrors) {
  std::mt19937_64 gen(2);
  ser::LabeledDataset d;
  for (int i = 0; i < 8; ++i) d.rows.push_back(random_row(gen, EmotionClass::Sad, "r" + std::to_string(i)));
  const auto text = ser::format_features_csv(d);

  // Drop the last feature column everywhere.
  std::string narrow;
  for (auto line : ser::detail::lines(text)) {
    std::string l(line);
    if (!l.starts_with("#")) l = l.substr(0, l.rfind(','));
    narrow += l + "\n";
  }
  try {
    ser::parse_features_csv(narrow);
    FAIL();
  } catch (const ser::Error& e) {
    EXPECT_EQ(e.code(), ser::ErrorCode::SchemaMismatch);
  }

  // Non-numeric cell in data row 7.
  auto lines = ser::detail::lines(text);
  std::string bad;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string l(lines[i]);
    if (i == 8) l.replace(l.find(',', l.find(',') + 1) + 1, 1, "x");
    bad += l + "\n";
  }
  try {
    ser::parse_features_csv(bad);
    FAIL();
  } catch (const ser::MalformedRowError& e) {
    EXPECT_EQ(e.code(), ser::ErrorCode::MalformedRow);
    EXPECT_EQ(e.row(), 7u);
  }

  auto renamed = text;
  renamed.replace(renamed.find("energy_min"), 10, "energy_MIN");
  EXPECT_THROW(ser::parse_features_csv(renamed), ser::Error);
}

TEST(Pipeline, ExtractCorpusKeepsOrderAcrossWorkers) {
  TempDir dir;
  ser::write_synthetic_corpus(dir.path, 3, 7);
  ser::write_wav16(dir.path / "sad" / "silent.wav", ser::AudioClip(std::vector<double>(8000, 0.0), 16000));
  const auto listing = ser::scan_generic(dir.path);
  const auto one = ser::extract_corpus(listing, ser::FrameConfig{}, 1);
  const auto many = ser::extract_corpus(listing, ser::FrameConfig{}, 4);
  EXPECT_EQ(one.dataset.size(), 12u);
  ASSERT_EQ(one.failures.size(), 1u);
  EXPECT_EQ(one.failures[0].id, "sad/silent");
  ASSERT_EQ(many.dataset.size(), one.dataset.size());
  for (std::size_t i = 0; i < one.dataset.size(); ++i) EXPECT_EQ(many.dataset.rows[i], one.dataset.rows[i]);
}

TEST(Pipeline, ModelDirRoundTripAndMismatch) {
  std::vector<ser::FeatureVector> rows;
  for (const auto& s : ser::synthesize_corpus(8, 3))
    rows.push_back(ser::extract_features(s.clip, ser::FrameConfig{}, s.clip.source_id(), s.label));
  ser::LabeledDataset data{rows};
  ser::RunConfig cfg;
  cfg.seed = 5;
  cfg.epochs = 50;
  cfg.k = 3;
  const auto r = ser::run_experiment(data, cfg);
  TempDir dir;
  ser::save_model_dir(dir.path, r.model, r.manifest);
  const auto loaded = ser::load_model_dir(dir.path);
  const auto manifest = ser::load_manifest(dir.path);
  EXPECT_EQ(manifest.train_ids, r.manifest.train_ids);
  EXPECT_EQ(manifest.config.seed, 5u);
  EXPECT_EQ(manifest.config.k, 3u);
  const auto held = ser::held_out_rows(data, manifest);
  EXPECT_EQ(held.size(), data.size() - manifest.train_ids.size());
  for (const auto& row : data.rows) EXPECT_EQ(ser::ensemble_predict(loaded, row), ser::ensemble_predict(r.model, row));
  EXPECT_EQ(ser::format_report_csv(ser::evaluate_ensemble(loaded, held)), ser::format_report_csv(r.report));

  ser::FeatureVector narrow = data.rows[0];
  narrow.values.pop_back();
  try {
    ser::ensemble_predict(loaded, narrow);
    FAIL();
  } catch (const ser::Error& e) {
    EXPECT_EQ(e.code(), ser::ErrorCode::FeatureMismatch);
  }
  auto bad = loaded;
  bad.selection.indices.pop_back();
  EXPECT_THROW(bad.check_consistent(), ser::Error);
}

TEST(Pipeline, RunConfigValidation) {
  ser::RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.train_fraction = 0.4;
  EXPECT_THROW(cfg.validate(), ser::Error);
  cfg.train_fraction = 0.96;
  EXPECT_THROW(cfg.validate(), ser::Error);
  cfg = {};
  cfg.k = 0;
  EXPECT_THROW(cfg.validate(), ser::Error);
  cfg = {};
  cfg.seed = 18446744073709551615ull;
  EXPECT_EQ(ser::parse_manifest(ser::format_manifest({cfg, {}})).config.seed, cfg.seed);
}

}  // namespace
