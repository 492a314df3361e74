#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "digitrec/audio.hpp"
#include "digitrec/corpus.hpp"
#include "digitrec/features.hpp"
#include "digitrec/hmm.hpp"
#include "digitrec/scoring.hpp"

namespace digitrec {

// ---------------------------------------------------------------------------
// Config files
//
// A flat TOML subset: `key = value` pairs, `[section]` headers that prefix
// following keys with "section.", quoted strings, numbers, booleans and
// single-line lists `[a, b]`. '#' starts a comment outside quotes.

class ConfigDocument {
 public:
  static ConfigDocument parse(std::string_view text, const std::string& origin = "<config>");
  static ConfigDocument load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

  /// Keys that no getter has asked for; used to reject typos.
  std::vector<std::string> unused_keys() const;

 private:
  struct Value {
    std::vector<std::string> items;
    bool is_list = false;
  };
  const Value* find(const std::string& key) const;

  std::string origin_;
  std::map<std::string, Value> values_;
  mutable std::map<std::string, bool> used_;
};

/// Frame section ("frame.length_ms" ...) with defaults.
FrameConfig frame_config_from(const ConfigDocument& doc);
/// Feature section ("feature.num_filters" ...) for the given kind.
FeatureConfig feature_config_from(const ConfigDocument& doc, FeatureKind kind);

// ---------------------------------------------------------------------------
// Grid

struct GridConfig {
  std::vector<EncodingProfile> profiles = grid_profiles();
  std::vector<NoiseCondition> conditions;
  std::vector<FeatureConfig> features;
  FrameConfig frame;
  TrainOptions hmm;
  std::uint64_t seed = 1234;
  unsigned threads = 1;

  /// Empty: synthesize the corpus from `synth` (seed overridden by `seed`).
  std::filesystem::path manifest;
  SynthSpec synth;

  /// Models are trained on this condition at each profile.
  NoiseKind train_condition = NoiseKind::kClean;
  std::string table_profile = "pcm24-48k";
  double verdict_threshold = 0.5;
  std::filesystem::path out_dir = "grid-out";

  /// Default reproduction grid: five profiles, clean / fan (20 dB) /
  /// random (10 dB), all five feature kinds with static + delta + delta-delta.
  static GridConfig defaults();
  /// Relative file paths in the document resolve against `base`.
  static GridConfig from_document(const ConfigDocument& doc, const std::filesystem::path& base = {});
  static GridConfig load(const std::filesystem::path& path);

  /// Throws Config on empty lists or unknown table profile.
  void validate() const;
};

struct GridCell {
  std::string condition;
  std::string profile;
  FeatureKind feature = FeatureKind::kMfcc;
  bool failed = false;
  std::string error;
  EvalReport report;
};

struct GridReport {
  /// Ordered by (condition, profile, feature) in configured order.
  std::vector<GridCell> cells;
  /// Feature kinds by mean Percentage, then mean per-sample accuracy,
  /// descending; ties keep configured order.
  std::vector<FeatureKind> ranking;
  std::vector<std::string> conditions;
  std::vector<std::string> profiles;
  std::vector<FeatureKind> features;
  std::string table_profile;

  const GridCell* find(const std::string& condition, const std::string& profile, FeatureKind feature) const;
};

std::vector<FeatureKind> rank_features(const GridReport& report);

GridReport run_grid(const GridConfig& config);

/// Writes table_<condition>.txt, results.csv, plot_<condition>.csv and
/// summary.txt under out_dir. Returns the paths written, in order.
std::vector<std::filesystem::path> emit_reports(const GridReport& report, const std::filesystem::path& out_dir);

/// Human-readable digits x features table for one condition.
std::string render_condition_table(const GridReport& report, const std::string& condition);

/// Default thread count: DIGITREC_THREADS if set and positive, else 1.
unsigned default_thread_count();

// ---------------------------------------------------------------------------
// File-based workflow used by the CLI

/// Features for every manifest entry, written to
/// <out>/<entry path with .dfe extension>.
std::size_t extract_corpus(const Manifest& manifest, const FrameConfig& frame, const FeatureConfig& feature,
                           const std::filesystem::path& out_dir, unsigned threads = 1);

std::filesystem::path feature_path(const std::filesystem::path& features_dir, const ManifestEntry& entry);

/// One model per label over the train split; saved as <out>/<label>.dhm.
WordModelSet train_models(const std::filesystem::path& features_dir, const Manifest& manifest,
                          const TrainOptions& options, const std::filesystem::path& out_dir, unsigned threads = 1);

struct RecognitionRun {
  std::vector<Trial> trials;
  EvalReport report;
};

/// Recognizes the test split and writes the CSV report to `report_path`,
/// the digit table to <report>.txt and per-utterance "ref<TAB>hyp" lines to
/// <report>.results.tsv.
RecognitionRun recognize_corpus(const std::filesystem::path& models_dir, const std::filesystem::path& features_dir,
                                const Manifest& manifest, const std::filesystem::path& report_path,
                                double verdict_threshold = 0.5, unsigned threads = 1);

std::string report_csv(const EvalReport& report, FeatureKind feature);

struct ScoreSummary {
  EditCounts edits;
  std::size_t reference_words = 0;
  std::size_t sentences = 0;
  double wer = 0.0;
};

/// Lines of "reference words<TAB>hypothesis words".
ScoreSummary score_results_file(const std::filesystem::path& path);
/// Line-aligned reference and hypothesis files.
ScoreSummary score_files(const std::filesystem::path& ref, const std::filesystem::path& hyp);

}  // namespace digitrec
