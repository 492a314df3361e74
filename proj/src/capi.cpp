#include "digitrec/digitrec.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "digitrec/audio.hpp"
#include "digitrec/corpus.hpp"
#include "digitrec/error.hpp"
#include "digitrec/features.hpp"
#include "digitrec/grid.hpp"
#include "digitrec/scoring.hpp"
#include "io_util.hpp"

struct dr_audio {
  digitrec::AudioBuffer buffer;
};

struct dr_features {
  digitrec::FeatureMatrix matrix;
};

struct dr_grid_config {
  digitrec::GridConfig config;
  std::string out_dir;
};

struct dr_grid_report {
  digitrec::GridReport report;
};

namespace {

thread_local std::string g_last_error;

dr_status fail_with(dr_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs fn and maps exceptions onto status codes.
template <typename Fn>
dr_status guard(Fn&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return DR_OK;
  } catch (const digitrec::Error& e) {
    return fail_with(static_cast<dr_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail_with(DR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail_with(DR_IO_FAILURE, e.what());
  } catch (const std::exception& e) {
    return fail_with(DR_INTERNAL, e.what());
  } catch (...) {
    return fail_with(DR_INTERNAL, "unknown exception");
  }
}

void require(bool ok, const char* what) {
  if (!ok) digitrec::fail(digitrec::Errc::kInvalidArgument, what);
}

digitrec::FeatureKind parse_kind(const char* name) {
  require(name != nullptr, "feature name is null");
  const auto kind = digitrec::parse_feature_kind(name);
  if (!kind) digitrec::fail(digitrec::Errc::kInvalidArgument, std::string("unknown feature kind '") + name + "'");
  return *kind;
}

digitrec::NoiseKind parse_condition(const char* name) {
  require(name != nullptr, "condition is null");
  const auto kind = digitrec::parse_noise_kind(name);
  if (!kind) digitrec::fail(digitrec::Errc::kInvalidArgument, std::string("unknown condition '") + name + "'");
  return *kind;
}

void load_configs(const char* config_path, const char* feature, digitrec::FrameConfig& frame,
                  digitrec::FeatureConfig& feat) {
  const auto kind = parse_kind(feature);
  if (config_path && *config_path) {
    const auto doc = digitrec::ConfigDocument::load(config_path);
    frame = digitrec::frame_config_from(doc);
    feat = digitrec::feature_config_from(doc, kind);
  } else {
    feat.kind = kind;
  }
  feat.validate();
}

void fill_score(const digitrec::ScoreSummary& s, dr_score* out) {
  out->substitutions = s.edits.substitutions;
  out->deletions = s.edits.deletions;
  out->insertions = s.edits.insertions;
  out->reference_words = s.reference_words;
  out->sentences = s.sentences;
  out->wer = s.wer;
}

}  // namespace

extern "C" {

const char* dr_status_name(dr_status status) {
  return digitrec::errc_name(static_cast<digitrec::Errc>(status));
}

const char* dr_last_error(void) { return g_last_error.c_str(); }

const char* dr_version(void) { return "1.0.0"; }

unsigned dr_default_threads(void) { return digitrec::default_thread_count(); }

dr_status dr_bit_rate(int bit_depth, int sample_rate, uint64_t* out_bps) {
  return guard([&] {
    require(out_bps != nullptr, "out_bps is null");
    digitrec::check_bit_depth(bit_depth);
    if (sample_rate <= 0) digitrec::fail(digitrec::Errc::kInvalidRate, "sample rate must be positive");
    *out_bps = digitrec::bit_rate(digitrec::EncodingProfile{"", bit_depth, sample_rate, ""});
  });
}

dr_status dr_bit_rate_display(uint64_t bps, char* buf, size_t buf_size) {
  return guard([&] {
    require(buf != nullptr && buf_size > 0, "output buffer is empty");
    const auto s = digitrec::bit_rate_display(bps);
    require(s.size() < buf_size, "output buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
  });
}

size_t dr_profile_count(void) { return digitrec::builtin_profiles().size(); }

dr_status dr_profile_at(size_t index, const char** label, int* bit_depth, int* sample_rate) {
  return guard([&] {
    const auto& all = digitrec::builtin_profiles();
    require(index < all.size(), "profile index out of range");
    if (label) *label = all[index].label.c_str();
    if (bit_depth) *bit_depth = all[index].bit_depth;
    if (sample_rate) *sample_rate = all[index].sample_rate;
  });
}

dr_status dr_profile_find(const char* label, int* bit_depth, int* sample_rate) {
  return guard([&] {
    require(label != nullptr, "label is null");
    const auto p = digitrec::find_profile(label);
    if (bit_depth) *bit_depth = p.bit_depth;
    if (sample_rate) *sample_rate = p.sample_rate;
  });
}

dr_status dr_audio_create(const double* samples, size_t count, int sample_rate, int bit_depth, dr_audio** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    require(samples != nullptr || count == 0, "samples is null");
    digitrec::check_bit_depth(bit_depth);
    *out = new dr_audio{digitrec::AudioBuffer(std::vector<double>(samples, samples + count), sample_rate, bit_depth)};
  });
}

dr_status dr_audio_read(const char* path, dr_audio** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new dr_audio{digitrec::read_wav(path)};
  });
}

dr_status dr_audio_write(const dr_audio* audio, const char* path, int bit_depth) {
  return guard([&] {
    require(audio != nullptr && path != nullptr, "null argument");
    digitrec::write_wav(audio->buffer, bit_depth, path);
  });
}

void dr_audio_free(dr_audio* audio) { delete audio; }

size_t dr_audio_length(const dr_audio* audio) { return audio ? audio->buffer.size() : 0; }

int dr_audio_sample_rate(const dr_audio* audio) { return audio ? audio->buffer.sample_rate() : 0; }

int dr_audio_bit_depth(const dr_audio* audio) { return audio ? audio->buffer.source_bit_depth() : 0; }

const double* dr_audio_samples(const dr_audio* audio) { return audio ? audio->buffer.samples().data() : nullptr; }

dr_status dr_audio_resample(const dr_audio* audio, int target_rate, dr_audio** out) {
  return guard([&] {
    require(audio != nullptr && out != nullptr, "null argument");
    *out = new dr_audio{digitrec::resample(audio->buffer, target_rate)};
  });
}

dr_status dr_audio_requantize(const dr_audio* audio, int bit_depth, dr_audio** out) {
  return guard([&] {
    require(audio != nullptr && out != nullptr, "null argument");
    *out = new dr_audio{digitrec::requantize(audio->buffer, bit_depth)};
  });
}

dr_status dr_synth_corpus(uint64_t seed, size_t train_per_digit, size_t test_per_digit, const char* out_dir,
                          size_t* num_entries) {
  return guard([&] {
    require(out_dir != nullptr, "out_dir is null");
    require(train_per_digit > 0 && test_per_digit > 0, "token counts must be positive");
    digitrec::SynthSpec spec;
    spec.seed = seed;
    spec.train_per_digit = train_per_digit;
    spec.test_per_digit = test_per_digit;
    const auto m = digitrec::generate_synthetic_corpus(spec, out_dir);
    if (num_entries) *num_entries = m.entries.size();
  });
}

dr_status dr_degrade_corpus(const char* manifest, const char* profile, const char* condition, double snr_db,
                            const char* noise_wav, uint64_t seed, unsigned threads, const char* out_dir,
                            size_t* num_entries) {
  return guard([&] {
    require(manifest != nullptr && profile != nullptr && out_dir != nullptr, "null argument");
    digitrec::NoiseCondition cond;
    cond.kind = parse_condition(condition);
    if (cond.kind != digitrec::NoiseKind::kClean) {
      cond.snr_db = std::isfinite(snr_db) && snr_db >= 0.0 ? snr_db
                    : cond.kind == digitrec::NoiseKind::kFan ? 20.0
                                                            : 10.0;
    }
    if (noise_wav && *noise_wav) cond.noise_wav = noise_wav;
    const auto m = digitrec::degrade_corpus(digitrec::read_manifest(manifest), digitrec::find_profile(profile), cond,
                                            out_dir, seed, threads);
    if (num_entries) *num_entries = m.entries.size();
  });
}

dr_status dr_features_extract(const dr_audio* audio, const char* feature, const char* config_path,
                              dr_features** out) {
  return guard([&] {
    require(audio != nullptr && out != nullptr, "null argument");
    digitrec::FrameConfig frame;
    digitrec::FeatureConfig feat;
    load_configs(config_path, feature, frame, feat);
    *out = new dr_features{digitrec::extract(audio->buffer, frame, feat)};
  });
}

dr_status dr_features_read(const char* path, dr_features** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new dr_features{digitrec::read_features(path)};
  });
}

dr_status dr_features_write(const dr_features* features, const char* path) {
  return guard([&] {
    require(features != nullptr && path != nullptr, "null argument");
    digitrec::write_features(features->matrix, path);
  });
}

void dr_features_free(dr_features* features) { delete features; }

size_t dr_features_frames(const dr_features* features) { return features ? features->matrix.num_frames() : 0; }

size_t dr_features_dim(const dr_features* features) { return features ? features->matrix.dim() : 0; }

const double* dr_features_data(const dr_features* features) {
  return features ? features->matrix.values().data() : nullptr;
}

const char* dr_features_kind(const dr_features* features) {
  return features ? digitrec::feature_kind_name(features->matrix.kind()) : "";
}

dr_status dr_extract_corpus(const char* manifest, const char* feature, const char* config_path, unsigned threads,
                            const char* out_dir, size_t* num_files) {
  return guard([&] {
    require(manifest != nullptr && out_dir != nullptr, "null argument");
    digitrec::FrameConfig frame;
    digitrec::FeatureConfig feat;
    load_configs(config_path, feature, frame, feat);
    const auto n = digitrec::extract_corpus(digitrec::read_manifest(manifest), frame, feat, out_dir, threads);
    if (num_files) *num_files = n;
  });
}

dr_train_options dr_train_options_default(void) {
  const digitrec::TrainOptions d;
  return dr_train_options{d.num_states, d.num_mixtures, d.max_iters, d.tol};
}

dr_status dr_train_models(const char* features_dir, const char* manifest, const dr_train_options* options,
                          unsigned threads, const char* out_dir, size_t* num_models) {
  return guard([&] {
    require(features_dir != nullptr && manifest != nullptr && out_dir != nullptr, "null argument");
    digitrec::TrainOptions opts;
    if (options) {
      require(options->num_states > 0 && options->num_mixtures > 0, "states and mixtures must be positive");
      opts.num_states = options->num_states;
      opts.num_mixtures = options->num_mixtures;
      opts.max_iters = options->max_iters;
      opts.tol = options->tol;
    }
    const auto set = digitrec::train_models(features_dir, digitrec::read_manifest(manifest), opts, out_dir, threads);
    if (num_models) *num_models = set.models().size();
  });
}

dr_status dr_recognize_corpus(const char* models_dir, const char* features_dir, const char* manifest,
                              const char* report_path, double verdict_threshold, unsigned threads,
                              dr_eval_summary* out) {
  return guard([&] {
    require(models_dir != nullptr && features_dir != nullptr && manifest != nullptr && report_path != nullptr,
            "null argument");
    const auto run = digitrec::recognize_corpus(models_dir, features_dir, digitrec::read_manifest(manifest),
                                                report_path, verdict_threshold, threads);
    if (out) {
      const auto& r = run.report;
      out->trials = run.trials.size();
      out->correct = 0;
      for (const auto& t : run.trials) out->correct += t.truth == t.predicted ? 1 : 0;
      out->substitutions = r.edits.substitutions;
      out->deletions = r.edits.deletions;
      out->insertions = r.edits.insertions;
      out->reference_words = r.reference_words;
      out->wer = r.wer;
      out->accuracy_pct = r.accuracy_pct;
      out->percentage = r.percentage;
    }
  });
}

dr_status dr_score_words(const char* reference, const char* hypothesis, dr_score* out) {
  return guard([&] {
    require(reference != nullptr && hypothesis != nullptr && out != nullptr, "null argument");
    const auto ref = digitrec::detail::split_words(reference);
    const auto hyp = digitrec::detail::split_words(hypothesis);
    const auto e = digitrec::align(ref, hyp);
    digitrec::ScoreSummary s;
    s.edits = e;
    s.reference_words = ref.size();
    s.sentences = 1;
    s.wer = digitrec::word_error_rate(e.substitutions, e.deletions, e.insertions, ref.size());
    fill_score(s, out);
  });
}

dr_status dr_score_results(const char* path, dr_score* out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    fill_score(digitrec::score_results_file(path), out);
  });
}

dr_status dr_score_files(const char* reference_path, const char* hypothesis_path, dr_score* out) {
  return guard([&] {
    require(reference_path != nullptr && hypothesis_path != nullptr && out != nullptr, "null argument");
    fill_score(digitrec::score_files(reference_path, hypothesis_path), out);
  });
}

dr_status dr_grid_config_default(dr_grid_config** out) {
  return guard([&] {
    require(out != nullptr, "out is null");
    *out = new dr_grid_config{digitrec::GridConfig::defaults(), ""};
  });
}

dr_status dr_grid_config_load(const char* path, dr_grid_config** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    const auto doc = digitrec::ConfigDocument::load(path);
    const std::string out_dir = doc.has("out") ? doc.get_string("out", "") : "";
    *out = new dr_grid_config{digitrec::GridConfig::load(path), out_dir};
  });
}

void dr_grid_config_free(dr_grid_config* config) { delete config; }

dr_status dr_grid_config_set_seed(dr_grid_config* config, uint64_t seed) {
  return guard([&] {
    require(config != nullptr, "config is null");
    config->config.seed = seed;
  });
}

dr_status dr_grid_config_set_threads(dr_grid_config* config, unsigned threads) {
  return guard([&] {
    require(config != nullptr && threads > 0, "threads must be positive");
    config->config.threads = threads;
  });
}

dr_status dr_grid_config_set_train_condition(dr_grid_config* config, const char* condition) {
  return guard([&] {
    require(config != nullptr, "config is null");
    config->config.train_condition = parse_condition(condition);
  });
}

dr_status dr_grid_config_set_synthetic(dr_grid_config* config, size_t train_per_digit, size_t test_per_digit) {
  return guard([&] {
    require(config != nullptr, "config is null");
    require(train_per_digit > 0 && test_per_digit > 0, "token counts must be positive");
    config->config.manifest.clear();
    config->config.synth.train_per_digit = train_per_digit;
    config->config.synth.test_per_digit = test_per_digit;
  });
}

dr_status dr_grid_config_set_manifest(dr_grid_config* config, const char* manifest) {
  return guard([&] {
    require(config != nullptr && manifest != nullptr, "null argument");
    config->config.manifest = manifest;
  });
}

const char* dr_grid_config_out_dir(const dr_grid_config* config) { return config ? config->out_dir.c_str() : ""; }

dr_status dr_grid_run(const dr_grid_config* config, dr_grid_report** out) {
  return guard([&] {
    require(config != nullptr && out != nullptr, "null argument");
    *out = new dr_grid_report{digitrec::run_grid(config->config)};
  });
}

void dr_grid_report_free(dr_grid_report* report) { delete report; }

size_t dr_grid_report_cell_count(const dr_grid_report* report) { return report ? report->report.cells.size() : 0; }

dr_status dr_grid_report_cell(const dr_grid_report* report, size_t index, dr_grid_cell* out) {
  return guard([&] {
    require(report != nullptr && out != nullptr, "null argument");
    require(index < report->report.cells.size(), "cell index out of range");
    const auto& c = report->report.cells[index];
    out->condition = c.condition.c_str();
    out->profile = c.profile.c_str();
    out->feature = digitrec::feature_kind_name(c.feature);
    out->failed = c.failed ? 1 : 0;
    out->error = c.error.c_str();
    out->accuracy_pct = c.failed ? NAN : c.report.accuracy_pct;
    out->percentage = c.failed ? NAN : c.report.percentage;
    out->wer = c.failed ? NAN : c.report.wer;
  });
}

size_t dr_grid_report_ranking_count(const dr_grid_report* report) {
  return report ? report->report.ranking.size() : 0;
}

const char* dr_grid_report_ranking_at(const dr_grid_report* report, size_t index) {
  if (!report || index >= report->report.ranking.size()) return nullptr;
  return digitrec::feature_kind_name(report->report.ranking[index]);
}

dr_status dr_grid_emit(const dr_grid_report* report, const char* out_dir, size_t* num_files) {
  return guard([&] {
    require(report != nullptr && out_dir != nullptr, "null argument");
    const auto files = digitrec::emit_reports(report->report, out_dir);
    if (num_files) *num_files = files.size();
  });
}

}  // extern "C"
