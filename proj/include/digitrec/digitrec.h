#ifndef DIGITREC_DIGITREC_H
#define DIGITREC_DIGITREC_H

/* C interface to the digit recognition toolkit. Handles are opaque and owned
 * by the caller; every handle returned through an out parameter must be
 * released with its matching _free function. Functions report failure
 * through dr_status; dr_last_error() describes the most recent failure on
 * the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DR_API __declspec(dllexport)
#else
#define DR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dr_status {
  DR_OK = 0,
  DR_INVALID_ARGUMENT = 1,
  DR_IO_FAILURE = 2,
  DR_NOT_PCM = 3,
  DR_CORRUPT_HEADER = 4,
  DR_UNSUPPORTED_DEPTH = 5,
  DR_INVALID_RATE = 6,
  DR_SILENT_NOISE = 7,
  DR_RATE_MISMATCH = 8,
  DR_INVALID_FFT_SIZE = 9,
  DR_LAG_TOO_LARGE = 10,
  DR_NEGATIVE_FREQUENCY = 11,
  DR_TOO_FEW_BINS = 12,
  DR_CORRUPT_FEATURE_FILE = 13,
  DR_KIND_MISMATCH = 14,
  DR_EMPTY_TRAINING_SET = 15,
  DR_DIM_MISMATCH = 16,
  DR_SIGNATURE_MISMATCH = 17,
  DR_EMPTY_OBSERVATION = 18,
  DR_NO_LEGAL_PATH = 19,
  DR_CORRUPT_MODEL = 20,
  DR_VERSION_MISMATCH = 21,
  DR_ZERO_REFERENCE = 22,
  DR_EMPTY_RESULTS = 23,
  DR_EMPTY_REPORT = 24,
  DR_CONFIG_ERROR = 25,
  DR_INTERNAL = 26
} dr_status;

/* Short symbolic name such as "CorruptHeader". Never NULL. */
DR_API const char* dr_status_name(dr_status status);
/* Message of the last failed call on this thread; "" after a success. */
DR_API const char* dr_last_error(void);
DR_API const char* dr_version(void);
/* DIGITREC_THREADS when set to a positive integer, else 1. */
DR_API unsigned dr_default_threads(void);

/* Encoding profiles and bit rates. */

DR_API dr_status dr_bit_rate(int bit_depth, int sample_rate, uint64_t* out_bps);
/* Writes a NUL-terminated display string such as "705 kbps". */
DR_API dr_status dr_bit_rate_display(uint64_t bps, char* buf, size_t buf_size);
/* Builtin catalog. The label pointer stays valid for the process lifetime. */
DR_API size_t dr_profile_count(void);
DR_API dr_status dr_profile_at(size_t index, const char** label, int* bit_depth, int* sample_rate);
DR_API dr_status dr_profile_find(const char* label, int* bit_depth, int* sample_rate);

/* Audio. */

typedef struct dr_audio dr_audio;

DR_API dr_status dr_audio_create(const double* samples, size_t count, int sample_rate, int bit_depth,
                                 dr_audio** out);
DR_API dr_status dr_audio_read(const char* path, dr_audio** out);
DR_API dr_status dr_audio_write(const dr_audio* audio, const char* path, int bit_depth);
DR_API void dr_audio_free(dr_audio* audio);
DR_API size_t dr_audio_length(const dr_audio* audio);
DR_API int dr_audio_sample_rate(const dr_audio* audio);
DR_API int dr_audio_bit_depth(const dr_audio* audio);
DR_API const double* dr_audio_samples(const dr_audio* audio);
DR_API dr_status dr_audio_resample(const dr_audio* audio, int target_rate, dr_audio** out);
DR_API dr_status dr_audio_requantize(const dr_audio* audio, int bit_depth, dr_audio** out);

/* Corpus. Manifests are JSON lines with paths relative to their directory. */

DR_API dr_status dr_synth_corpus(uint64_t seed, size_t train_per_digit, size_t test_per_digit, const char* out_dir,
                                 size_t* num_entries);
/* condition is "clean", "fan" or "random". A negative or non-finite snr_db
 * picks the condition default; noise_wav may be NULL for builtin noise. */
DR_API dr_status dr_degrade_corpus(const char* manifest, const char* profile, const char* condition, double snr_db,
                                   const char* noise_wav, uint64_t seed, unsigned threads, const char* out_dir,
                                   size_t* num_entries);

/* Features. config_path may be NULL; otherwise its [frame] and [feature]
 * sections override the defaults. */

typedef struct dr_features dr_features;

DR_API dr_status dr_features_extract(const dr_audio* audio, const char* feature, const char* config_path,
                                     dr_features** out);
DR_API dr_status dr_features_read(const char* path, dr_features** out);
DR_API dr_status dr_features_write(const dr_features* features, const char* path);
DR_API void dr_features_free(dr_features* features);
DR_API size_t dr_features_frames(const dr_features* features);
DR_API size_t dr_features_dim(const dr_features* features);
/* Row-major frames x dim values. */
DR_API const double* dr_features_data(const dr_features* features);
DR_API const char* dr_features_kind(const dr_features* features);

DR_API dr_status dr_extract_corpus(const char* manifest, const char* feature, const char* config_path,
                                   unsigned threads, const char* out_dir, size_t* num_files);

/* Training and recognition. */

typedef struct dr_train_options {
  size_t num_states;
  size_t num_mixtures;
  size_t max_iters;
  double tol;
} dr_train_options;

DR_API dr_train_options dr_train_options_default(void);
DR_API dr_status dr_train_models(const char* features_dir, const char* manifest, const dr_train_options* options,
                                 unsigned threads, const char* out_dir, size_t* num_models);

typedef struct dr_eval_summary {
  size_t trials;
  size_t correct;
  size_t substitutions;
  size_t deletions;
  size_t insertions;
  size_t reference_words;
  double wer;
  double accuracy_pct;
  double percentage;
} dr_eval_summary;

/* Writes the CSV report, <report>.txt and <report>.results.tsv. */
DR_API dr_status dr_recognize_corpus(const char* models_dir, const char* features_dir, const char* manifest,
                                     const char* report_path, double verdict_threshold, unsigned threads,
                                     dr_eval_summary* out);

/* Scoring. */

typedef struct dr_score {
  size_t substitutions;
  size_t deletions;
  size_t insertions;
  size_t reference_words;
  size_t sentences;
  double wer;
} dr_score;

/* Whitespace-separated word sequences. */
DR_API dr_status dr_score_words(const char* reference, const char* hypothesis, dr_score* out);
/* Lines of "reference<TAB>hypothesis". */
DR_API dr_status dr_score_results(const char* path, dr_score* out);
/* Line-aligned reference and hypothesis files. */
DR_API dr_status dr_score_files(const char* reference_path, const char* hypothesis_path, dr_score* out);

/* Experiment grid. */

typedef struct dr_grid_config dr_grid_config;
typedef struct dr_grid_report dr_grid_report;

DR_API dr_status dr_grid_config_default(dr_grid_config** out);
DR_API dr_status dr_grid_config_load(const char* path, dr_grid_config** out);
DR_API void dr_grid_config_free(dr_grid_config* config);
DR_API dr_status dr_grid_config_set_seed(dr_grid_config* config, uint64_t seed);
DR_API dr_status dr_grid_config_set_threads(dr_grid_config* config, unsigned threads);
DR_API dr_status dr_grid_config_set_train_condition(dr_grid_config* config, const char* condition);
DR_API dr_status dr_grid_config_set_synthetic(dr_grid_config* config, size_t train_per_digit, size_t test_per_digit);
DR_API dr_status dr_grid_config_set_manifest(dr_grid_config* config, const char* manifest);
/* Output directory named by the config file ("out"), or "" if unset. */
DR_API const char* dr_grid_config_out_dir(const dr_grid_config* config);

DR_API dr_status dr_grid_run(const dr_grid_config* config, dr_grid_report** out);
DR_API void dr_grid_report_free(dr_grid_report* report);

typedef struct dr_grid_cell {
  const char* condition;
  const char* profile;
  const char* feature;
  int failed;
  const char* error;
  double accuracy_pct;
  double percentage;
  double wer;
} dr_grid_cell;

DR_API size_t dr_grid_report_cell_count(const dr_grid_report* report);
/* Strings point into the report and live until it is freed. */
DR_API dr_status dr_grid_report_cell(const dr_grid_report* report, size_t index, dr_grid_cell* out);
DR_API size_t dr_grid_report_ranking_count(const dr_grid_report* report);
DR_API const char* dr_grid_report_ranking_at(const dr_grid_report* report, size_t index);
DR_API dr_status dr_grid_emit(const dr_grid_report* report, const char* out_dir, size_t* num_files);

#ifdef __cplusplus
}
#endif

#endif
