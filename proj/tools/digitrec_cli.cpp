// digitrec: command-line front end over the C API.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error. Failures print a
// single line to stderr: "error: <Status>: <message>" or "usage: <message>".

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "digitrec/digitrec.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

const std::vector<std::string> kFeatures = {"mfcc", "lpc", "plp", "fbank", "melspec"};
const std::vector<std::string> kConditions = {"clean", "fan", "random"};

int report(dr_status status) {
  if (status == DR_OK) return 0;
  std::string msg = dr_last_error();
  for (char& c : msg) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::fprintf(stderr, "error: %s: %s\n", dr_status_name(status), msg.c_str());
  return kExitRuntime;
}

struct Common {
  unsigned threads = 0;
  unsigned resolved() const { return threads > 0 ? threads : dr_default_threads(); }
};

void add_threads(CLI::App* cmd, Common& common) {
  cmd->add_option("--threads", common.threads, "Worker threads (default: DIGITREC_THREADS or 1)")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isolated digit recognition toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dr_version()));

  Common common;
  int exit_code = 0;

  // synth-corpus
  auto* synth = app.add_subcommand("synth-corpus", "Generate the seeded synthetic digit corpus");
  std::uint64_t synth_seed = 1234;
  std::string synth_out;
  std::size_t train_per_digit = 20, test_per_digit = 10;
  synth->add_option("--seed", synth_seed, "Corpus seed");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--train-per-digit", train_per_digit, "Training tokens per digit")->check(CLI::PositiveNumber);
  synth->add_option("--test-per-digit", test_per_digit, "Test tokens per digit")->check(CLI::PositiveNumber);
  synth->callback([&] {
    std::size_t n = 0;
    exit_code = report(dr_synth_corpus(synth_seed, train_per_digit, test_per_digit, synth_out.c_str(), &n));
    if (exit_code == 0) std::printf("entries=%zu manifest=%s/manifest.jsonl\n", n, synth_out.c_str());
  });

  // degrade
  auto* degrade = app.add_subcommand("degrade", "Convert a corpus to a profile and noise condition");
  std::string deg_manifest, deg_profile, deg_condition = "clean", deg_out, deg_noise;
  double deg_snr = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t deg_seed = 1234;
  degrade->add_option("--manifest", deg_manifest, "Input manifest")->required();
  degrade->add_option("--profile", deg_profile, "Target encoding profile label")->required();
  degrade->add_option("--condition", deg_condition, "Noise condition")->check(CLI::IsMember(kConditions));
  degrade->add_option("--snr", deg_snr, "SNR in dB (default: fan 20, random 10)")->check(CLI::NonNegativeNumber);
  degrade->add_option("--noise-wav", deg_noise, "Recorded noise instead of the builtin generator");
  degrade->add_option("--seed", deg_seed, "Noise seed");
  degrade->add_option("--out", deg_out, "Output directory")->required();
  add_threads(degrade, common);
  degrade->callback([&] {
    std::size_t n = 0;
    exit_code = report(dr_degrade_corpus(deg_manifest.c_str(), deg_profile.c_str(), deg_condition.c_str(), deg_snr,
                                         deg_noise.empty() ? nullptr : deg_noise.c_str(), deg_seed, common.resolved(),
                                         deg_out.c_str(), &n));
    if (exit_code == 0) std::printf("entries=%zu manifest=%s/manifest.jsonl\n", n, deg_out.c_str());
  });

  // extract
  auto* extract = app.add_subcommand("extract", "Extract features for every manifest entry");
  std::string ext_manifest, ext_feature, ext_config, ext_out;
  extract->add_option("--manifest", ext_manifest, "Input manifest")->required();
  extract->add_option("--feature", ext_feature, "Feature kind")->required()->check(CLI::IsMember(kFeatures));
  extract->add_option("--config", ext_config, "Config file with [frame] and [feature] sections");
  extract->add_option("--out", ext_out, "Output directory")->required();
  add_threads(extract, common);
  extract->callback([&] {
    std::size_t n = 0;
    exit_code = report(dr_extract_corpus(ext_manifest.c_str(), ext_feature.c_str(),
                                         ext_config.empty() ? nullptr : ext_config.c_str(), common.resolved(),
                                         ext_out.c_str(), &n));
    if (exit_code == 0) std::printf("files=%zu\n", n);
  });

  // train
  auto* train = app.add_subcommand("train", "Train one HMM per digit on the train split");
  std::string tr_features, tr_manifest, tr_out;
  dr_train_options tr_opts = dr_train_options_default();
  train->add_option("--features", tr_features, "Feature directory")->required();
  train->add_option("--manifest", tr_manifest, "Manifest")->required();
  train->add_option("--states", tr_opts.num_states, "Emitting states per model")->check(CLI::PositiveNumber);
  train->add_option("--mixtures", tr_opts.num_mixtures, "Gaussians per state")->check(CLI::PositiveNumber);
  train->add_option("--iters", tr_opts.max_iters, "Maximum Baum-Welch iterations");
  train->add_option("--tol", tr_opts.tol, "Stop when the log-likelihood gain falls below this");
  train->add_option("--out", tr_out, "Model directory")->required();
  add_threads(train, common);
  train->callback([&] {
    std::size_t n = 0;
    exit_code = report(dr_train_models(tr_features.c_str(), tr_manifest.c_str(), &tr_opts, common.resolved(),
                                       tr_out.c_str(), &n));
    if (exit_code == 0) std::printf("models=%zu\n", n);
  });

  // recognize
  auto* recog = app.add_subcommand("recognize", "Recognize the test split and write a report");
  std::string rc_models, rc_features, rc_manifest, rc_report;
  double rc_threshold = 0.5;
  recog->add_option("--models", rc_models, "Model directory")->required();
  recog->add_option("--features", rc_features, "Feature directory")->required();
  recog->add_option("--manifest", rc_manifest, "Manifest")->required();
  recog->add_option("--report", rc_report, "Report CSV path")->required();
  recog->add_option("--threshold", rc_threshold, "Per-digit rate needed for a Correct verdict")
      ->check(CLI::Range(0.0, 1.0));
  add_threads(recog, common);
  recog->callback([&] {
    dr_eval_summary s{};
    exit_code = report(dr_recognize_corpus(rc_models.c_str(), rc_features.c_str(), rc_manifest.c_str(),
                                           rc_report.c_str(), rc_threshold, common.resolved(), &s));
    if (exit_code == 0) {
      std::printf("trials=%zu correct=%zu accuracy=%.2f percentage=%.1f WER=%.4f\n", s.trials, s.correct,
                  s.accuracy_pct, s.percentage, s.wer);
    }
  });

  // score
  auto* score = app.add_subcommand("score", "Word error rate of reference and hypothesis word sequences");
  std::string sc_results, sc_ref, sc_hyp;
  auto* results_opt = score->add_option("--results", sc_results, "Lines of reference<TAB>hypothesis");
  auto* ref_opt = score->add_option("--ref", sc_ref, "Reference file, one utterance per line");
  auto* hyp_opt = score->add_option("--hyp", sc_hyp, "Hypothesis file, line-aligned with --ref");
  ref_opt->needs(hyp_opt);
  hyp_opt->needs(ref_opt);
  results_opt->excludes(ref_opt);
  results_opt->excludes(hyp_opt);
  score->callback([&] {
    if (sc_results.empty() && sc_ref.empty()) throw CLI::RequiredError("--results or --ref/--hyp");
    dr_score s{};
    exit_code = report(sc_results.empty() ? dr_score_files(sc_ref.c_str(), sc_hyp.c_str(), &s)
                                          : dr_score_results(sc_results.c_str(), &s));
    if (exit_code == 0) {
      std::printf("S=%zu D=%zu I=%zu N=%zu WER=%.4f\n", s.substitutions, s.deletions, s.insertions,
                  s.reference_words, s.wer);
    }
  });

  // bench
  auto* bench = app.add_subcommand("bench", "Run the experiment grid and write the reports");
  std::string b_config, b_out, b_train_condition, b_manifest;
  std::uint64_t b_seed = 0;
  std::size_t b_train = 0, b_test = 0;
  bench->add_option("--config", b_config, "Grid config file (default: builtin grid)");
  bench->add_option("--out", b_out, "Output directory (overrides the config)");
  auto* seed_opt = bench->add_option("--seed", b_seed, "Seed (overrides the config)");
  bench->add_option("--train-condition", b_train_condition, "Condition the models are trained on")
      ->check(CLI::IsMember(kConditions));
  bench->add_option("--manifest", b_manifest, "Use a recorded corpus instead of the synthetic one");
  bench->add_option("--train-per-digit", b_train, "Synthetic training tokens per digit")->check(CLI::PositiveNumber);
  bench->add_option("--test-per-digit", b_test, "Synthetic test tokens per digit")->check(CLI::PositiveNumber);
  add_threads(bench, common);
  bench->callback([&] {
    dr_grid_config* cfg = nullptr;
    dr_status st = b_config.empty() ? dr_grid_config_default(&cfg) : dr_grid_config_load(b_config.c_str(), &cfg);
    if (st == DR_OK && *seed_opt) st = dr_grid_config_set_seed(cfg, b_seed);
    if (st == DR_OK && common.threads > 0) st = dr_grid_config_set_threads(cfg, common.threads);
    if (st == DR_OK && !b_train_condition.empty()) st = dr_grid_config_set_train_condition(cfg, b_train_condition.c_str());
    if (st == DR_OK && (b_train > 0 || b_test > 0)) st = dr_grid_config_set_synthetic(cfg, b_train ? b_train : 20, b_test ? b_test : 10);
    if (st == DR_OK && !b_manifest.empty()) st = dr_grid_config_set_manifest(cfg, b_manifest.c_str());
    std::string out = b_out;
    if (st == DR_OK && out.empty()) out = dr_grid_config_out_dir(cfg);
    if (out.empty()) out = "grid-out";
    dr_grid_report* rep = nullptr;
    if (st == DR_OK) st = dr_grid_run(cfg, &rep);
    std::size_t files = 0;
    if (st == DR_OK) st = dr_grid_emit(rep, out.c_str(), &files);
    if (st == DR_OK) {
      std::size_t failed = 0;
      const std::size_t cells = dr_grid_report_cell_count(rep);
      for (std::size_t i = 0; i < cells; ++i) {
        dr_grid_cell cell{};
        if (dr_grid_report_cell(rep, i, &cell) == DR_OK && cell.failed) ++failed;
      }
      std::printf("cells=%zu failed=%zu files=%zu out=%s\nranking:", cells, failed, files, out.c_str());
      for (std::size_t i = 0; i < dr_grid_report_ranking_count(rep); ++i) {
        std::printf("%s%s", i ? " > " : " ", dr_grid_report_ranking_at(rep, i));
      }
      std::printf("\n");
    }
    dr_grid_report_free(rep);
    dr_grid_config_free(cfg);
    exit_code = report(st);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    std::fprintf(stderr, "usage: %s\n", msg.c_str());
    return kExitUsage;
  }
  return exit_code;
}
