// Acceptance suite. Prints one "PASS criterion N: ..." or "FAIL criterion N: ..."
// line per criterion and exits non-zero if any selected criterion fails.
//
//   acceptance                 all criteria
//   acceptance --criterion 7   one criterion

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "digitrec/audio.hpp"
#include "digitrec/corpus.hpp"
#include "digitrec/features.hpp"
#include "digitrec/frontend.hpp"
#include "digitrec/grid.hpp"
#include "digitrec/hmm.hpp"
#include "digitrec/scoring.hpp"
#include "model_util.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace digitrec;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> problems;

  // Records a failed check; only the first few are kept for the report.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (problems.size() < 5) problems.push_back(what);
  }
};

std::string fmt(double v, int digits = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

// 1. Bit-rate arithmetic.
Outcome criterion_bit_rate() {
  Outcome o;
  struct Row {
    const char* label;
    std::uint64_t bps;
    const char* display;
  };
  const Row rows[] = {{"pcm8-8k", 64000, "64000 bps"},
                      {"pcm8-16k", 128000, "128 kbps"},
                      {"pcm16-32k", 512000, "512 kbps"},
                      {"pcm16-44k1", 705600, "705 kbps"},
                      {"pcm24-48k", 1152000, "1.1 Mbps"}};
  const auto catalog = standard_format_profiles();
  o.require(catalog.size() == 5, "catalog does not have five profiles");
  for (std::size_t i = 0; i < 5 && i < catalog.size(); ++i) {
    const auto& p = catalog[i];
    o.require(p.label == rows[i].label, "profile " + std::to_string(i) + " is " + p.label);
    const auto bps = bit_rate(p);
    o.require(bps == rows[i].bps, p.label + " gives " + std::to_string(bps) + " bps");
    const auto shown = bit_rate_display(bps);
    o.require(shown == rows[i].display, p.label + " displays \"" + shown + "\"");
  }
  o.detail = "64000 128000 512000 705600 1152000 bps; 705 kbps, 1.1 Mbps";
  return o;
}

// 2. WER formula and exhaustive alignment oracle.
Outcome criterion_wer() {
  Outcome o;
  o.require(word_error_rate(1, 0, 0, 3) == 1.0 / 3.0, "wer(1,0,0,3) != 1/3");
  o.require(word_error_rate(0, 0, 0, 5) == 0.0, "wer(0,0,0,5) != 0");
  o.require(word_error_rate(1, 1, 1, 1) == 3.0, "wer(1,1,1,1) != 3");
  const std::vector<std::string> ref = {"one", "two", "three", "four"};
  o.require(align(ref, std::vector<std::string>{}) == EditCounts{0, 4, 0}, "empty hypothesis is not all deletions");
  o.require(align(std::vector<std::string>{"one", "two", "three"}, std::vector<std::string>{"one", "tree", "three"}) ==
                EditCounts{1, 0, 0},
            "one-substitution example");

  // Alignment depends only on which positions hold equal words, so every
  // pair over a 4-word alphabet is covered by labelling ref+hyp with a
  // restricted growth string of at most four distinct values.
  const std::vector<std::string> words = {"w0", "w1", "w2", "w3"};
  std::size_t pairs = 0;
  std::vector<int> seq;
  std::function<void(std::size_t, std::size_t, int)> grow = [&](std::size_t len, std::size_t split, int next) {
    if (seq.size() == len) {
      const std::vector<int> r(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(split));
      const std::vector<int> h(seq.begin() + static_cast<std::ptrdiff_t>(split), seq.end());
      std::vector<std::string> rs, hs;
      for (int v : r) rs.push_back(words[static_cast<std::size_t>(v)]);
      for (int v : h) hs.push_back(words[static_cast<std::size_t>(v)]);
      const auto got = align(rs, hs);
      const auto reachable = oracle::all_alignments(r, h);
      std::size_t best = std::numeric_limits<std::size_t>::max();
      for (std::size_t code = 0; code < reachable.size(); ++code) {
        if (!reachable[code]) continue;
        const auto [s, d, i] = oracle::unpack(code);
        best = std::min(best, s + d + i);
      }
      const std::size_t code = got.substitutions * 49 + got.deletions * 7 + got.insertions;
      const bool ok = got.total() == best && code < reachable.size() && reachable[code];
      if (!ok) {
        std::string text;
        for (int v : seq) text += std::to_string(v);
        o.require(false, "mismatch for ref/hyp split " + std::to_string(split) + " of " + text);
      }
      ++pairs;
      return;
    }
    for (int v = 0; v <= std::min(next, 3); ++v) {
      seq.push_back(v);
      grow(len, split, std::max(next, v + 1));
      seq.pop_back();
    }
  };
  for (std::size_t r = 0; r <= 6; ++r) {
    for (std::size_t h = 0; h <= 6; ++h) grow(r + h, r, 0);
  }
  o.detail = "hand cases exact; " + std::to_string(pairs) + " canonical pairs (lengths 0-6, 4 words) match the oracle";
  return o;
}

// 3. Forward and Viterbi against path enumeration.
Outcome criterion_hmm_oracle() {
  Outcome o;
  Rng rng(20240531);
  std::size_t models = 0, legal = 0;
  double worst = 0.0;
  while (legal < 1000) {
    const std::size_t n = 1 + rng.below(4);
    const std::size_t mix = 1 + rng.below(2);
    const std::size_t dim = 1 + rng.below(3);
    const std::size_t T = 1 + rng.below(6);
    const auto model = testutil::random_model(rng, n, mix, dim);
    const auto obs = testutil::random_features(rng, T, dim);
    const auto ref = oracle::enumerate_paths(model, obs);
    const double fwd = log_likelihood(model, obs);
    ++models;
    if (ref.total == -std::numeric_limits<double>::infinity()) {
      o.require(fwd == ref.total, "forward finite where no legal path exists");
      continue;
    }
    ++legal;
    const auto v = viterbi(model, obs);
    worst = std::max({worst, std::abs(fwd - ref.total), std::abs(v.log_prob - ref.best)});
    o.require(std::abs(fwd - ref.total) <= 1e-9, "forward differs by " + std::to_string(fwd - ref.total));
    o.require(std::abs(v.log_prob - ref.best) <= 1e-9, "Viterbi score differs by " + std::to_string(v.log_prob - ref.best));
    o.require(v.path == ref.best_path, "Viterbi path differs from the enumerated best path");
  }
  std::ostringstream os;
  os << models << " random models (" << legal << " with legal paths), max deviation " << worst << " log units";
  o.detail = os.str();
  return o;
}

// 4. Baum-Welch monotonicity on the synthetic corpus.
Outcome criterion_em() {
  Outcome o;
  const SynthSpec spec;
  const auto items = synthesize_corpus(spec);
  const auto labels = digit_vocabulary();
  std::size_t traces = 0;
  double worst_drop = 0.0;
  for (FeatureKind kind : all_feature_kinds()) {
    FeatureConfig fc;
    fc.kind = kind;
    std::map<std::string, std::vector<FeatureMatrix>> by_label;
    for (const auto& it : items) {
      if (it.entry.split != Split::kTrain) continue;
      by_label[it.entry.label].push_back(extract(it.audio, FrameConfig{}, fc));
    }
    for (const auto& label : labels) {
      const auto& data = by_label[label];
      const TrainOptions opts;
      const auto init = flat_start(data, opts.num_states, opts.num_mixtures, label, opts.variance_floor_scale);
      const auto res = baum_welch(init, data, 20, -std::numeric_limits<double>::infinity(), opts.min_occupancy);
      ++traces;
      o.require(res.trace.size() == 21, std::string(feature_kind_name(kind)) + "/" + label + " ran " +
                                            std::to_string(res.trace.size() - 1) + " iterations");
      for (std::size_t i = 1; i < res.trace.size(); ++i) {
        const double drop = res.trace[i - 1] - res.trace[i];
        worst_drop = std::max(worst_drop, drop);
        o.require(drop <= 1e-6, std::string(feature_kind_name(kind)) + "/" + label + " iteration " +
                                    std::to_string(i) + " decreased by " + std::to_string(drop));
      }
    }
  }
  std::ostringstream os;
  os << traces << " traces (10 digits x 5 kinds, 20 iterations each) non-decreasing; largest decrease " << worst_drop;
  o.detail = os.str();
  return o;
}

// 5. DSP oracles.
Outcome criterion_dsp() {
  Outcome o;
  Rng rng(5);
  double fft_err = 0.0, dct_err = 0.0, lpc_err = 0.0, ac_err = 0.0;
  for (std::size_t n = 1; n <= 1024; n *= 2) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<std::complex<double>> x(n);
      for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      auto fast = x;
      fft(fast);
      const auto slow = oracle::dft(x);
      double scale = 0.0;
      for (const auto& v : slow) scale = std::max(scale, std::abs(v));
      for (std::size_t k = 0; k < n; ++k) {
        const double e = std::abs(fast[k] - slow[k]) / std::max(scale, 1e-300);
        fft_err = std::max(fft_err, e);
      }
    }
  }
  o.require(fft_err <= 1e-9, "FFT relative error " + std::to_string(fft_err));

  for (std::size_t n : {1u, 2u, 5u, 12u, 13u, 26u, 40u, 64u}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto x = testutil::random_vector(rng, n, -10.0, 10.0);
      const auto fast = dct_ii(x);
      const auto slow = oracle::dct(x);
      for (std::size_t k = 0; k < n; ++k) dct_err = std::max(dct_err, std::abs(fast[k] - slow[k]));
    }
  }
  o.require(dct_err <= 1e-9, "DCT error " + std::to_string(dct_err));

  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t order = 1 + rng.below(16);
    const auto x = testutil::random_vector(rng, 200 + rng.below(400));
    const auto r = autocorrelation(x, order);
    const auto fast = levinson_durbin(r);
    const auto slow = oracle::lpc_direct(r);
    for (std::size_t i = 0; i < order; ++i) lpc_err = std::max(lpc_err, std::abs(fast.coeffs[i] - slow[i]));

    const auto r_slow = oracle::autocorrelation(x, order);
    for (std::size_t k = 0; k <= order; ++k) {
      ac_err = std::max(ac_err, std::abs(r[k] - r_slow[k]) / std::max(1.0, std::abs(r_slow[0])));
    }
  }
  o.require(lpc_err <= 1e-8, "Levinson-Durbin error " + std::to_string(lpc_err));
  o.require(ac_err <= 1e-12, "autocorrelation error " + std::to_string(ac_err));
  std::ostringstream os;
  os << "FFT " << fft_err << ", DCT " << dct_err << ", LPC " << lpc_err << ", autocorrelation " << ac_err;
  o.detail = os.str();
  return o;
}

// 6. Resampler anti-aliasing and pass band.
Outcome criterion_resampler() {
  Outcome o;
  const std::size_t n = 48000;
  const AudioBuffer high(testutil::sine(10000.0, 0.5, n, 48000), 48000);
  const auto down = resample(high, 16000);
  const double in_rms = rms(high.samples());
  const double out_rms = rms(down.samples());
  const double atten = 20.0 * std::log10(in_rms / std::max(out_rms, 1e-300));
  o.require(atten >= 40.0, "10 kHz tone attenuated only " + fmt(atten) + " dB");

  const AudioBuffer low(testutil::sine(1000.0, 0.5, n, 48000), 48000);
  const auto kept = resample(low, 16000);
  const auto ref = testutil::sine(1000.0, 0.5, kept.size(), 16000);
  double xy = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    xy += kept.samples()[i] * ref[i];
    xx += kept.samples()[i] * kept.samples()[i];
    yy += ref[i] * ref[i];
  }
  const double corr = xy / std::sqrt(xx * yy);
  o.require(kept.size() == 16000, "output length " + std::to_string(kept.size()));
  o.require(corr >= 0.999, "1 kHz correlation " + fmt(corr, 6));
  o.detail = "10 kHz attenuated " + fmt(atten) + " dB; 1 kHz correlation " + fmt(corr, 6);
  return o;
}

GridReport run_default_grid(unsigned threads) {
  auto cfg = GridConfig::defaults();
  cfg.threads = threads;
  return run_grid(cfg);
}

// 7. Qualitative reproduction on the default grid.
Outcome criterion_end_to_end(unsigned threads) {
  Outcome o;
  const auto report = run_default_grid(threads);
  const auto cfg = GridConfig::defaults();
  o.require(cfg.synth.train_per_digit >= 20 && cfg.synth.test_per_digit >= 10, "corpus smaller than 20/10 per digit");
  auto acc = [&](const std::string& cond, const std::string& profile, FeatureKind k) {
    const auto* c = report.find(cond, profile, k);
    if (c == nullptr || c->failed) {
      o.require(false, cond + "/" + profile + "/" + feature_kind_name(k) + " missing or failed" +
                           (c ? ": " + c->error : std::string()));
      return std::numeric_limits<double>::quiet_NaN();
    }
    return c->report.accuracy_pct;
  };
  const double mfcc = acc("clean", "pcm24-48k", FeatureKind::kMfcc);
  o.require(mfcc >= 90.0, "(a) clean 24/48 MFCC accuracy " + fmt(mfcc));
  std::size_t checks_b = 0, checks_c = 0;
  for (FeatureKind k : all_feature_kinds()) {
    for (const auto& p : cfg.profiles) {
      const double clean = acc("clean", p.label, k), noisy = acc("random", p.label, k);
      o.require(noisy <= clean, std::string("(b) ") + feature_kind_name(k) + " at " + p.label + ": random " +
                                    fmt(noisy) + " > clean " + fmt(clean));
      ++checks_b;
    }
    const double lo = acc("clean", "pcm8-8k", k), hi = acc("clean", "pcm24-48k", k);
    o.require(lo <= hi + 5.0, std::string("(c) ") + feature_kind_name(k) + ": 8/8k " + fmt(lo) + " > 24/48 " +
                                  fmt(hi) + " + 5");
    ++checks_c;
  }
  std::string ranking;
  for (FeatureKind k : report.ranking) ranking += std::string(ranking.empty() ? "" : " > ") + feature_kind_display(k);
  o.detail = "(a) MFCC clean 24/48 " + fmt(mfcc) + "%; (b) random <= clean in " + std::to_string(checks_b) +
             " kind/profile pairs; (c) 8/8k <= 24/48 + 5 for " + std::to_string(checks_c) +
             " kinds; ranking (informational) " + ranking;
  return o;
}

std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out[std::filesystem::relative(e.path(), root).string()] = ss.str();
  }
  return out;
}

// 8. Determinism across runs and thread counts.
Outcome criterion_determinism() {
  Outcome o;
  testutil::TempDir a("accept-det-a"), b("accept-det-b");
  emit_reports(run_default_grid(1), a.path());
  emit_reports(run_default_grid(3), b.path());
  const auto ta = read_tree(a.path()), tb = read_tree(b.path());
  o.require(!ta.empty(), "no report files written");
  o.require(ta.size() == tb.size(), "file counts differ");
  std::size_t bytes = 0;
  for (const auto& [name, body] : ta) {
    const auto it = tb.find(name);
    o.require(it != tb.end(), name + " missing from the second run");
    if (it != tb.end()) o.require(it->second == body, name + " differs between runs");
    bytes += body.size();
  }
  o.detail = std::to_string(ta.size()) + " report files (" + std::to_string(bytes) +
             " bytes) identical for 1 and 3 threads";
  return o;
}

// 9. Condition table shape.
Outcome criterion_report_shape(unsigned threads) {
  Outcome o;
  testutil::TempDir dir("accept-shape");
  const auto report = run_default_grid(threads);
  emit_reports(report, dir.path());
  const std::vector<std::string> expected = {"One", "Two", "Three", "Four", "Five",
                                             "Six", "Seven", "Eight", "Nine", "Zero", "Percentage"};
  std::size_t tables = 0;
  for (const auto& cond : {"clean", "fan", "random"}) {
    const auto path = dir.path() / (std::string("table_") + cond + ".txt");
    std::ifstream in(path);
    o.require(static_cast<bool>(in), path.filename().string() + " not written");
    if (!in) continue;
    ++tables;
    std::vector<std::string> rows;
    std::string line;
    std::getline(in, line);  // "# Condition: ..." caption
    o.require(line.rfind("# Condition: ", 0) == 0, std::string(cond) + " caption is \"" + line + "\"");
    std::getline(in, line);  // column header
    o.require(line.rfind("Digit", 0) == 0, std::string(cond) + " header is \"" + line + "\"");
    while (std::getline(in, line)) rows.push_back(line.substr(0, line.find(' ')));
    o.require(rows == expected, std::string(cond) + " rows are not One..Zero + Percentage");
  }
  o.require(tables == 3, "expected three condition tables");
  o.detail = std::to_string(tables) + " tables, each with rows One..Zero and Percentage";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  unsigned threads = default_thread_count();
  app.add_option("--criterion", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
  app.add_option("--threads", threads, "Worker threads for grid runs")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"bit-rate arithmetic", criterion_bit_rate},
      {"WER formula and alignment oracle", criterion_wer},
      {"HMM oracle equivalence", criterion_hmm_oracle},
      {"EM monotonicity", criterion_em},
      {"DSP oracles", criterion_dsp},
      {"resampler Nyquist contract", criterion_resampler},
      {"end-to-end qualitative reproduction", [&] { return criterion_end_to_end(threads); }},
      {"grid determinism", criterion_determinism},
      {"report shape", [&] { return criterion_report_shape(threads); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (only != 0 && only != number) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.problems.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string text = out.pass ? out.detail : "";
    for (const auto& p : out.problems) text += (text.empty() ? "" : "; ") + p;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", number, criteria[i].first,
                text.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
