#include <cmath>
#include <functional>
#include <limits>

#include "digitrec/error.hpp"
#include "digitrec/hmm.hpp"
#include "doctest.h"
#include "model_util.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace digitrec;
using testutil::empty_features;
using testutil::random_features;
using testutil::random_model;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::kOk;
}

FeatureMatrix gaussian_frames(Rng& rng, std::size_t frames, const std::vector<double>& mean, double sd) {
  auto f = empty_features(mean.size());
  std::vector<double> row(mean.size());
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t d = 0; d < row.size(); ++d) row[d] = mean[d] + sd * rng.normal();
    f.append_row(row);
  }
  return f;
}

void check_model_invariants(const HmmModel& m) {
  m.check_invariants(1e-9);
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    const auto& g = m.state(s);
    double w = 0.0;
    for (double v : g.weights) w += v;
    CHECK(w == doctest::Approx(1.0).epsilon(1e-9));
    for (const auto& var : g.variances) {
      for (std::size_t d = 0; d < var.size(); ++d) CHECK(var[d] >= m.variance_floor()[d]);
    }
  }
}

}  // namespace

TEST_CASE("flat start") {
  Rng rng(101);
  SUBCASE("one utterance gives its frame mean") {
    const auto f = gaussian_frames(rng, 40, {1.0, -2.0, 0.5}, 1.0);
    const auto m = flat_start(std::vector<FeatureMatrix>{f}, 1, 1);
    for (std::size_t d = 0; d < 3; ++d) {
      double mean = 0.0;
      for (std::size_t t = 0; t < 40; ++t) mean += f.row(t)[d];
      CHECK(m.state(0).means[0][d] == doctest::Approx(mean / 40.0).epsilon(1e-12));
    }
  }
  SUBCASE("two utterances give the frame-weighted mean") {
    const auto a = gaussian_frames(rng, 10, {0.0}, 1.0);
    const auto b = gaussian_frames(rng, 30, {5.0}, 1.0);
    double sa = 0.0, sb = 0.0;
    for (std::size_t t = 0; t < 10; ++t) sa += a.row(t)[0];
    for (std::size_t t = 0; t < 30; ++t) sb += b.row(t)[0];
    const auto m = flat_start(std::vector<FeatureMatrix>{a, b}, 3, 1);
    for (std::size_t s = 0; s < 3; ++s) CHECK(m.state(s).means[0][0] == doctest::Approx((sa + sb) / 40.0).epsilon(1e-12));
    check_model_invariants(m);
    for (std::size_t s = 0; s < 3; ++s) CHECK(m.transition(s + 1, s + 1) == 0.5);
  }
  SUBCASE("mixture splitting") {
    const auto f = gaussian_frames(rng, 50, {0.0, 1.0}, 2.0);
    const auto m = flat_start(std::vector<FeatureMatrix>{f}, 2, 4);
    check_model_invariants(m);
    CHECK(m.state(0).num_components() == 4);
    CHECK(m.state(0).means[0] != m.state(0).means[1]);
  }
  SUBCASE("errors") {
    CHECK(code_of([] { flat_start(std::vector<FeatureMatrix>{}, 3, 1); }) == Errc::kEmptyTrainingSet);
    const auto a = gaussian_frames(rng, 10, {0.0, 0.0}, 1.0);
    const auto b = gaussian_frames(rng, 10, {0.0, 0.0, 0.0}, 1.0);
    CHECK(code_of([&] { flat_start(std::vector<FeatureMatrix>{a, b}, 3, 1); }) == Errc::kDimMismatch);
  }
}

TEST_CASE("single-state closed form") {
  for (double a : {0.1, 0.5, 0.9}) {
    HmmModel m("x", 1, 1, empty_features(2).signature());
    m.set_self_loop(0, a);
    m.state(0).means[0] = {0.3, -0.7};
    m.state(0).variances[0] = {0.5, 2.0};
    for (std::size_t T : {1u, 2u, 7u, 50u}) {
      auto f = empty_features(2);
      for (std::size_t t = 0; t < T; ++t) f.append_row(std::vector<double>{1.0, 1.0});
      const double lg = oracle::log_mixture(m.state(0), f.row(0).data(), 2);
      const double expect = static_cast<double>(T) * lg + static_cast<double>(T - 1) * std::log(a) + std::log(1.0 - a);
      CHECK(log_likelihood(m, f) == doctest::Approx(expect).epsilon(1e-12));
      const auto v = viterbi(m, f);
      CHECK(v.path == std::vector<std::size_t>(T, 0));
      CHECK(v.log_prob == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("forward and Viterbi match path enumeration") {
  Rng rng(103);
  int compared = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + rng.below(4);
    const std::size_t mix = 1 + rng.below(2);
    const std::size_t dim = 1 + rng.below(3);
    const std::size_t T = 1 + rng.below(6);
    const auto model = random_model(rng, n, mix, dim);
    const auto obs = random_features(rng, T, dim);
    const auto ref = oracle::enumerate_paths(model, obs);
    if (T < n) {
      CHECK(ref.total == -std::numeric_limits<double>::infinity());
      CHECK(log_likelihood(model, obs) == -std::numeric_limits<double>::infinity());
      CHECK(code_of([&] { viterbi(model, obs); }) == Errc::kNoLegalPath);
      continue;
    }
    ++compared;
    const double fwd = log_likelihood(model, obs);
    CHECK(std::abs(fwd - ref.total) <= 1e-9);
    const auto v = viterbi(model, obs);
    CHECK(std::abs(v.log_prob - ref.best) <= 1e-9);
    CHECK(v.path == ref.best_path);
    CHECK(v.log_prob <= fwd + 1e-12);
    CHECK(log_likelihood(model, obs) == fwd);
  }
  CHECK(compared > 200);
}

TEST_CASE("Viterbi topology") {
  Rng rng(107);
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto model = random_model(rng, n, 1, 2);
    const auto v = viterbi(model, random_features(rng, n, 2));
    for (std::size_t t = 0; t < n; ++t) CHECK(v.path[t] == t);
    const auto longer = viterbi(model, random_features(rng, 3 * n + 4, 2));
    CHECK(longer.path.front() == 0);
    CHECK(longer.path.back() == n - 1);
    for (std::size_t t = 1; t < longer.path.size(); ++t) {
      const auto step = longer.path[t] - longer.path[t - 1];
      CHECK((step == 0 || step == 1));
    }
  }
}

TEST_CASE("observation errors") {
  Rng rng(109);
  const auto model = random_model(rng, 3, 1, 2);
  CHECK(code_of([&] { log_likelihood(model, empty_features(2)); }) == Errc::kEmptyObservation);
  CHECK(code_of([&] { log_likelihood(model, random_features(rng, 5, 3)); }) == Errc::kSignatureMismatch);
  FeatureMatrix other(FeatureKind::kLpc, 2, 10000);
  other.append_row(std::vector<double>{0.0, 0.0});
  CHECK(code_of([&] { viterbi(model, other); }) == Errc::kSignatureMismatch);
}

TEST_CASE("Baum-Welch single Gaussian is the ML estimate") {
  Rng rng(113);
  std::vector<FeatureMatrix> data;
  for (int u = 0; u < 5; ++u) data.push_back(gaussian_frames(rng, 30 + 7 * u, {2.0, -1.0}, 0.7));
  std::vector<double> sum(2, 0.0), sq(2, 0.0);
  double count = 0.0;
  for (const auto& f : data) {
    for (std::size_t t = 0; t < f.num_frames(); ++t) {
      for (std::size_t d = 0; d < 2; ++d) {
        sum[d] += f.row(t)[d];
        sq[d] += f.row(t)[d] * f.row(t)[d];
      }
    }
    count += static_cast<double>(f.num_frames());
  }
  const auto init = flat_start(data, 1, 1);
  const auto res = baum_welch(init, data, 10, 1e-6);
  for (std::size_t d = 0; d < 2; ++d) {
    const double mean = sum[d] / count;
    const double var = std::max(sq[d] / count - mean * mean, res.model.variance_floor()[d]);
    CHECK(res.model.state(0).means[0][d] == doctest::Approx(mean).epsilon(1e-9));
    CHECK(res.model.state(0).variances[0][d] == doctest::Approx(var).epsilon(1e-9));
  }
  // ML self-loop for a single state: (frames - utterances) / frames.
  CHECK(res.model.transition(1, 1) == doctest::Approx((count - 5.0) / count).epsilon(1e-9));
}

TEST_CASE("Baum-Welch monotonicity and stochasticity") {
  Rng rng(127);
  std::vector<FeatureMatrix> data;
  for (int u = 0; u < 12; ++u) {
    auto f = gaussian_frames(rng, 8 + rng.below(10), {-3.0, 0.0}, 0.8);
    const auto tail = gaussian_frames(rng, 8 + rng.below(10), {3.0, 1.0}, 0.5);
    for (std::size_t t = 0; t < tail.num_frames(); ++t) f.append_row(tail.row(t));
    data.push_back(std::move(f));
  }
  for (std::size_t mix : {1u, 2u}) {
    const auto res = baum_welch(flat_start(data, 2, mix), data, 20, -std::numeric_limits<double>::infinity());
    REQUIRE(res.trace.size() == 21);
    for (std::size_t i = 1; i < res.trace.size(); ++i) CHECK(res.trace[i] >= res.trace[i - 1] - 1e-6);
    CHECK(res.trace.back() > res.trace.front());
    check_model_invariants(res.model);
    // The two halves end up in different states.
    CHECK(res.model.state(0).means[0][0] < 0.0);
    CHECK(res.model.state(1).means[0][0] > 0.0);
  }
  // A converged model is a fixed point.
  const auto converged = baum_welch(flat_start(data, 2, 1), data, 500, 1e-9);
  const auto step = baum_welch(converged.model, data, 1, 1e-4);
  CHECK(std::abs(step.trace[1] - step.trace[0]) < 1e-4);
}

TEST_CASE("Baum-Welch bookkeeping") {
  Rng rng(131);
  std::vector<FeatureMatrix> data = {gaussian_frames(rng, 20, {0.0}, 1.0), gaussian_frames(rng, 2, {0.0}, 1.0)};
  const auto res = baum_welch(flat_start(data, 4, 1), data, 3, 1e-4);
  CHECK(res.skipped_utterances == 1);
  CHECK(code_of([&] { baum_welch(flat_start(data, 4, 1), std::vector<FeatureMatrix>{}, 3, 1e-4); }) ==
        Errc::kEmptyTrainingSet);
  const std::vector<FeatureMatrix> too_short = {gaussian_frames(rng, 2, {0.0}, 1.0)};
  CHECK(code_of([&] { baum_welch(flat_start(too_short, 4, 1), too_short, 3, 1e-4); }) == Errc::kEmptyTrainingSet);
  const std::vector<FeatureMatrix> wrong = {gaussian_frames(rng, 20, {0.0, 0.0}, 1.0)};
  CHECK(code_of([&] { baum_welch(flat_start(data, 4, 1), wrong, 3, 1e-4); }) == Errc::kSignatureMismatch);
}

TEST_CASE("recognition") {
  Rng rng(137);
  SUBCASE("single model wins") {
    WordModelSet set;
    set.add(random_model(rng, 2, 1, 2));
    CHECK(recognize(set, random_features(rng, 6, 2)).label == "w");
  }
  SUBCASE("exact tie goes to the first label") {
    auto m = random_model(rng, 2, 1, 2);
    WordModelSet set;
    m.set_label("zebra");
    set.add(m);
    m.set_label("apple");
    set.add(m);
    const auto r = recognize(set, random_features(rng, 6, 2));
    CHECK(r.label == "apple");
    CHECK(r.scores[0].second == r.scores[1].second);
    CHECK(code_of([&] { set.add(m); }) == Errc::kInvalidArgument);
  }
  SUBCASE("signature mismatch") {
    WordModelSet set;
    set.add(random_model(rng, 2, 1, 2));
    CHECK(code_of([&] { set.add(random_model(rng, 2, 1, 3)); }) == Errc::kSignatureMismatch);
    CHECK(code_of([&] { recognize(set, random_features(rng, 6, 3)); }) == Errc::kSignatureMismatch);
  }
  SUBCASE("Monte-Carlo: samples of A are recognized as A") {
    auto truth_a = random_model(rng, 3, 1, 3);
    auto truth_b = random_model(rng, 3, 1, 3);
    std::vector<FeatureMatrix> train_a, train_b;
    for (int i = 0; i < 30; ++i) {
      train_a.push_back(testutil::sample_model(rng, truth_a));
      train_b.push_back(testutil::sample_model(rng, truth_b));
    }
    TrainOptions opts;
    opts.num_states = 3;
    WordModelSet set;
    set.add(train_word_model("A", train_a, opts).model);
    set.add(train_word_model("B", train_b, opts).model);
    int wins = 0;
    for (int i = 0; i < 100; ++i) {
      const auto f = testutil::sample_model(rng, truth_a);
      if (f.num_frames() >= 3 && recognize(set, f).label == "A") ++wins;
    }
    CHECK(wins >= 95);
  }
}

TEST_CASE("long utterances stay finite") {
  Rng rng(139);
  const auto model = random_model(rng, 5, 2, 13);
  auto f = empty_features(13);
  std::vector<double> row(13);
  for (int t = 0; t < 10000; ++t) {
    for (auto& v : row) v = rng.uniform(-3.0, 3.0);
    f.append_row(row);
  }
  const double ll = log_likelihood(model, f);
  CHECK(std::isfinite(ll));
  const auto v = viterbi(model, f);
  CHECK(std::isfinite(v.log_prob));
  CHECK(v.log_prob <= ll);
}

TEST_CASE("model files") {
  testutil::TempDir dir("hmm");
  Rng rng(149);
  auto m = random_model(rng, 4, 2, 5);
  m.set_label("seven");
  const auto path = dir / "seven.dhm";
  save_model(m, path);
  const auto back = load_model(path);
  CHECK(back == m);
  CHECK(encode_model(back) == encode_model(m));

  auto bytes = encode_model(m);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "DHM1");
  auto truncated = bytes;
  truncated.resize(truncated.size() - 9);
  CHECK(code_of([&] { decode_model(truncated); }) == Errc::kCorruptModel);
  auto future = bytes;
  future[4] = static_cast<std::uint8_t>(kModelFormatVersion + 1);
  CHECK(code_of([&] { decode_model(future); }) == Errc::kVersionMismatch);
  auto magic = bytes;
  magic[1] = 'X';
  CHECK(code_of([&] { decode_model(magic); }) == Errc::kCorruptModel);

  WordModelSet set;
  for (const char* label : {"two", "one"}) {
    auto w = random_model(rng, 3, 1, 5);
    w.set_label(label);
    set.add(w);
  }
  const auto set_dir = dir / "models";
  save_model_set(set, set_dir);
  const auto loaded = load_model_set(set_dir);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.models().at("one") == set.models().at("one"));
  CHECK(loaded.models().at("two") == set.models().at("two"));
}
