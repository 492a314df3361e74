#pragma once

#include <cmath>
#include <vector>

#include "digitrec/features.hpp"
#include "digitrec/hmm.hpp"
#include "digitrec/rng.hpp"

namespace testutil {

inline digitrec::FeatureMatrix empty_features(std::size_t dim) {
  return digitrec::FeatureMatrix(digitrec::FeatureKind::kMfcc, dim, 10000);
}

// Random strict left-to-right model with well-conditioned parameters.
inline digitrec::HmmModel random_model(digitrec::Rng& rng, std::size_t states, std::size_t mixtures, std::size_t dim) {
  digitrec::HmmModel m("w", states, mixtures, empty_features(dim).signature());
  for (std::size_t s = 0; s < states; ++s) {
    m.set_self_loop(s, rng.uniform(0.05, 0.95));
    auto& g = m.state(s);
    double total = 0.0;
    for (auto& w : g.weights) total += (w = rng.uniform(0.1, 1.0));
    for (auto& w : g.weights) w /= total;
    for (auto& mu : g.means) {
      for (auto& v : mu) v = rng.uniform(-2.0, 2.0);
    }
    for (auto& var : g.variances) {
      for (auto& v : var) v = rng.uniform(0.3, 2.0);
    }
  }
  return m;
}

inline digitrec::FeatureMatrix random_features(digitrec::Rng& rng, std::size_t frames, std::size_t dim) {
  auto f = empty_features(dim);
  std::vector<double> row(dim);
  for (std::size_t t = 0; t < frames; ++t) {
    for (auto& v : row) v = rng.uniform(-3.0, 3.0);
    f.append_row(row);
  }
  return f;
}

// Draws one utterance by walking the model from entry to exit.
inline digitrec::FeatureMatrix sample_model(digitrec::Rng& rng, const digitrec::HmmModel& m) {
  auto f = empty_features(m.dim());
  std::vector<double> row(m.dim());
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    do {
      const auto& g = m.state(s);
      double u = rng.uniform();
      std::size_t c = 0;
      while (c + 1 < g.weights.size() && u > g.weights[c]) u -= g.weights[c++];
      for (std::size_t d = 0; d < row.size(); ++d) row[d] = g.means[c][d] + std::sqrt(g.variances[c][d]) * rng.normal();
      f.append_row(row);
    } while (rng.uniform() < m.transition(s + 1, s + 1));
  }
  return f;
}

}  // namespace testutil
